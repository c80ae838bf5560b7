"""Cusped sectors S_alpha = F*(eps (1 - Delta)^alpha), smoothed approximants, boundary asymptotics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, UnsupportedOperation
from .funcpair import FunctionPair, Kind


@dataclass(frozen=True)
class SectorSpec:
    pair: FunctionPair
    alpha: float
    nu: int | None = None
    translate: complex = 0j

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            # alpha > 2 pushes eps*(1 - tau)^alpha across the branch cut of F*.
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.nu is not None and (int(self.nu) != self.nu or self.nu < 1):
            raise ValueError(f"nu must be a positive integer, got {self.nu}")
        object.__setattr__(self, "translate", complex(self.translate))

    @property
    def smoothed(self):
        return self.nu is not None

    def with_nu(self, nu):
        return replace(self, nu=nu)

    def with_translate(self, offset):
        return replace(self, translate=complex(offset))

    def to_dict(self):
        return {"pair": self.pair.to_dict(), "alpha": self.alpha, "nu": self.nu,
                "translate": [self.translate.real, self.translate.imag]}


def _fstar_alpha(spec, w, order=0):
    """d^order/dw^order of F*(eps w^alpha)."""
    p, al, eps = spec.pair, spec.alpha, spec.pair.epsilon
    zero = w == 0
    ws = np.where(zero, 1.0, w)
    with np.errstate(all="ignore"):
        inner = np.where(zero, 0, eps * np.power(ws, al))
        if order == 0:
            return p.Fstar(inner)
        d1 = eps * al * np.power(ws, al - 1)
        if order == 1:
            return p.Fstar(inner, 1) * d1
        d2 = eps * al * (al - 1) * np.power(ws, al - 2)
        return p.Fstar(inner, 2) * d1**2 + p.Fstar(inner, 1) * d2


def sector_map(spec, tau, order=0):
    """Point of the sector over tau (closed unit disc); order 1, 2 give d/dtau derivatives.

    Unsmoothed: F*(eps (1 - tau)^alpha) + translate, with the vertex tau = 1 sent to
    ``translate``.  Smoothed: F*(eps (1 - tau + 1/nu)^alpha) - F*(eps nu^-alpha) + translate.
    """
    scalar = np.ndim(tau) == 0
    tau = np.asarray(tau, dtype=complex)
    if np.any(np.abs(tau) > 1 + 1e-12):
        raise DomainError("sector_map needs |tau| <= 1", tau[np.abs(tau) > 1 + 1e-12].ravel()[0])
    out = sector_map_w(spec, 1 - tau, order)
    return complex(out) if scalar else out


def sector_map_w(spec, w, order=0):
    """sector_map in the variable w = 1 - tau (keeps full precision near the vertex)."""
    w = np.asarray(w, dtype=complex)
    if spec.smoothed:
        shift = 1.0 / spec.nu
        out = _fstar_alpha(spec, w + shift, order)
        if order == 0:
            out = out - _fstar_alpha(spec, np.asarray(shift + 0j))
    else:
        if order and np.any(w == 0):
            raise DomainError("the unsmoothed sector map is not differentiable at the vertex", 1 + 0j)
        out = _fstar_alpha(spec, w, order)
    if order == 0:
        out = np.where(w == 0, 0, out) + spec.translate
    else:
        out = out * (-1) ** order
    return np.asarray(out)


def boundary_w(thetas):
    """1 - e^{i theta} written as -2i sin(theta/2) e^{i theta/2}, accurate for tiny theta."""
    th = np.asarray(thetas, dtype=float)
    return -2j * np.sin(th / 2) * np.exp(0.5j * th)


def boundary_points(spec, thetas, order=0):
    out = sector_map_w(spec, boundary_w(thetas), order)
    return complex(out) if np.ndim(thetas) == 0 else out


def contains(spec, z):
    """Whether z lies in the open unsmoothed sector."""
    if spec.smoothed:
        raise UnsupportedOperation("contains() is only defined for unsmoothed sectors")
    z = complex(z) - spec.translate
    if z == 0:
        return False
    pair = spec.pair
    try:
        zeta = complex(pair.F(z))
        if zeta == 0 or abs(complex(pair.Fstar(zeta)) - z) > 1e-9 * abs(z):
            return False  # z is not in the range of F*
    except DomainError:
        return False
    s = (zeta / pair.epsilon) ** (1.0 / spec.alpha)
    return abs(1 - s) < 1


@dataclass
class BoundaryTrace:
    thetas: np.ndarray
    points: np.ndarray
    underflow: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.underflow is None:
            self.underflow = np.zeros(len(self.thetas), dtype=bool)

    @property
    def x(self):
        return self.points.real

    @property
    def y(self):
        return self.points.imag

    def __len__(self):
        return len(self.thetas)

    def restrict_x(self, lo, hi):
        """Sub-trace of the points with lo <= x <= hi."""
        keep = (self.x >= lo) & (self.x <= hi)
        return BoundaryTrace(self.thetas[keep], self.points[keep], self.underflow[keep])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "x", "y", "underflow_flag"])
            for th, p, f in zip(self.thetas, self.points, self.underflow):
                w.writerow([repr(float(th)), repr(float(p.real)), repr(float(p.imag)), int(bool(f))])


def boundary_trace(spec, theta_min, theta_max, n):
    if not 0 < theta_min < theta_max <= math.pi:
        raise ValueError("need 0 < theta_min < theta_max <= pi")
    if n < 2:
        raise ValueError("need at least two points")
    thetas = np.geomspace(theta_min, theta_max, n)
    pts = boundary_points(spec, thetas)
    flags = np.asarray(spec.pair.underflow(pts - spec.translate), dtype=bool)
    return BoundaryTrace(thetas, pts, flags)


def theta_for_exp_abscissa(pair, alpha, x):
    """Boundary angle whose sector point has real part ~ x (exp kind, small-theta expansion)."""
    if pair.kind is not Kind.EXP:
        raise ValueError("only meaningful for the exp kind")
    # x ~ 1/A^(1/a) with A = -log eps - alpha log theta
    A = np.power(np.asarray(x, dtype=float), -pair.a)
    return np.exp(-(A + math.log(pair.epsilon)) / alpha)


@dataclass(frozen=True)
class PowerFit:
    exponent: float
    coefficient: float
    r_squared: float


def asymptotic_fit(trace, fixed_exponent=None):
    """Least-squares fit log|y| = exponent * log x + log coefficient.

    With ``fixed_exponent`` only the coefficient is fitted (mean log residual).
    """
    x, y = trace.x, np.abs(trace.y)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 5:
        raise ValueError("degenerate trace: need at least 5 points with x > 0 and y != 0")
    lx, ly = np.log(x[ok]), np.log(y[ok])
    if fixed_exponent is None:
        slope, intercept = np.polyfit(lx, ly, 1)
    else:
        slope = float(fixed_exponent)
        intercept = float(np.mean(ly - slope * lx))
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return PowerFit(float(slope), float(math.exp(intercept)), float(r2))


@dataclass(frozen=True)
class ProfileCheck:
    deviation: float
    constant: float
    spread: float
    ratios: np.ndarray


def doubleexp_log_profile(a, alpha, x):
    """log of c_{alpha,x} x^(a+1) exp(-1/x^a) exp(-exp(1/x^a))."""
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        c = 1 + math.log(alpha) / np.log(-np.log(x))
        t = np.power(x, -a)
        # c is only a positive constant for x well below 1/e
        return np.where((x < 1 / math.e) & (c > 0), np.log(np.abs(c)) + (a + 1) * np.log(x) - t - np.exp(t),
                        np.nan)


def doubleexp_leading_log_profile(a, alpha, x):
    """log of (alpha pi / 2a) x^(a+1) exp(-1/x^a), the leading-order boundary height."""
    x = np.asarray(x, dtype=float)
    return math.log(alpha * math.pi / (2 * a)) + (a + 1) * np.log(x) - np.power(x, -a)


PROFILES = {"stated": doubleexp_log_profile, "leading": doubleexp_leading_log_profile}


def doubleexp_profile_check(spec, trace, profile="stated"):
    """Compare |y| on the boundary with a double-exponential cusp profile.

    ``profile`` is "stated" (with the extra exp(-exp(1/x^a)) factor) or "leading".
    ``deviation`` is max |ratio - K| for the minimax constant K; ``spread`` is
    max(ratio)/min(ratio), the comparability factor.
    """
    if spec.pair.kind is not Kind.DOUBLE_EXP:
        raise ValueError("profile check needs a double-exponential pair")
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    keep = ~np.asarray(trace.underflow, dtype=bool) & (np.abs(trace.y) > 0) & (trace.x > 0)
    if not keep.any():
        raise ValueError("every trace point underflowed")
    x, y = trace.x[keep], np.abs(trace.y[keep])
    log_ratio = np.log(y) - PROFILES[profile](spec.pair.a, spec.alpha, x)
    log_ratio = log_ratio[np.isfinite(log_ratio)]
    if log_ratio.size == 0:
        raise ValueError("the profile is undefined at every trace point (needs x < 1/e)")
    with np.errstate(over="ignore"):
        ratios = np.exp(log_ratio)
        spread = float(np.exp(log_ratio.max() - log_ratio.min()))
    if not np.all(np.isfinite(ratios)):
        return ProfileCheck(math.inf, math.inf, spread, ratios)
    K = 0.5 * (ratios.max() + ratios.min())
    return ProfileCheck(float(np.max(np.abs(ratios - K))), float(K), spread, ratios)


def default_theta_grid(n=50, theta_min=1e-4):
    half = np.geomspace(theta_min, math.pi, n)
    return np.concatenate([-half[::-1], half])


def increment_domination(spec, theta_grid=None):
    """min over theta of |F*_alpha(1 - e^{i theta})| - |F*_{alpha nu}(1 - e^{i theta})|."""
    if not spec.smoothed:
        raise ValueError("increment_domination needs a smoothed spec (nu set)")
    thetas = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    base = replace(spec, nu=None, translate=0j)
    smooth = replace(spec, translate=0j)
    slack = np.abs(boundary_points(base, thetas)) - np.abs(boundary_points(smooth, thetas))
    return float(slack.min())


def domination_slack(spec, thetas):
    base = replace(spec, nu=None, translate=0j)
    smooth = replace(spec, translate=0j)
    return np.abs(boundary_points(base, thetas)) - np.abs(boundary_points(smooth, thetas))
