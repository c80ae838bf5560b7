"""Catalogue of rigid defining functions h(z, r) for hypersurfaces s = h.

Every model produces second-order jets in (x, y), so values, d/dz and the Levi
form d/dz d/dzbar are exact.  The r-dependence is an optional perturbation
``r_coupling * r * |z|^2`` that exercises the nonlinearity of the disc equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .funcpair import FunctionPair
from .jet import Jet
from .sector import SectorSpec, boundary_points, sector_map


# -- cut-off profile ---------------------------------------------------------

def _smoothstep(s):
    return s**3 * (10 - 15 * s + 6 * s * s)


def _smoothstep_d1(s):
    return 30 * s * s * (1 - s) ** 2


def _smoothstep_d2(s):
    return 60 * s * (1 - s) * (1 - 2 * s)


@dataclass(frozen=True)
class CutoffProfile:
    """Quintic smoothstep plateau: 1 on [-1, 1], 0 outside [-2, 2], C^2."""

    def __call__(self, u, order=0):
        u = np.asarray(u, dtype=float)
        s = np.clip(np.abs(u) - 1.0, 0.0, 1.0)
        if order == 0:
            return 1.0 - _smoothstep(s)
        if order == 1:
            return -_smoothstep_d1(s) * np.sign(u)
        return -_smoothstep_d2(s)

    def jet(self, u):
        return u.compose(self(u.v), self(u.v, 1), self(u.v, 2))


CUTOFF = CutoffProfile()


# -- holomorphic building blocks ----------------------------------------------

@dataclass(frozen=True)
class Holomorphic:
    """g = F^power for a function pair, or g = coef * z."""

    pair: FunctionPair | None = None
    power: int = 1
    coef: complex = 0j

    @classmethod
    def of_pair(cls, pair, power=1):
        return cls(pair=pair, power=int(power))

    @classmethod
    def linear(cls, coef):
        return cls(coef=complex(coef))

    def __call__(self, z, order=0):
        z = np.asarray(z, dtype=complex)
        if self.pair is None:
            return (self.coef * z, np.full_like(z, self.coef), np.zeros_like(z))[order]
        p = self.power
        F0 = self.pair.F(z)
        if order == 0:
            return F0**p
        F1 = self.pair.F(z, 1)
        if order == 1:
            return p * F0 ** (p - 1) * F1
        F2 = self.pair.F(z, 2)
        lower = p * (p - 1) * F0 ** (p - 2) * F1**2 if p >= 2 else 0
        return lower + p * F0 ** (p - 1) * F2

    def to_dict(self):
        if self.pair is None:
            return {"linear": [self.coef.real, self.coef.imag]}
        return {"pair": self.pair.to_dict(), "power": self.power}


def _re_holo_jet(g, z):
    return Jet.real_part(np.asarray(g(z, 0)), np.asarray(g(z, 1)), np.asarray(g(z, 2)))


# -- flat one-variable profiles ------------------------------------------------

def _flat_exp(t, a):
    """phi(t) = exp(-|t|^-a) with phi', phi''; identically flat at t = 0."""
    t = np.asarray(t, dtype=float)
    at = np.abs(t)
    nz = at > 0
    ats = np.where(nz, at, 1.0)
    with np.errstate(all="ignore"):
        q = np.power(ats, -a)
        f = np.where(nz, np.exp(-q), 0.0)
        live = nz & (f > 0)
        d1 = np.where(live, a * np.power(ats, -a - 1) * np.sign(t) * f, 0.0)
        d2 = np.where(live, f * (a * a * np.power(ats, -2 * a - 2) - a * (a + 1) * np.power(ats, -a - 2)), 0.0)
    return f, d1, d2


def _flat_double_exp(t, a):
    """phi(t) = exp(-exp(|t|^-a)) with derivatives."""
    t = np.asarray(t, dtype=float)
    at = np.abs(t)
    nz = at > 0
    ats = np.where(nz, at, 1.0)
    with np.errstate(all="ignore"):
        q = np.power(ats, -a)
        live = nz & (q < 700)
        E = np.exp(np.where(live, q, 0.0))
        f = np.where(live, np.exp(-E), 0.0)
        live &= f > 0
        g = a * np.power(ats, -a - 1) * E  # d/d|t| of -E, sign flipped
        dg = -a * (a + 1) * np.power(ats, -a - 2) * E - a * a * np.power(ats, -2 * a - 2) * E
        d1 = np.where(live, g * np.sign(t) * f, 0.0)
        d2 = np.where(live, (dg + g * g) * f, 0.0)
    return f, d1, d2


# -- models ---------------------------------------------------------------------

@dataclass(frozen=True)
class HypersurfaceModel:
    """Base class: subclasses implement ``_base_jet(z)``."""

    r_coupling: float = field(default=0.0, kw_only=True)
    radius: float = field(default=1.0, kw_only=True)

    variant = "abstract"

    def _base_jet(self, z):
        raise NotImplementedError

    def jet(self, z, r=0.0):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) >= self.radius):
            bad = z[np.abs(z) >= self.radius].ravel()[0]
            raise DomainError(f"model {self.variant} is only defined for |z| < {self.radius}", bad)
        J = self._base_jet(z)
        if self.r_coupling:
            X, Y = Jet.coord_x(z.real), Jet.coord_y(z.imag)
            J = J + (X * X + Y * Y) * (self.r_coupling * np.asarray(r, dtype=float))
        return J

    def __call__(self, z, r=0.0):
        return self.jet(z, r).v

    def dh_dr(self, z):
        z = np.asarray(z, dtype=complex)
        return self.r_coupling * np.abs(z) ** 2

    def params(self):
        return {"r_coupling": self.r_coupling}

    def to_dict(self):
        return {"variant": self.variant, **self.params()}


@dataclass(frozen=True)
class Zero(HypersurfaceModel):
    variant = "zero"

    def _base_jet(self, z):
        return Jet.const(0.0, z.shape)


@dataclass(frozen=True)
class FiniteType(HypersurfaceModel):
    """h = |z|^(2m) + c |z|^(2m - 2p) (Re z)^(2p)."""

    m: int = 2
    p: int = 1
    c: float = 0.0
    variant = "finite_type"

    def __post_init__(self):
        if not (1 <= self.p <= self.m):
            raise ParameterError(f"finite type needs 1 <= p <= m, got m={self.m}, p={self.p}")

    def _base_jet(self, z):
        X, Y = Jet.coord_x(z.real), Jet.coord_y(z.imag)
        rho2 = X * X + Y * Y

        def power(J, k):
            if k == 0:
                return Jet.const(1.0, z.shape)
            v = J.v
            return J.compose(v**k, k * v ** (k - 1), k * (k - 1) * v ** (k - 2) if k >= 2 else 0 * v)

        return power(rho2, self.m) + self.c * power(rho2, self.m - self.p) * power(X, 2 * self.p)

    def params(self):
        return {"m": self.m, "p": self.p, "c": self.c, **super().params()}


def _cutoff_times_re(F, z, exponent, scale, cut_profile=CUTOFF):
    """chi(y / (scale x^exponent)) * Re F(z), vanishing for x <= 0."""
    x = z.real
    pos = x > 0
    with np.errstate(all="ignore"):
        arg = np.abs(z.imag) / (scale * np.where(pos, x, 1.0) ** exponent)
    # outside supp chi the product is 0, even where F itself overflows
    live = pos & (arg < 2)
    xs = np.where(live, x, 1.0)
    zs = np.where(live, z, 1.0)
    X, Y = Jet.coord_x(xs), Jet.coord_y(np.where(live, z.imag, 0.0))
    inv = X.compose(xs**-exponent, -exponent * xs ** (-exponent - 1),
                    exponent * (exponent + 1) * xs ** (-exponent - 2))
    u = Y * inv * (1.0 / scale)
    chi = cut_profile.jet(u)
    g = Holomorphic.of_pair(F)
    return (chi * _re_holo_jet(g, zs)).where(live)


@dataclass(frozen=True)
class InfSingleExp(HypersurfaceModel):
    """h = exp(-1/|y|^a) - chi(y / (2 alpha_cut x^(a+1))) Re exp(-1/z^b), a < b < a(a+1)."""

    a: float = 1.0
    b: float = 1.5
    alpha_cut: float = 1.5
    variant = "inf_single_exp"

    def __post_init__(self):
        if not (self.a < self.b < self.a * (self.a + 1)):
            raise ParameterError(
                f"calibration rule a<b<a(a+1) violated: a={self.a}, b={self.b}, a(a+1)={self.a * (self.a + 1)}")
        if not self.alpha_cut > 0:
            raise ParameterError("alpha_cut must be positive")

    @property
    def bump_pair(self):
        return FunctionPair.exp(self.b)

    def _base_jet(self, z):
        flat = Jet.coord_y(z.imag).compose(*_flat_exp(z.imag, self.a))
        return flat - _cutoff_times_re(self.bump_pair, z, self.a + 1, 2 * self.alpha_cut)

    def params(self):
        return {"a": self.a, "b": self.b, "alpha_cut": self.alpha_cut, **super().params()}


@dataclass(frozen=True)
class TubeFailure(HypersurfaceModel):
    """h = exp(-1/|y|^a) - chi(y / (2 x^(b+1))) Re exp(-1/z^b), (b+1) a < b."""

    a: float = 0.4
    b: float = 0.8
    variant = "tube_failure"

    def __post_init__(self):
        if not ((self.b + 1) * self.a < self.b):
            raise ParameterError(f"rule (b+1)a<b violated: a={self.a}, b={self.b}")

    @property
    def bump_pair(self):
        return FunctionPair.exp(self.b)

    def _base_jet(self, z):
        flat = Jet.coord_y(z.imag).compose(*_flat_exp(z.imag, self.a))
        return flat - _cutoff_times_re(self.bump_pair, z, self.b + 1, 2.0)

    def params(self):
        return {"a": self.a, "b": self.b, **super().params()}


@dataclass(frozen=True)
class InfDoubleExp(HypersurfaceModel):
    """h = exp(-exp(1/|y|^a)) - chi(y / D(x)) Re exp(-exp(1/z^b)).

    D(x) = 2 c_{alpha,x} x^(a+1) exp(-1/x^a) exp(-exp(1/x^a)) with
    c_{alpha,x} = 1 + log(alpha_cut) / log(-log x); requires |z| < 1/e.
    """

    a: float = 0.5
    b: float = 0.6
    alpha_cut: float = 1.5
    radius: float = field(default=math.exp(-1), kw_only=True)
    variant = "inf_double_exp"

    def __post_init__(self):
        if not (self.a < self.b < self.a * (self.a + 1)):
            raise ParameterError(
                f"calibration rule a<b<a(a+1) violated: a={self.a}, b={self.b}, a(a+1)={self.a * (self.a + 1)}")
        if self.radius > math.exp(-1):
            raise ParameterError("double-exponential cut-off needs radius <= 1/e")

    @property
    def bump_pair(self):
        return FunctionPair.double_exp(self.b)

    def _inv_scale(self, x):
        """1/D(x) and its first two derivatives, computed from log(1/D)."""
        a, La = self.a, math.log(self.alpha_cut)
        lx = np.log(x)
        ell = np.log(-lx)
        ell1 = 1 / (x * lx)
        ell2 = -(lx + 1) / (x * lx) ** 2
        c = 1 + La / ell
        c1 = -La * ell1 / ell**2
        c2 = -La * (ell2 / ell**2 - 2 * ell1**2 / ell**3)
        t = np.power(x, -a)
        t1 = -a * np.power(x, -a - 1)
        t2 = a * (a + 1) * np.power(x, -a - 2)
        Et = np.exp(np.minimum(t, 700))
        g = -math.log(2) - np.log(c) - (a + 1) * lx + t + Et
        g1 = -c1 / c - (a + 1) / x + t1 + t1 * Et
        g2 = -(c2 * c - c1**2) / c**2 + (a + 1) / x**2 + t2 + (t2 + t1**2) * Et
        return g, g1, g2

    def _base_jet(self, z):
        flat = Jet.coord_y(z.imag).compose(*_flat_double_exp(z.imag, self.a))
        x = z.real
        with np.errstate(all="ignore"):
            g, g1, g2 = self._inv_scale(np.where(x > 0, x, 0.1))
            live = (x > 0) & (g < 700) & (np.power(np.where(x > 0, x, 1), -self.a) < 700)
            eg = np.exp(np.where(live, g, 0))
            live &= np.abs(z.imag) * eg < 2
            X, Y = Jet.coord_x(np.where(live, x, 0.1)), Jet.coord_y(z.imag)
            inv = X.compose(eg, g1 * eg, (g2 + g1**2) * eg)
            u = Y * inv
            chi = CUTOFF.jet(u)
            zs = np.where(live, z, 0.1)
            bump = (chi * _re_holo_jet(Holomorphic.of_pair(self.bump_pair), zs)).where(live)
        return flat - bump

    def params(self):
        return {"a": self.a, "b": self.b, "alpha_cut": self.alpha_cut, **super().params()}


@dataclass(frozen=True)
class RePart(HypersurfaceModel):
    """h = Re g(z) for a holomorphic g (closed-form disc oracle)."""

    g: Holomorphic = None
    variant = "re_part"

    def _base_jet(self, z):
        return _re_holo_jet(self.g, z)

    def params(self):
        return {"g": self.g.to_dict(), **super().params()}


def eval_h(model, z, r=0.0, order=0):
    """h and its complex derivatives: order in {0, 'dz', 'dzbar', 'dzdzbar'}."""
    J = model.jet(z, r)
    if order == 0:
        out = J.v
    elif order == "dz":
        out = J.dz
    elif order == "dzbar":
        out = J.dzbar
    elif order == "dzdzbar":
        out = J.dzdzbar
    else:
        raise ValueError(f"unknown order {order!r}")
    return out.item() if np.ndim(out) == 0 else out


# -- hypothesis checks ------------------------------------------------------------

@dataclass
class GrowthReport:
    h_over_F: float
    h_over_theta_alpha: float
    d1_over_dF: float
    d2_over_d2F: float
    per_r: dict
    skipped: int = 0

    def as_dict(self):
        return {"h_over_F": self.h_over_F, "h_over_theta_alpha": self.h_over_theta_alpha,
                "d1_over_dF": self.d1_over_dF, "d2_over_d2F": self.d2_over_d2F,
                "per_r": self.per_r, "skipped": self.skipped}


def _safe_sup(num, den):
    ok = (den > 0) & np.isfinite(den) & np.isfinite(num)
    return (float(np.max(num[ok] / den[ok])) if ok.any() else 0.0), int((~ok).sum())


def check_growth_hypotheses(model, pair, alpha, theta_grid, r_grid=(0.0,)):
    """Sup ratios |h|/F(|z|), |h o F*_alpha|/|theta|^alpha, |D1 h|/|F'|, |D2 h|/|F''| on the sector boundary."""
    spec = SectorSpec(pair, alpha)
    thetas = np.asarray(theta_grid, dtype=float)
    z = boundary_points(spec, thetas)
    az = np.abs(z).astype(complex)
    F0 = np.abs(pair.F(az))
    F1 = np.abs(pair.F(az, 1))
    F2 = np.abs(pair.F(az, 2))
    per_r = {}
    worst = np.zeros(4)
    skipped = 0
    for r in r_grid:
        J = model.jet(z, r)
        vals = []
        for num, den in ((np.abs(J.v), F0), (np.abs(J.v), np.abs(thetas) ** alpha),
                         (J.gradient_norm, F1), (J.hessian_norm, F2)):
            s, k = _safe_sup(num, den)
            vals.append(s)
            skipped += k
        per_r[float(r)] = vals
        worst = np.maximum(worst, vals)
    return GrowthReport(*map(float, worst), per_r=per_r, skipped=skipped)


@dataclass
class SectorPropertyReport:
    max_h: float
    strict_tau: np.ndarray
    n_samples: int
    argmax_tau: complex

    @property
    def holds(self):
        return self.max_h <= 0

    @property
    def strict(self):
        return len(self.strict_tau) > 0


def sector_samples(theta_grid, radii=(0.25, 0.5, 0.75, 0.9, 0.99), ray_angles=41, ray_points=60):
    """Parameter points tau: boundary angles, concentric circles, and rays into the vertex."""
    th = np.asarray(theta_grid, dtype=float)
    taus = [np.exp(1j * th)]
    for t in radii:
        taus.append(t * np.exp(1j * th))
    psi = np.linspace(-np.pi / 2, np.pi / 2, ray_angles + 2)[1:-1]
    s = np.geomspace(1e-8, 1.0, ray_points)
    P, S = np.meshgrid(psi, s)
    S = np.minimum(S, 2 * np.cos(P) * (1 - 1e-12))
    taus.append((1 - S * np.exp(1j * P)).ravel())
    return np.concatenate(taus)


def sector_property(model, spec, theta_grid, r_grid=(0.0,)):
    """Max of h over sampled points of the (punctured) sector and where h < 0 strictly."""
    if spec.smoothed:
        raise ValueError("sector_property needs an unsmoothed sector")
    tau = sector_samples(theta_grid)
    tau = tau[tau != 1]
    z = sector_map(spec, tau)
    best, arg, strict = -np.inf, None, np.zeros(len(tau), dtype=bool)
    for r in r_grid:
        h = model(z, r)
        i = int(np.argmax(h))
        if h[i] > best:
            best, arg = float(h[i]), complex(tau[i])
        strict |= h < 0
    return SectorPropertyReport(best, tau[strict], len(tau), arg)


MODEL_TYPES = {cls.variant: cls for cls in (Zero, FiniteType, InfSingleExp, InfDoubleExp, TubeFailure, RePart)}


def model_from_params(variant, **params):
    """Build a catalogue model from flat parameters (used by the CLI)."""
    if variant not in MODEL_TYPES:
        raise ParameterError(f"unknown model variant {variant!r}; choose from {sorted(MODEL_TYPES)}")
    return MODEL_TYPES[variant](**params)
