"""Levi-form (subharmonicity) checks, the conical pseudoconvex bump, and finite-type thresholds.

For a rigid domain {s > h(z)} pseudoconvexity is read as subharmonicity of h in
z, so every check here is phrased through the Laplacian 4 d_z d_zbar h.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .funcpair import FunctionPair
from .hypersurface import CUTOFF, CutoffProfile, FiniteType, HypersurfaceModel, Zero, sector_property
from .jet import Jet
from .sector import SectorSpec, default_theta_grid

MAX_VIOLATIONS = 100
LAPLACIAN_METHODS = ("stencil", "stencil9", "exact")


# -- conical cut-off and bumped model ---------------------------------------------

@dataclass(frozen=True)
class ConeBumpSpec:
    """h~ = h - eta * chi * Re F, chi = 1 on |arg F| <= alpha pi/2 and 0 beyond alpha1 pi/2.

    The angle is the continuous branch Im log F, so points outside the range of
    F* are never mistaken for cone points.
    """

    pair: FunctionPair
    alpha: float
    alpha1: float
    eta: float = 0.0
    cutoff: CutoffProfile = CUTOFF

    def __post_init__(self):
        if not 0 < self.alpha < self.alpha1 < 1:
            raise ParameterError(f"cone bump needs 0 < alpha < alpha1 < 1, got {self.alpha}, {self.alpha1}")
        if self.eta < 0:
            raise ParameterError("bump amplitude eta must be >= 0")

    def with_eta(self, eta):
        return ConeBumpSpec(self.pair, self.alpha, self.alpha1, float(eta), self.cutoff)

    @property
    def width(self):
        return (self.alpha1 - self.alpha) * math.pi / 2

    def angle_jet(self, z):
        """Jet of phi = Im log F (harmonic)."""
        p = self.pair
        return Jet.imag_part(p.log_F(z), p.log_F(z, 1), p.log_F(z, 2))

    def chi_jet(self, z):
        phi = self.angle_jet(z)
        s = np.sign(phi.v)
        # |phi| is only kinked where chi is flat, so sign * jet is exact
        u = phi * s * (1.0 / self.width) + (1.0 - self.alpha * math.pi / 2 / self.width)
        # the profile is even: clamp deep-inside values where chi is flat anyway
        return self.cutoff.jet(u.where(u.v > 0, 0.0))

    def chi(self, z):
        return self.chi_jet(np.asarray(z, dtype=complex)).v

    def re_F_jet(self, z):
        p = self.pair
        return Jet.real_part(p.F(z), p.F(z, 1), p.F(z, 2))

    def to_dict(self):
        return {"pair": self.pair.to_dict(), "alpha": self.alpha, "alpha1": self.alpha1, "eta": self.eta}


@dataclass(frozen=True)
class ConeBumped(HypersurfaceModel):
    """Base model minus the conical bump; the bump lives in Re z > 0."""

    base: HypersurfaceModel = None
    cone: ConeBumpSpec = None
    bounds: dict = field(default_factory=dict, compare=False)
    variant = "cone_bumped"

    def _base_jet(self, z):
        J = self.base.jet(z, 0.0)
        if not self.cone.eta:
            return J
        pos = z.real > 0
        zs = np.where(pos, z, 1.0)
        with np.errstate(all="ignore"):
            bump = (self.cone.chi_jet(zs) * self.cone.re_F_jet(zs)).where(pos)
        return J - bump * self.cone.eta

    def bump_term(self, z):
        """h - h~ = eta chi Re F, evaluated directly (no cancellation against h)."""
        z = np.asarray(z, dtype=complex)
        pos = z.real > 0
        zs = np.where(pos, z, 1.0)
        with np.errstate(all="ignore"):
            val = self.cone.eta * self.cone.chi(zs) * np.real(self.cone.pair.F(zs))
        return np.where(pos, val, 0.0)

    def params(self):
        return {"base": self.base.to_dict(), "cone": self.cone.to_dict(), **super().params()}


def cone_samples(pair, alpha, alpha1, n_angle=40, n_radius=60, rho_range=(1e-60, 1e-3), include_inner=False):
    """z = F*(rho e^{i psi}) with |psi| in (alpha pi/2, alpha1 pi/2), or |psi| < alpha1 pi/2 if include_inner."""
    lo = 0.0 if include_inner else alpha * math.pi / 2
    hi = alpha1 * math.pi / 2
    psi = np.linspace(lo, hi, n_angle + 2)[1:-1]
    psi = np.concatenate([-psi[::-1], psi])
    rho = np.geomspace(*rho_range, n_radius)
    R, P = np.meshgrid(rho, psi)
    return np.asarray(pair.Fstar(R * np.exp(1j * P))).ravel()


def check_cone_comparability(pair, alpha1, samples):
    """min Re F / |F| over the samples (>= cos(alpha1 pi/2) on the cone)."""
    F = np.asarray(pair.F(np.asarray(samples, dtype=complex)))
    ok = F != 0
    return float(np.min(F[ok].real / np.abs(F[ok])))


def condition_ratio(model, pair, samples, r=0.0):
    """(d_z d_zbar h) |F| / |F'|^2 at each sample."""
    z = np.asarray(samples, dtype=complex)
    ddbar = model.jet(z, r).dzdzbar
    F0, F1 = np.abs(pair.F(z)), np.abs(pair.F(z, 1))
    with np.errstate(all="ignore"):
        return ddbar * F0 / F1**2


def check_condition_2_2(model, pair, alpha, alpha1, samples=None, r=0.0):
    """min over annular-cone samples of (d_z d_zbar h) |F| / |F'|^2; > 0 certifies the Levi lower bound."""
    if samples is None:
        samples = cone_samples(pair, alpha, alpha1)
    ratio = condition_ratio(model, pair, samples, r)
    ratio = ratio[np.isfinite(ratio)]
    if ratio.size == 0:
        raise ValueError("no finite samples on the annular cone")
    return float(ratio.min())


def cutoff_derivative_bounds(cone, samples):
    """Sampled sups of |d_z chi| |F|/|F'| and |d_z d_zbar chi| |F|^2/|F'|^2."""
    z = np.asarray(samples, dtype=complex)
    chi = cone.chi_jet(z)
    F0, F1 = np.abs(cone.pair.F(z)), np.abs(cone.pair.F(z, 1))
    with np.errstate(all="ignore"):
        r1 = np.abs(chi.dz) * F0 / F1
        r2 = np.abs(chi.dzdzbar) * F0**2 / F1**2
    return {"first": float(np.nanmax(r1)), "second": float(np.nanmax(r2))}


def build_bump(model, cone, samples=None):
    """The bumped model, after checking the Levi lower bound on the annular cone."""
    if cone.eta == 0:
        return model
    if samples is None:
        samples = cone_samples(cone.pair, cone.alpha, cone.alpha1)
    c = check_condition_2_2(model, cone.pair, cone.alpha, cone.alpha1, samples)
    if not c > 0:
        raise ParameterError(
            f"Levi lower bound d_z d_zbar h >~ |F'|^2/|F| fails on the annular cone (min constant {c:.3e})")
    bounds = cutoff_derivative_bounds(cone, samples)
    bounds["levi_lower_constant"] = c
    bounds["cone_comparability"] = check_cone_comparability(cone.pair, cone.alpha1, samples)
    return ConeBumped(base=model, cone=cone, bounds=bounds, radius=model.radius)


@dataclass(frozen=True)
class BumpComparison:
    """h~ <= h everywhere sampled, h~ < h on the inner cone, h~(0) = 0."""

    max_excess: float
    min_gap_inner: float
    value_at_0: float
    scale: float
    n_samples: int

    @property
    def holds(self):
        return (self.max_excess <= 1e-14 * self.scale and self.min_gap_inner > 0
                and self.value_at_0 == 0)

    def as_dict(self):
        return {"max_excess": self.max_excess, "min_gap_inner": self.min_gap_inner,
                "value_at_0": self.value_at_0, "scale": self.scale, "n_samples": self.n_samples,
                "holds": self.holds}


def compare_bump(bumped, everywhere, inner):
    everywhere = np.asarray(everywhere, dtype=complex)
    h, ht = bumped.base(everywhere), bumped(everywhere)
    scale = max(float(np.max(np.abs(h))), 1e-300)
    inner = np.asarray(inner, dtype=complex)
    gap = bumped.bump_term(inner)
    return BumpComparison(float(np.max(ht - h)), float(np.min(gap)), float(bumped(np.zeros(1))[0]),
                          scale, len(everywhere) + len(inner))


# -- Laplacian grids ------------------------------------------------------------------

@dataclass
class LeviReport:
    region: tuple
    n: int
    step: tuple
    method: str
    min_laplacian: float
    scale: float
    min_exact: float
    stencil_vs_exact: float
    violation_points: list
    bound_constants: dict = field(default_factory=dict)

    def holds(self, rel_tol=1e-8):
        return self.min_laplacian >= -rel_tol * self.scale

    def as_dict(self):
        return {"region": list(self.region), "n": self.n, "step": list(self.step), "method": self.method,
                "min_laplacian": self.min_laplacian, "scale": self.scale, "min_exact": self.min_exact,
                "stencil_vs_exact": self.stencil_vs_exact,
                "violation_points": [[p.real, p.imag] for p in self.violation_points],
                "bound_constants": self.bound_constants}

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)


def region_grid(region, n, method):
    x0, x1, y0, y1 = map(float, region)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("region must have x0 < x1 and y0 < y1")
    if n < 5:
        raise ValueError("need at least 5 nodes per side")
    if method not in LAPLACIAN_METHODS:
        raise ValueError(f"method must be one of {LAPLACIAN_METHODS}")
    hx, hy = (x1 - x0) / (n - 1), (y1 - y0) / (n - 1)
    if method == "stencil9" and not math.isclose(hx, hy, rel_tol=1e-9):
        raise ValueError("the 9-point stencil needs a square grid step")
    dist0 = math.hypot(max(x0, 0, -x1), max(y0, 0, -y1))
    if dist0 < 2 * max(hx, hy):
        raise ValueError("region must stay at least two grid steps away from the singular point z = 0")
    X, Y = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n), indexing="ij")
    return (x0, x1, y0, y1), (hx, hy), X + 1j * Y


def _stencil(H, step, method):
    hx, hy = step
    if method == "stencil9":
        cross = H[2:, 1:-1] + H[:-2, 1:-1] + H[1:-1, 2:] + H[1:-1, :-2]
        diag = H[2:, 2:] + H[2:, :-2] + H[:-2, 2:] + H[:-2, :-2]
        return (4 * cross + diag - 20 * H[1:-1, 1:-1]) / (6 * hx**2)
    return ((H[2:, 1:-1] - 2 * H[1:-1, 1:-1] + H[:-2, 1:-1]) / hx**2
            + (H[1:-1, 2:] - 2 * H[1:-1, 1:-1] + H[1:-1, :-2]) / hy**2)


def _report(region, n, step, method, Z, H, exact, violation_tol):
    sten = _stencil(H, step, "stencil5" if method == "exact" else method)
    lap = exact if method == "exact" else sten
    scale = float(np.max(np.abs(lap)))
    bad = lap < -violation_tol * scale
    pts = Z[1:-1, 1:-1][bad]
    order = np.argsort(lap[bad])[:MAX_VIOLATIONS]
    return LeviReport(region, n, step, method, float(lap.min()), scale,
                      float(exact.min()), float(np.max(np.abs(sten - exact))), list(pts[order]))


def laplacian_grid(model, region, n=201, r=0.0, method="stencil", violation_tol=1e-8):
    """Laplacian of h on an n x n grid over region = (x0, x1, y0, y1).

    method "stencil" uses the 5-point stencil at interior nodes, "stencil9" the
    compact 9-point stencil (square steps; its leading error vanishes on harmonic
    functions) and "exact" the closed-form second derivatives.  The stencil in use
    (5-point for "exact") is always compared against the closed form.
    """
    region, step, Z = region_grid(region, n, method)
    J = model.jet(Z, r)
    return _report(region, n, step, method, Z, J.v, J.laplacian[1:-1, 1:-1], violation_tol)


def max_admissible_eta(model, cone, region, n=201, method="stencil", rel_tol=1e-3, threshold=1e-10,
                       eta_max=1e6):
    """Largest eta with min Laplacian of h~ >= -threshold * scale on the grid (0 if none).

    h~ is linear in eta, so the base and bump jets are evaluated once and the
    bisection runs on their combination.
    """
    region, step, Z = region_grid(region, n, method)
    J0 = model.jet(Z, 0.0)
    Jb = ConeBumped(base=Zero(radius=model.radius), cone=cone.with_eta(1.0), radius=model.radius).jet(Z)
    L0, Lb = J0.laplacian[1:-1, 1:-1], Jb.laplacian[1:-1, 1:-1]
    if method != "exact":
        L0, Lb = _stencil(J0.v, step, method), _stencil(Jb.v, step, method)

    def ok(eta):
        lap = L0 + eta * Lb
        return lap.min() >= -threshold * np.max(np.abs(lap))

    if not ok(0.0):
        return 0.0
    lo, hi = 0.0, 1e-12
    while ok(hi):
        lo, hi = hi, hi * 10
        if hi > eta_max:
            return lo
    if lo == 0.0:
        return 0.0
    while hi - lo > rel_tol * lo:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


# -- finite-type thresholds -------------------------------------------------------

PAPER_THRESHOLDS = {(2, 1): {"sector": math.sqrt(2), "subharmonic": 4 / 3}}


def _paper_sector(m, p):
    if (m, p) in PAPER_THRESHOLDS:
        return PAPER_THRESHOLDS[(m, p)]["sector"]
    c = math.cos(2 * p * math.pi / (4 * m))
    return 1 / c if c > 1e-12 else None


def _bisect(pred, good, bad, tol):
    """Boundary between pred(good) = True and pred(bad) = False."""
    while abs(good - bad) > tol:
        mid = 0.5 * (good + bad)
        good, bad = (mid, bad) if pred(mid) else (good, mid)
    return 0.5 * (good + bad)


def _find_threshold(pred, start, tol, reach=1e3):
    """Search both orientations of c from ``start``; returns (negative side, positive side) boundaries."""
    out = []
    holds0 = pred(start)
    for direction in (-1, 1):
        step, c_prev = 1.0, start
        found = None
        while step <= reach:
            c = start + direction * step
            if pred(c) != holds0:
                found = (_bisect(pred, c_prev, c, tol) if holds0 else _bisect(pred, c, c_prev, tol))
                break
            c_prev, step = c, step * 2
        out.append(found)
    return out


@dataclass
class ThresholdResult:
    m: int
    p: int
    alpha: float
    c_sector: float | None
    c_subharmonic: float | None
    c_sector_other: float | None
    c_subharmonic_other: float | None
    paper_c_sector: float | None
    paper_c_subharmonic: float | None
    tol: float

    def _flag(self, ours, stated):
        if ours is None or stated is None:
            return "n/a"
        if abs(ours - stated) <= 1e-3:
            return "match"
        if abs(abs(ours) - abs(stated)) <= 1e-3:
            return "sign mismatch"
        return "mismatch"

    @property
    def sector_flag(self):
        return self._flag(self.c_sector, self.paper_c_sector)

    @property
    def subharmonic_flag(self):
        return self._flag(self.c_subharmonic, self.paper_c_subharmonic)

    def row(self):
        return {"m": self.m, "p": self.p, "alpha": self.alpha, "c_sector": self.c_sector,
                "c_subharmonic": self.c_subharmonic, "paper_c_sector": self.paper_c_sector,
                "paper_c_subharmonic": self.paper_c_subharmonic}

    def as_dict(self):
        return {**self.row(), "c_sector_other": self.c_sector_other,
                "c_subharmonic_other": self.c_subharmonic_other, "sector_flag": self.sector_flag,
                "subharmonic_flag": self.subharmonic_flag, "tol": self.tol}


THRESHOLD_COLUMNS = ["m", "p", "alpha", "c_sector", "c_subharmonic", "paper_c_sector", "paper_c_subharmonic"]


def write_threshold_csv(results, path):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=THRESHOLD_COLUMNS)
        w.writeheader()
        for res in results:
            w.writerow({k: ("" if v is None else repr(v)) for k, v in res.row().items()})


def sector_negative(m, p, c, alpha, theta_grid=None):
    """sup of h over the punctured sector S_alpha (power pair m) is < 0."""
    th = default_theta_grid(200, 1e-8) if theta_grid is None else theta_grid
    spec = SectorSpec(FunctionPair.power(m), alpha)
    return sector_property(FiniteType(m=m, p=p, c=c), spec, th).max_h < 0


def subharmonic_on_disc(m, p, c, n_angle=2048, radii=(0.1, 0.3, 0.5, 0.7, 0.9)):
    """min of the closed-form Laplacian over a punctured polar grid is >= 0."""
    psi = 2 * np.pi * np.arange(n_angle) / n_angle
    R, P = np.meshgrid(np.asarray(radii), psi)
    z = (R * np.exp(1j * P)).ravel()
    lap = FiniteType(m=m, p=p, c=c).jet(z).laplacian
    # homogeneous of degree 2m - 2: compare on the unit scale
    lap = lap / np.abs(z) ** (2 * m - 2)
    return lap.min() >= -1e-12


def finite_type_thresholds(m, p, alpha=1.01, tol=1e-6):
    if not 1 <= p <= m:
        raise ParameterError(f"need 1 <= p <= m, got m={m}, p={p}")
    sec = _find_threshold(lambda c: sector_negative(m, p, c, alpha), 0.0, tol)
    sub = _find_threshold(lambda c: subharmonic_on_disc(m, p, c), 0.0, tol)

    def primary(pair):
        found = [c for c in pair if c is not None]
        return (found[0] if found else None), (found[1] if len(found) > 1 else None)

    c_sec, c_sec2 = primary(sec)
    c_sub, c_sub2 = primary(sub)
    paper_sub = PAPER_THRESHOLDS.get((m, p), {}).get("subharmonic")
    return ThresholdResult(m, p, alpha, c_sec, c_sub, c_sec2, c_sub2, _paper_sector(m, p), paper_sub, tol)
