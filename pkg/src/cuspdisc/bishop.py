"""Analytic discs attached to s = h(z, r) over cusped and smoothed sectors.

The disc is tau -> (z(tau), 0, w(tau)) with z the sector map and w = u + i v
holomorphic.  Its boundary solves the fixed-point equation

    u = T1( h(z(.), u) - eta * chi ),

with T1 the harmonic conjugation normalized at tau = 1, and v is the attachment
value minus its value at the vertex, so that w(1) = 0.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .circle import (BoundarySamples, CircleGrid, analyticity_defect, dtn_quadrature_at_1,
                     hilbert_T1, poisson_eval, radial_derivative_at_1)
from .errors import ConvergenceError, DomainError, RegularityError
from .hypersurface import CUTOFF, sector_property
from .sector import SectorSpec, boundary_points, default_theta_grid, sector_map

log = logging.getLogger(__name__)


ROUNDOFF = 1e-12


def _wrap(theta):
    return (np.asarray(theta, dtype=float) + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True)
class BumpSpec:
    """Cut-off eta * chi supported in |theta - center| <= width, flat on half of it."""

    eta: float = 0.0
    center: float = math.pi
    width: float = 0.5

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("bump amplitude eta must be >= 0")
        if not self.width > 0:
            raise ValueError("bump width must be positive")
        gap = abs(float(_wrap(self.center))) - self.width
        if gap < math.pi / 4 - 1e-12:
            raise ValueError("bump support must stay at least pi/4 away from the vertex theta = 0")

    def profile(self, theta):
        return CUTOFF(2 * _wrap(np.asarray(theta) - self.center) / self.width)

    def with_eta(self, eta):
        return BumpSpec(eta, self.center, self.width)

    def predicted_response(self):
        """(1/2 pi) int chi / (1 - cos theta) d theta over the support, by adaptive quadrature."""
        lo, hi = self.center - self.width, self.center + self.width
        val, _ = quad(lambda t: float(self.profile(t)) / (1 - math.cos(t)), lo, hi,
                      points=[self.center - self.width / 2, self.center + self.width / 2], limit=200)
        return val / (2 * math.pi)


NO_BUMP = BumpSpec()


@dataclass
class AttachedDisc:
    spec: SectorSpec
    model: object
    bump: BumpSpec
    z: np.ndarray
    u: BoundarySamples
    v: BoundarySamples
    vertex_value: float
    r_shift: float
    picard_iters: int
    changes: list
    residual: float
    defect: float
    dv_dt_at_1: float
    tail_bound: float
    tail_energy: float

    @property
    def grid(self):
        return self.u.grid

    @property
    def contraction_factors(self):
        c = self.changes
        return [c[i + 1] / c[i] for i in range(len(c) - 1) if c[i] > 0]

    @property
    def vertex_normalization(self):
        """|u(1)| from the Fourier series plus |v(1)| from the attachment data at the vertex."""
        return abs(self.u.value_at(0.0)) + abs(float(self.boundary_v(0.0)[0]))

    @property
    def vertex_interpolation_gap(self):
        """|v(1)| read off the trigonometric interpolant; nonzero only through truncation at a cusp."""
        return abs(self.v.value_at(0.0))

    def boundary_v(self, theta):
        """v at arbitrary angles from the model itself; u enters through its trigonometric interpolant."""
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        z = boundary_points(self.spec, th)
        r = self.r_shift + (self.u.value_at(th) if np.any(self.u.values) else 0.0)
        data = np.asarray(self.model(z, r), dtype=float)
        if self.bump.eta:
            data = data - self.bump.eta * self.bump.profile(th)
        return data - self.vertex_value

    def dv_dt_quadrature(self, with_error=False):
        """Vertex transversality by adaptive quadrature of the Dirichlet-to-Neumann integral."""
        return dtn_quadrature_at_1(lambda t: float(self.boundary_v(t)[0]), 0.0, with_error)

    def w_boundary(self):
        return self.u.values + 1j * self.v.values

    def attachment_error(self):
        """sup |v + vertex_value - (h(z, r_shift + u) - eta chi)|."""
        data = _attachment_data(self.model, self.z, self.u.values + self.r_shift, self.bump, self.grid)
        return float(np.max(np.abs(self.v.values + self.vertex_value - data)))

    def interior(self, t, thetas):
        """Disc points (z, r, s) over tau = t e^{i theta}."""
        tau = t * np.exp(1j * np.asarray(thetas, dtype=float))
        z = sector_map(self.spec, tau)
        r = self.r_shift + poisson_eval(self.u, t, thetas)
        s = self.vertex_value + poisson_eval(self.v, t, thetas)
        return z, r, s

    def radial_profile(self, ts):
        """v along the radius tau = t in (0, 1)."""
        return np.array([poisson_eval(self.v, t, 0.0) for t in ts])

    def to_csv(self, path):
        th = self.grid.thetas
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "x", "y", "u", "v"])
            for row in zip(th, self.z.real, self.z.imag, self.u.values, self.v.values):
                w.writerow([repr(float(x)) for x in row])

    def summary(self):
        return {
            "picard_iters": self.picard_iters,
            "residual": self.residual,
            "defect": self.defect,
            "dv_dt_at_1": self.dv_dt_at_1,
            "tail_bound": self.tail_bound,
            "tail_energy": self.tail_energy,
            "vertex_value": self.vertex_value,
            "contraction_factors": self.contraction_factors,
        }


def _attachment_data(model, z, r, bump, grid):
    data = np.asarray(model(z, r), dtype=float)
    if bump.eta:
        data = data - bump.eta * bump.profile(grid.thetas)
    return data


def solve(model, spec, bump=NO_BUMP, grid=None, tol=1e-11, max_iter=200, damping=1.0, r_shift=0.0):
    """Damped Picard iteration for the disc attached over ``spec``."""
    grid = CircleGrid() if grid is None else grid
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    z = boundary_points(spec, grid.thetas)
    u = np.zeros(grid.n)
    changes = []
    for it in range(1, max_iter + 1):
        data = _attachment_data(model, z, r_shift + u, bump, grid)
        u_new = hilbert_T1(BoundarySamples(grid, data)).values
        change = float(np.max(np.abs(u_new - u)))
        changes.append(change)
        u = damping * u_new + (1 - damping) * u
        if change < tol:
            break
    else:
        factor = changes[-1] / changes[-2] if len(changes) > 1 and changes[-2] else None
        raise ConvergenceError(
            f"Picard iteration did not converge in {max_iter} steps (last change {changes[-1]:.3e}, "
            f"contraction {factor}); reduce epsilon or the damping", factor)
    data = _attachment_data(model, z, r_shift + u, bump, grid)
    residual = float(np.max(np.abs(u - hilbert_T1(BoundarySamples(grid, data)).values)))
    vertex = float(np.asarray(model(np.asarray([spec.translate]), r_shift))[0])
    if bump.eta:
        vertex -= bump.eta * float(bump.profile(0.0))
    us = BoundarySamples(grid, u)
    vs = BoundarySamples(grid, data - vertex)
    rd = radial_derivative_at_1(vs)
    log.debug("disc solved in %d iterations, residual %.2e", it, residual)
    return AttachedDisc(spec, model, bump, z, us, vs, vertex, r_shift, it, changes, residual,
                        analyticity_defect(us, vs), rd.value, rd.tail_bound, rd.tail_energy)


def closed_form_disc(g, spec, grid):
    """w = i (g(z(tau)) - g(z(1))) on the boundary, for h = Re g."""
    z = boundary_points(spec, grid.thetas)
    g0 = np.asarray(g(np.asarray([spec.translate])))[0]
    return 1j * (np.asarray(g(z)) - g0)


@dataclass(frozen=True)
class BumpResponse:
    d2v_deta_dt: float
    predicted: float
    raw: tuple
    delta: float

    @property
    def relative_error(self):
        return abs(self.d2v_deta_dt - self.predicted) / abs(self.predicted)


def bump_response(model, spec, bump=None, grid=None, delta=None):
    """Finite-difference d/deta of the vertex transversality, with the quadrature prediction."""
    bump = BumpSpec(0.0) if bump is None else bump
    grid = CircleGrid() if grid is None else grid
    if delta is None:
        z = boundary_points(spec, grid.thetas)
        scale = float(np.max(np.abs(model(z, 0.0))))
        delta = 1e-4 * (scale if scale > 0 else 1.0)
    if not delta > 0:
        raise ValueError("degenerate eta family: delta must be positive")

    def D(eta):
        return solve(model, spec, bump.with_eta(eta), grid).dv_dt_at_1

    d0 = D(0.0)
    d_half = (D(delta) - d0) / delta
    d_full = (D(2 * delta) - d0) / (2 * delta)
    rich = (4 * d_half - d_full) / 3
    return BumpResponse(rich, bump.predicted_response(), (d_full, d_half), delta)


@dataclass
class SmoothingSweep:
    """Smoothed transversalities against the unsmoothed limit.

    Smoothed data are smooth, so the entries are summed spectrally; the cusped
    limit is taken from the quadrature route, the spectral value kept alongside.
    """

    entries: list
    tail_bounds: list
    limit: float
    limit_spectral: float
    limit_tail_bound: float

    @property
    def distances(self):
        return [abs(dv - self.limit) for _, dv in self.entries]

    @property
    def monotone(self):
        """Distances to the limit never grow (up to round-off)."""
        d = self.distances
        slack = ROUNDOFF * max(1.0, abs(self.limit))
        return all(d[i + 1] <= d[i] + slack for i in range(len(d) - 1))

    def as_dict(self):
        return {"entries": [{"nu": nu, "dv_dt_at_1": dv, "tail_bound": tb}
                            for (nu, dv), tb in zip(self.entries, self.tail_bounds)],
                "limit": self.limit, "limit_spectral": self.limit_spectral,
                "limit_tail_bound": self.limit_tail_bound,
                "distances": self.distances, "monotone": self.monotone}


def smoothing_sweep(model, spec, nus=(4, 8, 16, 32, 64), grid=None):
    grid = CircleGrid() if grid is None else grid
    base = SectorSpec(spec.pair, spec.alpha, None, spec.translate)
    entries, bounds = [], []
    for nu in nus:
        d = solve(model, base.with_nu(nu), grid=grid)
        entries.append((int(nu), d.dv_dt_at_1))
        bounds.append(d.tail_bound)
    lim = solve(model, base, grid=grid)
    return SmoothingSweep(entries, bounds, lim.dv_dt_quadrature(), lim.dv_dt_at_1, lim.tail_bound)


@dataclass(frozen=True)
class TransversalityCertificate:
    dv_dt: float
    tail_bound: float
    dv_dt_quadrature: float
    quadrature_error: float
    h_max_on_sector: float
    hypothesis: bool
    strict_hypothesis: bool

    @property
    def routes_agree(self):
        return bool(abs(self.dv_dt - self.dv_dt_quadrature) <= self.tail_bound + 1e-9 * max(1.0, abs(self.dv_dt)))

    @property
    def strict(self):
        """dv/dt(1) > 0, certified by the quadrature route and consistent with the spectral sum."""
        floor = 10 * self.quadrature_error + ROUNDOFF
        return bool(self.dv_dt_quadrature > floor and self.routes_agree)

    @property
    def implication_verified(self):
        """None when the sector property fails (nothing claimed)."""
        if not self.hypothesis:
            return None
        if self.strict_hypothesis:
            return self.strict
        return self.dv_dt_quadrature >= -abs(self.dv_dt - self.dv_dt_quadrature)

    def as_dict(self):
        return {"dv_dt": self.dv_dt, "tail_bound": self.tail_bound,
                "dv_dt_quadrature": self.dv_dt_quadrature, "quadrature_error": self.quadrature_error,
                "h_max_on_sector": self.h_max_on_sector,
                "hypothesis": self.hypothesis, "strict_hypothesis": self.strict_hypothesis,
                "strict": self.strict, "routes_agree": self.routes_agree,
                "implication_verified": self.implication_verified}


def transversality_certificate(model, spec, grid=None, theta_grid=None):
    grid = CircleGrid() if grid is None else grid
    th = default_theta_grid(200, 1e-8) if theta_grid is None else theta_grid
    sp = sector_property(model, spec, th)
    disc = solve(model, spec, grid=grid)
    q, qerr = disc.dv_dt_quadrature(with_error=True)
    return TransversalityCertificate(
        disc.dv_dt_at_1, disc.tail_bound, q, qerr, sp.max_h,
        sp.holds, sp.holds and sp.strict)


@dataclass(frozen=True)
class VertexDomination:
    ts: np.ndarray
    v: np.ndarray
    F: np.ndarray

    @property
    def nonpositive(self):
        return bool(np.all(self.v <= 0))

    @property
    def constant(self):
        """Largest c with -v >= c F on the window."""
        return float(np.min(-self.v / self.F))


def vertex_domination(disc, window=(0.9, 0.999), n=40):
    """Compare v along the radius with F(|z(t)|) near the vertex."""
    ts = np.linspace(window[0], window[1], n)
    v = disc.radial_profile(ts)
    z = sector_map(disc.spec, ts.astype(complex)) - disc.spec.translate
    F = np.abs(disc.spec.pair.F(np.abs(z).astype(complex)))
    return VertexDomination(ts, v, F)


INTERIOR_RADII = (0.5, 0.75, 0.9)
INTERIOR_ANGLES = 64


@dataclass
class SweepCell:
    offset: complex
    r_shift: float
    min_gap: float | None = None
    dv_dt: float | None = None
    vertex_s: float | None = None
    error: str | None = None

    @property
    def dipped(self):
        return self.min_gap is not None and self.min_gap < 0

    def as_dict(self):
        return {"offset": [self.offset.real, self.offset.imag], "r_shift": self.r_shift,
                "min_gap": self.min_gap, "dipped": self.dipped, "dv_dt_at_1": self.dv_dt,
                "vertex_s": self.vertex_s, "error": self.error}


@dataclass
class SweepReport:
    cells: list = field(default_factory=list)

    @property
    def dipped_vertices(self):
        return [(c.offset, c.r_shift + 1j * c.vertex_s) for c in self.cells if c.dipped]

    @property
    def n_errors(self):
        return sum(c.error is not None for c in self.cells)

    def as_dict(self):
        return {"cells": [c.as_dict() for c in self.cells],
                "n_dipped": len(self.dipped_vertices), "n_errors": self.n_errors}


def translation_sweep(model, spec, offsets, r_shifts=(0.0,), grid=None):
    """Solve over translated smoothed sectors and record whether each disc dips below s = h."""
    if not spec.smoothed:
        raise ValueError("translation_sweep needs a smoothed sector (nu set)")
    grid = CircleGrid() if grid is None else grid
    angles = 2 * np.pi * np.arange(INTERIOR_ANGLES) / INTERIOR_ANGLES
    report = SweepReport()
    for off in offsets:
        for rs in r_shifts:
            cell = SweepCell(complex(off), float(rs))
            try:
                disc = solve(model, spec.with_translate(off), grid=grid, r_shift=rs)
                gaps = []
                for t in INTERIOR_RADII:
                    z, r, s = disc.interior(t, angles)
                    gaps.append(s - model(z, r))
                cell.min_gap = float(np.min(np.concatenate(gaps)))
                cell.dv_dt = disc.dv_dt_at_1
                cell.vertex_s = disc.vertex_value
            except (DomainError, ConvergenceError, RegularityError) as exc:
                cell.error = f"{type(exc).__name__}: {exc}"
            report.cells.append(cell)
    return report


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
