"""Spectral harmonic analysis on the unit circle.

Samples live on a staggered grid theta_j = 2 pi (j + 1/2) / n, so no node sits at
the vertex theta = 0.  Fourier coefficients follow v(theta) = sum_k c_k e^{i k theta};
the Nyquist mode k = n/2 is kept for round trips but ignored by every operator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import RegularityError


@dataclass(frozen=True)
class CircleGrid:
    n: int = 4096

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")

    @property
    def thetas(self):
        return 2 * np.pi * (np.arange(self.n) + 0.5) / self.n

    @property
    def signed_thetas(self):
        """Node angles wrapped to (-pi, pi)."""
        th = self.thetas
        return np.where(th > np.pi, th - 2 * np.pi, th)

    @property
    def tau(self):
        return np.exp(1j * self.thetas)

    @property
    def wavenumbers(self):
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)

    @property
    def _phase(self):
        return np.exp(-1j * np.pi * self.wavenumbers / self.n)

    def analyze(self, values):
        """Fourier coefficients c_k (fftfreq ordering) of samples on the staggered grid."""
        return np.fft.fft(values) / self.n * self._phase

    def synthesize(self, coeffs):
        return np.fft.ifft(coeffs / self._phase) * self.n

    @property
    def active(self):
        """Mask of modes used by the operators (Nyquist dropped)."""
        return np.abs(self.wavenumbers) < self.n // 2


@dataclass(frozen=True)
class BoundarySamples:
    grid: CircleGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {vals.shape}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid, f):
        """Sample f(theta) with theta wrapped to (-pi, pi)."""
        return cls(grid, f(grid.signed_thetas))

    @cached_property
    def fourier(self):
        return self.grid.analyze(self.values)

    def value_at(self, theta):
        """Trigonometric interpolant evaluated at arbitrary angles (Nyquist dropped)."""
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        k = self.grid.wavenumbers[self.grid.active]
        c = self.fourier[self.grid.active]
        out = np.real(np.exp(1j * np.outer(th, k)) @ c)
        return float(out[0]) if np.ndim(theta) == 0 else out

    def __sub__(self, other):
        if isinstance(other, BoundarySamples):
            return BoundarySamples(self.grid, self.values - other.values)
        return BoundarySamples(self.grid, self.values - other)

    def __add__(self, other):
        if isinstance(other, BoundarySamples):
            return BoundarySamples(self.grid, self.values + other.values)
        return BoundarySamples(self.grid, self.values + other)


def conjugate_multiplier(grid):
    k = grid.wavenumbers
    return np.where(grid.active, 1j * np.sign(k), 0)


def hilbert_T1(samples):
    """Harmonic conjugation v -> u, normalized so the result vanishes at tau = 1.

    For boundary values v of a holomorphic w = u + i v on the disc this returns
    u - u(1).  The value at theta = 0 is summed from the series exactly.
    """
    grid = samples.grid
    uhat = conjugate_multiplier(grid) * samples.fourier
    at_vertex = np.sum(uhat)
    u = np.real(grid.synthesize(uhat)) - np.real(at_vertex)
    return BoundarySamples(grid, u)


def poisson_eval(samples, t, theta):
    """Harmonic extension at t e^{i theta}, t in [0, 1)."""
    if not 0 <= t < 1:
        raise ValueError("poisson_eval needs 0 <= t < 1")
    grid = samples.grid
    k = grid.wavenumbers[grid.active]
    c = samples.fourier[grid.active] * np.power(t, np.abs(k))
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.real(np.exp(1j * np.outer(th, k)) @ c)
    return float(out[0]) if np.ndim(theta) == 0 else out


def poisson_eval_many(samples, t, thetas):
    """Harmonic extension on the circle of radius t at the given angles (FFT-free direct sum)."""
    return poisson_eval(samples, t, np.asarray(thetas, dtype=float))


@dataclass(frozen=True)
class RadialDerivative:
    value: float
    tail_bound: float
    tail_energy: float


TAIL_ENERGY_GATE = 1e-8


def tail_energy(samples):
    grid = samples.grid
    k = np.abs(grid.wavenumbers)
    e = np.abs(samples.fourier) ** 2 * grid.active
    total = e[k > 0].sum()
    if total == 0:
        return 0.0
    return float(e[k > grid.n // 4].sum() / total)


def _tail_estimate(samples):
    """Bound on the truncation-plus-aliasing error of sum_k |k| c_k.

    A power-law envelope C k^-p is fitted to the band [n/16, n/4]; aliasing folds
    a comparable amount back below n/2, hence the factor 2.
    """
    grid = samples.grid
    n = grid.n
    k = grid.wavenumbers
    band = (k >= n // 16) & (k <= n // 4)
    # real data: |c_-k| = |c_k|
    mag = 2 * np.abs(samples.fourier[band])
    kb = k[band].astype(float)
    if mag.max() <= 1e-14 * np.abs(samples.fourier).max():
        return 0.0
    mag = np.maximum(mag, np.finfo(float).tiny)
    slope, intercept = np.polyfit(np.log(kb), np.log(mag), 1)
    p = -slope
    C = math.exp(intercept)
    K = n / 2
    if p <= 2:
        return math.inf
    # sum_{k >= K} k * C k^-p  <=  C K^(2-p) / (p-2) + C K^(1-p)
    return 2 * (C * K ** (2 - p) / (p - 2) + C * K ** (1 - p))


def radial_derivative_at_1(samples, gate=TAIL_ENERGY_GATE):
    """d/dt of the harmonic extension at tau = 1, summed spectrally: sum_k |k| c_k.

    Raises RegularityError when the spectral tail beyond n/4 carries more than
    ``gate`` of the energy; the derivative would not be trustworthy.
    """
    grid = samples.grid
    te = tail_energy(samples)
    if te > gate:
        raise RegularityError(
            f"spectral tail energy {te:.3e} exceeds {gate:.1e}: data too rough for a vertex derivative")
    k = np.abs(grid.wavenumbers)
    val = float(np.real(np.sum((k * samples.fourier)[grid.active])))
    return RadialDerivative(val, _tail_estimate(samples), te)


def dtn_quadrature_at_1(f, vertex_value=None, with_error=False):
    """Independent route: (1/2 pi) int (v(0) - v(theta)) / (1 - cos theta) d theta for a callable v.

    The range is split geometrically towards the vertex, where the integrand is
    singular for cusped data.
    """
    import warnings

    from scipy.integrate import IntegrationWarning, quad

    v0 = f(0.0) if vertex_value is None else vertex_value

    def integrand(th):
        return (v0 - f(th)) / (2 * math.sin(th / 2) ** 2)

    edges = np.concatenate([[0.0], np.geomspace(1e-12, 1.0, 13), [math.pi]])
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for sign in (1, -1):
            for lo, hi in zip(edges[:-1], edges[1:]):
                val, e = quad(lambda t: integrand(sign * t), lo, hi, limit=200)
                total += val
                err += e
    total, err = total / (2 * math.pi), err / (2 * math.pi)
    return (total, err) if with_error else total


@dataclass(frozen=True)
class HolderSlopes:
    slope1: float
    slope2: float


def holder_slope(samples, window):
    """Log-log slopes of |first| and |second| divided differences against |theta| near 0.

    Both sides of the vertex are pooled; a regularity estimate v in C^{1,beta}
    shows up as slope1 >= beta and slope2 >= beta - 1.
    """
    lo, hi = window
    grid = samples.grid
    th = grid.signed_thetas
    step = 2 * np.pi / grid.n
    vals = samples.values
    order = np.argsort(th)
    th, vals = th[order], vals[order]
    xs1, d1s, xs2, d2s = [], [], [], []
    for side in (1, -1):
        sel = (side * th >= lo) & (side * th <= hi)
        if sel.sum() < 5:
            raise ValueError("window holds fewer than 5 grid points")
        idx = np.nonzero(sel)[0]
        idx = idx if side > 0 else idx[::-1]
        v, x = vals[idx], np.abs(th[idx])
        d1s.append(np.diff(v) / step)
        xs1.append(0.5 * (x[1:] + x[:-1]))
        d2s.append((v[2:] - 2 * v[1:-1] + v[:-2]) / step**2)
        xs2.append(x[1:-1])
    slopes = []
    for xs, ds in ((xs1, d1s), (xs2, d2s)):
        x, d = np.concatenate(xs), np.abs(np.concatenate(ds))
        if np.all(d == 0):
            slopes.append(math.inf)
            continue
        ok = d > 0
        slopes.append(float(np.polyfit(np.log(x[ok]), np.log(d[ok]), 1)[0]))
    return HolderSlopes(*slopes)


def analyticity_defect(u, v):
    """Share of energy of u + i v in strictly negative frequencies (0 for boundary values of holomorphic maps)."""
    grid = u.grid
    c = grid.analyze(u.values + 1j * v.values)
    k = grid.wavenumbers
    e = np.abs(c) ** 2 * grid.active
    total = e.sum()
    if total == 0:
        return 0.0
    return float(e[k < 0].sum() / total)
