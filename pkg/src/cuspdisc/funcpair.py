"""Inverse pairs (F, F*) with closed-form derivatives and hypothesis checks.

Three kinds are supported:

* ``power``       F = z^(2m),          F* = z^(1/(2m))
* ``exp``         F = exp(-1/z^a),     F* = (-log z)^(-1/a)
* ``double_exp``  F = exp(-exp(1/z^a)), F* = (log(-log z))^(-1/a)

All fractional powers and logarithms use the principal branch.  Every
evaluation accepts a scalar or an array and returns the same shape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

# exp(t) overflows for t > ~709; beyond this F of the double-exponential kind is 0.
UNDERFLOW_EXPONENT = 700.0


class Kind(str, Enum):
    POWER = "power"
    EXP = "exp"
    DOUBLE_EXP = "double_exp"


def _shape_like(z, out):
    return complex(out) if np.ndim(z) == 0 else out


@dataclass(frozen=True)
class FunctionPair:
    kind: Kind
    m: int = 1
    a: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.POWER and (int(self.m) != self.m or self.m < 1):
            raise ValueError(f"power pair needs a positive integer m, got {self.m}")
        if self.kind is not Kind.POWER and not self.a > 0:
            raise ValueError(f"exponent a must be positive, got {self.a}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @classmethod
    def power(cls, m, epsilon=0.1):
        return cls(Kind.POWER, m=int(m), epsilon=epsilon)

    @classmethod
    def exp(cls, a, epsilon=0.1):
        return cls(Kind.EXP, a=float(a), epsilon=epsilon)

    @classmethod
    def double_exp(cls, a, epsilon=0.1):
        return cls(Kind.DOUBLE_EXP, a=float(a), epsilon=epsilon)

    @property
    def exponent(self):
        """2m for the power kind, a otherwise."""
        return 2 * self.m if self.kind is Kind.POWER else self.a

    def to_dict(self):
        return {"kind": self.kind.value, "m": self.m, "a": self.a, "epsilon": self.epsilon}

    # -- domain handling --------------------------------------------------

    def _check_F_domain(self, z):
        if self.kind is Kind.POWER:
            return
        bad = (z.real <= 0) & (z != 0)
        if np.any(bad):
            raise DomainError(f"F of kind {self.kind.value} needs Re z > 0", z[bad].ravel()[0])

    def _check_Fstar_domain(self, z, order):
        on_cut = (z.imag == 0) & (z.real <= 0)
        if order == 0:
            on_cut &= z != 0
        if np.any(on_cut):
            raise DomainError("F* is undefined on the branch cut (-inf, 0]", z[on_cut].ravel()[0])
        if self.kind is Kind.EXP:
            radius = 1.0
        elif self.kind is Kind.DOUBLE_EXP:
            radius = math.exp(-1.0)
        else:
            return
        bad = np.abs(z) >= radius
        if np.any(bad):
            raise DomainError(f"F* of kind {self.kind.value} needs |z| < {radius:.6g}",
                              z[bad].ravel()[0])

    def underflow(self, z):
        """True where F is replaced by its flat-zero limit (double-exponential kind only)."""
        z = np.asarray(z, dtype=complex)
        if self.kind is not Kind.DOUBLE_EXP:
            return np.zeros(z.shape, dtype=bool) if z.ndim else False
        with np.errstate(all="ignore"):
            t = np.where(z == 0, np.inf, np.power(np.where(z == 0, 1, z), -self.a).real)
        flag = t > UNDERFLOW_EXPONENT
        return flag if z.ndim else bool(flag)

    # -- F ------------------------------------------------------------------

    def F(self, z, order=0):
        z0 = z
        z = np.asarray(z, dtype=complex)
        self._check_F_domain(z)
        k, a = self.kind, self.a
        zero = z == 0
        zs = np.where(zero, 1.0, z)
        with np.errstate(all="ignore"):
            if k is Kind.POWER:
                n = 2 * self.m
                if order == 0:
                    out = z**n
                elif order == 1:
                    out = n * z ** (n - 1)
                else:
                    out = n * (n - 1) * z ** (n - 2) if n >= 2 else np.zeros_like(z)
                return _shape_like(z0, out)
            if k is Kind.EXP:
                val = np.exp(-np.power(zs, -a))
                g = a * np.power(zs, -a - 1)
                if order == 0:
                    out = val
                elif order == 1:
                    out = g * val
                else:
                    out = (g * g - a * (a + 1) * np.power(zs, -a - 2)) * val
                out = np.where(val == 0, 0, out)  # flat underflow, avoid 0 * inf
            else:
                t = np.power(zs, -a)
                flat = t.real > UNDERFLOW_EXPONENT
                E = np.exp(np.where(flat, 0, t))
                val = np.where(flat, 0, np.exp(-E))
                g = a * np.power(zs, -a - 1) * E
                if order == 0:
                    out = val
                elif order == 1:
                    out = g * val
                else:
                    dg = -a * (a + 1) * np.power(zs, -a - 2) * E - a * a * np.power(zs, -2 * a - 2) * E
                    out = (dg + g * g) * val
                out = np.where(flat | (val == 0), 0, out)
            out = np.where(zero, 0, out)
        return _shape_like(z0, out)

    # -- F* -----------------------------------------------------------------

    def Fstar(self, z, order=0):
        z0 = z
        z = np.asarray(z, dtype=complex)
        self._check_Fstar_domain(z, order)
        k, a = self.kind, self.a
        zero = z == 0
        zs = np.where(zero, 0.5, z)
        with np.errstate(all="ignore"):
            if k is Kind.POWER:
                p = 1.0 / (2 * self.m)
                if order == 0:
                    out = np.power(zs, p)
                elif order == 1:
                    out = p * np.power(zs, p - 1)
                else:
                    out = p * (p - 1) * np.power(zs, p - 2)
            elif k is Kind.EXP:
                L = -np.log(zs)
                if order == 0:
                    out = np.power(L, -1 / a)
                elif order == 1:
                    out = np.power(L, -1 / a - 1) / (a * zs)
                else:
                    out = np.power(L, -1 / a - 2) * ((1 / a + 1) - L) / (a * zs * zs)
            else:
                L = -np.log(zs)
                M = np.log(L)
                q = zs * L
                if order == 0:
                    out = np.power(M, -1 / a)
                elif order == 1:
                    out = np.power(M, -1 / a - 1) / (a * q)
                else:
                    out = np.power(M, -1 / a - 2) * ((1 / a + 1) - M * (L - 1)) / (a * q * q)
            out = np.where(zero, 0, out)
        return _shape_like(z0, out)

    # -- log F (holomorphic branch continued from the positive axis) -------

    def log_F(self, z, order=0):
        """Holomorphic logarithm of F; its imaginary part is the angle used by cone cut-offs."""
        z0 = z
        z = np.asarray(z, dtype=complex)
        self._check_F_domain(z)
        if np.any(z == 0):
            raise DomainError("log F is singular at the origin", 0j)
        a = self.a
        with np.errstate(all="ignore"):
            if self.kind is Kind.POWER:
                n = 2 * self.m
                out = (n * np.log(z), n / z, -n / z**2)[order]
            elif self.kind is Kind.EXP:
                out = (-np.power(z, -a), a * np.power(z, -a - 1),
                       -a * (a + 1) * np.power(z, -a - 2))[order]
            else:
                t = np.power(z, -a)
                E = np.exp(np.minimum(t.real, UNDERFLOW_EXPONENT) + 1j * t.imag)
                out = (-E, a * np.power(z, -a - 1) * E,
                       -a * ((a + 1) * np.power(z, -a - 2) + a * np.power(z, -2 * a - 2)) * E)[order]
        return _shape_like(z0, out)


def evaluate(pair, which, order, z):
    """Value or complex derivative of F (``which="F"``) or F* (``which="Fstar"``)."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if which == "F":
        return pair.F(z, order)
    if which == "Fstar":
        return pair.Fstar(z, order)
    raise ValueError(f"which must be 'F' or 'Fstar', got {which!r}")


def check_inverse(pair, samples):
    """Max relative residual |F(F*(z)) - z| / |z| over the samples."""
    z = np.atleast_1d(np.asarray(samples, dtype=complex))
    back = np.atleast_1d(pair.F(pair.Fstar(z)))
    return float(np.max(np.abs(back - z) / np.abs(z)))


def check_derivative_ratio(pair, which, samples):
    """sup |z G''(z)| / |G'(z)| over the samples, G in {F, F*}."""
    z = np.atleast_1d(np.asarray(samples, dtype=complex))
    d1 = np.atleast_1d(evaluate(pair, which, 1, z))
    d2 = np.atleast_1d(evaluate(pair, which, 2, z))
    ok = d1 != 0
    return float(np.max(np.abs(z[ok] * d2[ok]) / np.abs(d1[ok])))


def check_monotonicity(pair, xs):
    """Report strict increase of F and F* and strict decrease of dF*/dx on a real grid."""
    xs = np.sort(np.asarray(xs, dtype=float))
    F = np.real(pair.F(xs.astype(complex)))
    Fs = np.real(pair.Fstar(xs.astype(complex)))
    dFs = np.real(pair.Fstar(xs.astype(complex), 1))
    return {
        "F_increasing": bool(np.all(np.diff(F) > 0)),
        "Fstar_increasing": bool(np.all(np.diff(Fs) > 0)),
        "dFstar_decreasing": bool(np.all(np.diff(dFs) < 0)),
    }


@dataclass
class IncrementReport:
    thetas: np.ndarray
    sign_constant_re: np.ndarray
    sign_constant_im: np.ndarray
    decreasing_re: np.ndarray
    decreasing_im: np.ndarray

    @property
    def violations(self):
        """List of (theta, property) pairs that failed."""
        out = []
        for name in ("sign_constant_re", "sign_constant_im", "decreasing_re", "decreasing_im"):
            for th, ok in zip(self.thetas, getattr(self, name)):
                if not ok:
                    out.append((float(th), name))
        return out

    @property
    def holds(self):
        return not self.violations


def sector_sigma_derivative(pair, alpha, sigma, theta):
    """d/dsigma of F*(eps * (sigma (1 - e^{i theta}))^alpha), by the chain rule."""
    q = 1 - np.exp(1j * np.asarray(theta, dtype=float))
    w = np.asarray(sigma, dtype=float) * q
    arg = pair.epsilon * np.power(w, alpha)
    return pair.Fstar(arg, 1) * pair.epsilon * alpha * np.power(w, alpha - 1) * q


def check_increment_condition(pair, alpha, theta_grid, sigma_grid):
    """Sign constancy and monotone decrease in sigma of d/dsigma Re, Im of F*_alpha(sigma(1-e^{i theta}))."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    thetas = np.asarray(theta_grid, dtype=float)
    sig = np.sort(np.asarray(sigma_grid, dtype=float))
    if np.any(thetas == 0) or np.any(sig <= 0) or np.any(sig > 1):
        raise ValueError("need theta != 0 and sigma in (0, 1]")
    T, S = np.meshgrid(thetas, sig, indexing="ij")
    d = sector_sigma_derivative(pair, alpha, S, T)
    res = {}
    for part, vals in (("re", d.real), ("im", d.imag)):
        s = np.sign(vals)
        res[f"sign_constant_{part}"] = np.all(s == s[:, :1], axis=1)
        res[f"decreasing_{part}"] = np.all(np.diff(np.abs(vals), axis=1) < 0, axis=1)
    return IncrementReport(thetas, res["sign_constant_re"], res["sign_constant_im"],
                           res["decreasing_re"], res["decreasing_im"])


def default_increment_grids():
    """theta in +-[0.05, 1.5] (40 points) and sigma in (0, 1] (20 points)."""
    half = np.geomspace(0.05, 1.5, 20)
    return np.concatenate([-half[::-1], half]), np.linspace(0.05, 1.0, 20)
