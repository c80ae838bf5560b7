"""Second-order jets of real functions of z = x + i y.

A jet carries the value, gradient and Hessian at every sample, so product and
chain rules give exact first and second derivatives of composite defining
functions without finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Jet:
    v: np.ndarray
    x: np.ndarray
    y: np.ndarray
    xx: np.ndarray
    xy: np.ndarray
    yy: np.ndarray

    @classmethod
    def const(cls, c, shape):
        z = np.zeros(shape)
        return cls(np.full(shape, float(c)), z, z, z, z, z)

    @classmethod
    def coord_x(cls, x):
        x = np.asarray(x, dtype=float)
        z = np.zeros_like(x)
        return cls(x, np.ones_like(x), z, z, z, z)

    @classmethod
    def coord_y(cls, y):
        y = np.asarray(y, dtype=float)
        z = np.zeros_like(y)
        return cls(y, z, np.ones_like(y), z, z, z)

    @classmethod
    def real_part(cls, g, g1, g2):
        """Jet of Re G for holomorphic G with values g, G' = g1, G'' = g2."""
        return cls(g.real, g1.real, -g1.imag, g2.real, -g2.imag, -g2.real)

    @classmethod
    def imag_part(cls, g, g1, g2):
        return cls(g.imag, g1.imag, g1.real, g2.imag, g2.real, -g2.imag)

    def _parts(self):
        return (self.v, self.x, self.y, self.xx, self.xy, self.yy)

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.v + other, self.x, self.y, self.xx, self.xy, self.yy)
        return Jet(*(a + b for a, b in zip(self._parts(), other._parts())))

    __radd__ = __add__

    def __neg__(self):
        return Jet(*(-a for a in self._parts()))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(*(a * other for a in self._parts()))
        f, g = self, other
        return Jet(
            f.v * g.v,
            f.x * g.v + f.v * g.x,
            f.y * g.v + f.v * g.y,
            f.xx * g.v + 2 * f.x * g.x + f.v * g.xx,
            f.xy * g.v + f.x * g.y + f.y * g.x + f.v * g.xy,
            f.yy * g.v + 2 * f.y * g.y + f.v * g.yy,
        )

    __rmul__ = __mul__

    def compose(self, f0, f1, f2):
        """Jet of phi(self) given phi, phi', phi'' evaluated at self.v."""
        u = self
        return Jet(
            f0,
            f1 * u.x,
            f1 * u.y,
            f2 * u.x * u.x + f1 * u.xx,
            f2 * u.x * u.y + f1 * u.xy,
            f2 * u.y * u.y + f1 * u.yy,
        )

    def where(self, mask, other=0.0):
        """Replace entries outside ``mask`` by the constant ``other`` (all derivatives zero)."""
        return Jet(*(np.where(mask, a, other if i == 0 else 0.0) for i, a in enumerate(self._parts())))

    @property
    def laplacian(self):
        return self.xx + self.yy

    @property
    def dz(self):
        return 0.5 * (self.x - 1j * self.y)

    @property
    def dzbar(self):
        return 0.5 * (self.x + 1j * self.y)

    @property
    def dzdzbar(self):
        return 0.25 * self.laplacian

    @property
    def gradient_norm(self):
        return np.hypot(self.x, self.y)

    @property
    def hessian_norm(self):
        """Largest absolute second partial."""
        return np.maximum(np.maximum(np.abs(self.xx), np.abs(self.xy)), np.abs(self.yy))
