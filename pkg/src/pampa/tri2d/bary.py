"""Polynomials in barycentric coordinates on a triangle.

A ``BaryPoly`` is a sparse map ``(p, q, r) -> coefficient`` for the monomial
``l1^p l2^q l3^r``. Coefficients may be floats, ``Fraction`` or sympy numbers;
arithmetic never mixes in floats on its own, so exact inputs give exact
results.
"""

from fractions import Fraction
from math import factorial

import numpy as np


def bary_integral(m: int, n: int, q: int, area=1):
    """``int_K l1^m l2^n l3^q = 2 |K| m! n! q! / (m + n + q + 2)!``."""
    if min(m, n, q) < 0:
        raise ValueError("exponents must be nonnegative")
    return Fraction(2 * factorial(m) * factorial(n) * factorial(q), factorial(m + n + q + 2)) * area


class BaryPoly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for key, c in (terms or {}).items():
            if c != 0:
                self.terms[tuple(key)] = c

    @classmethod
    def constant(cls, c):
        return cls({(0, 0, 0): c})

    @classmethod
    def lam(cls, i: int, coeff=1):
        key = [0, 0, 0]
        key[i] = 1
        return cls({tuple(key): coeff})

    @classmethod
    def monomial(cls, powers, coeff=1):
        return cls({tuple(powers): coeff})

    def __add__(self, other):
        other = _lift(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return BaryPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BaryPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, BaryPoly):
            return BaryPoly({k: c * other for k, c in self.terms.items()})
        out = {}
        for (a, b, c), x in self.terms.items():
            for (d, e, f), y in other.terms.items():
                key = (a + d, b + e, c + f)
                out[key] = out.get(key, 0) + x * y
        return BaryPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return BaryPoly({k: c / scalar for k, c in self.terms.items()})

    def __pow__(self, n: int):
        out = BaryPoly.constant(1)
        for _ in range(n):
            out = out * self
        return out

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def map(self, fn):
        return BaryPoly({k: fn(c) for k, c in self.terms.items()})

    def to_float(self):
        return self.map(float)

    def deriv(self, i: int):
        """Formal partial derivative with respect to ``l_i``."""
        out = {}
        for k, c in self.terms.items():
            if k[i]:
                key = list(k)
                key[i] -= 1
                out[tuple(key)] = out.get(tuple(key), 0) + c * k[i]
        return BaryPoly(out)

    def mean(self):
        """``(1/|K|) int_K`` of the polynomial, exact for exact coefficients."""
        return sum((c * bary_integral(*k) for k, c in self.terms.items()), 0)

    def at(self, lam):
        """Exact evaluation at one barycentric triple."""
        acc = 0
        for (p, q, r), c in self.terms.items():
            acc = acc + c * lam[0] ** p * lam[1] ** q * lam[2] ** r
        return acc

    def __call__(self, lam):
        """Float evaluation at barycentric points, ``lam`` of shape (..., 3)."""
        lam = np.asarray(lam, dtype=float)
        out = np.zeros(lam.shape[:-1])
        for (p, q, r), c in self.terms.items():
            out = out + float(c) * lam[..., 0] ** p * lam[..., 1] ** q * lam[..., 2] ** r
        return out

    def gradient(self, lam, grad_lam):
        """Physical gradient at ``lam``; ``grad_lam[i]`` is the gradient of ``l_i``."""
        grad_lam = np.asarray(grad_lam, dtype=float)
        parts = [self.deriv(i)(lam) for i in range(3)]
        return sum(parts[i][..., None] * grad_lam[i] for i in range(3))

    def __repr__(self):
        return f"BaryPoly({self.terms!r})"


def _lift(x):
    return x if isinstance(x, BaryPoly) else BaryPoly.constant(x)


def check_barycentric(lam, tol=1e-12):
    """Raise unless ``lam`` holds nonnegative triples summing to one."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape[-1] != 3:
        raise ValueError("barycentric coordinates need three components")
    if np.any(lam < -tol) or np.any(np.abs(lam.sum(axis=-1) - 1.0) > tol):
        raise ValueError("invalid barycentric coordinates")
    return lam
