"""Exact rationals, bivariate polynomials and truncated power series.

Jets are the derivative-extraction backbone: every Taylor coefficient at the
origin that a coefficient or residue formula needs is produced by jet
arithmetic on the axis restrictions of the polynomial field components.
"""

from fractions import Fraction
from math import factorial

import numpy as np

Rat = Fraction

DEFAULT_ORDER = 16


class ZeroConstantTerm(ValueError):
    pass


class NonvanishingAtZero(ValueError):
    pass


class Poly2:
    """Real bivariate polynomial stored as {(i, j): coefficient}."""

    def __init__(self, coeffs=None):
        self.coeffs = {}
        for (i, j), c in dict(coeffs or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent ({i}, {j})")
            c = float(c)
            if c != 0.0:
                key = (int(i), int(j))
                self.coeffs[key] = self.coeffs.get(key, 0.0) + c

    @classmethod
    def from_triples(cls, triples):
        out = {}
        for i, j, c in triples:
            out[(int(i), int(j))] = out.get((int(i), int(j)), 0.0) + float(c)
        return cls(out)

    @classmethod
    def const(cls, c):
        return cls({(0, 0): c})

    def triples(self):
        return [[i, j, c] for (i, j), c in sorted(self.coeffs.items())]

    def __call__(self, x1, x2):
        return poly_eval(self, x1, x2)

    def __add__(self, other):
        other = other if isinstance(other, Poly2) else Poly2.const(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly2):
            return Poly2({k: c * other for k, c in self.coeffs.items()})
        out = {}
        for (i1, j1), a in self.coeffs.items():
            for (i2, j2), b in other.coeffs.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0.0) + a * b
        return Poly2(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Poly2) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"Poly2({self.coeffs!r})"

    def diff(self, axis):
        """Partial derivative in x1 (axis=1) or x2 (axis=2)."""
        out = {}
        for (i, j), c in self.coeffs.items():
            if axis == 1 and i > 0:
                out[(i - 1, j)] = c * i
            elif axis == 2 and j > 0:
                out[(i, j - 1)] = c * j
        return Poly2(out)

    def swap(self):
        return Poly2({(j, i): c for (i, j), c in self.coeffs.items()})

    def degree(self):
        return max((i + j for i, j in self.coeffs), default=0)


def poly_eval(P, x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    out = np.zeros(np.broadcast(x1, x2).shape)
    for (i, j), c in P.coeffs.items():
        out = out + c * x1**i * x2**j
    return out if out.ndim else float(out)


class Jet:
    """Truncated Taylor series c0 + c1 u + ... + cK u^K at base 0."""

    __slots__ = ("coeffs", "base")

    def __init__(self, coeffs, base=0.0):
        c = np.array(coeffs, dtype=float).ravel()
        if c.size == 0:
            raise ValueError("empty jet")
        self.coeffs = c
        self.base = float(base)

    @property
    def order(self):
        return self.coeffs.size - 1

    @classmethod
    def const(cls, c, order=DEFAULT_ORDER):
        out = np.zeros(order + 1)
        out[0] = c
        return cls(out)

    @classmethod
    def identity(cls, order=DEFAULT_ORDER):
        out = np.zeros(order + 1)
        if order >= 1:
            out[1] = 1.0
        return cls(out)

    def __repr__(self):
        return f"Jet({self.coeffs.tolist()!r})"

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, k):
        return self.coeffs[k]

    def _pair(self, other):
        if not isinstance(other, Jet):
            return self.coeffs, Jet.const(other, self.order).coeffs
        if other.base != self.base:
            raise ValueError("jets at different base points")
        K = min(self.order, other.order)
        return self.coeffs[:K + 1], other.coeffs[:K + 1]

    def __add__(self, other):
        a, b = self._pair(other)
        return Jet(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs)

    def __sub__(self, other):
        a, b = self._pair(other)
        return Jet(a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * float(other))
        return jet_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs / float(other))
        return jet_div(self, other)

    def __rtruediv__(self, other):
        return jet_div(Jet.const(other, self.order), self)

    def __pow__(self, r):
        if isinstance(r, int) and r >= 0:
            out = Jet.const(1.0, self.order)
            for _ in range(r):
                out = out * self
            return out
        return jet_pow(self, r)

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"jet of order {self.order} cannot supply order {order}")
        return Jet(self.coeffs[:order + 1])

    def derivative_at0(self, k):
        """k-th derivative at 0, i.e. k! c_k."""
        return factorial(k) * self.coeffs[k]

    def deriv(self):
        """Jet of the derivative (order drops by one)."""
        K = self.order
        if K == 0:
            return Jet([0.0])
        return Jet(self.coeffs[1:] * np.arange(1, K + 1))

    def __call__(self, u):
        """Partial sum of the series at u."""
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for c in self.coeffs[::-1]:
            out = out * u + c
        return out if out.ndim else float(out)


def jet_mul(a, b):
    x, y = a._pair(b)
    return Jet(np.convolve(x, y)[:x.size])


def jet_div(a, b):
    x, y = a._pair(b)
    if y[0] == 0.0:
        raise ZeroConstantTerm("jet division by a series with zero constant term")
    q = np.zeros_like(x)
    for n in range(x.size):
        q[n] = (x[n] - np.dot(y[1:n + 1], q[n - 1::-1][:n])) / y[0]
    return Jet(q)


def jet_exp(a):
    c = a.coeffs
    b = np.zeros_like(c)
    b[0] = np.exp(c[0])
    for n in range(1, c.size):
        k = np.arange(1, n + 1)
        b[n] = np.dot(k * c[1:n + 1], b[n - k]) / n
    return Jet(b)


def jet_log(a):
    c = a.coeffs
    if not c[0] > 0.0:
        raise ZeroConstantTerm("jet logarithm needs a positive constant term")
    b = np.zeros_like(c)
    b[0] = np.log(c[0])
    for n in range(1, c.size):
        k = np.arange(1, n)
        b[n] = (c[n] - np.dot(k * b[1:n], c[n - k]) / n) / c[0]
    return Jet(b)


def jet_pow(a, r):
    """a**r for real r and a.c0 > 0."""
    return jet_exp(jet_log(a) * float(r))


def jet_int0(a, tol=1e-12):
    """Termwise antiderivative of a(z)/z from 0, for a with a(0) = 0."""
    c = a.coeffs
    scale = max(1.0, float(np.max(np.abs(c))))
    if abs(c[0]) > tol * scale:
        raise NonvanishingAtZero(f"constant term {c[0]!r} is not zero")
    out = np.zeros_like(c)
    k = np.arange(1, c.size)
    out[1:] = c[1:] / k
    return Jet(out)


def poly_axis_jet(P, axis, K=DEFAULT_ORDER):
    """Taylor jet of u -> P(u, 0) (axis=1) or u -> P(0, u) (axis=2).

    `axis` also accepts the strings "x1" and "x2".
    """
    axis = {"x1": 1, "x2": 2, "x1-axis": 1, "x2-axis": 2}.get(axis, axis)
    out = np.zeros(K + 1)
    for (i, j), c in P.coeffs.items():
        if axis == 1 and j == 0 and i <= K:
            out[i] += c
        elif axis == 2 and i == 0 and j <= K:
            out[j] += c
    return Jet(out)


def poly1_eval(coeffs, s):
    """Evaluate a univariate polynomial given by ascending coefficients."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    for c in list(coeffs)[::-1]:
        out = out * s + c
    return out if out.ndim else float(out)
