"""Regular transitions of Y = (1/(y^ell f)) (d/dx + y h d/dy) near the invariant line y = 0.

Closed forms for the transport factor H, the first two derivatives of the
section-to-section map P(s) and the first coefficients of the transition
time T(s) = s^ell T~(s).  An ODE oracle (x as independent variable) gives
independent values by polynomial fits of P and T over a small s-window.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .algebra import Poly2, poly1_eval
from .quadrature import gk15


class OutsideDomain(ValueError):
    pass


class NoConnection(ValueError):
    pass


class RegularField:
    """Field data (ell, f, h) on V = (a, b) x (-c, c); f and h are Poly2."""

    def __init__(self, ell, f, h, domain=((-1.0, 2.0), 0.5), check=True):
        self.ell = int(ell)
        self.f = f if isinstance(f, Poly2) else Poly2.from_triples(f)
        self.h = h if isinstance(h, Poly2) else Poly2.from_triples(h)
        (a, b), c = domain
        self.a, self.b, self.c = float(a), float(b), float(c)
        if self.ell < 0:
            raise ValueError("ell must be non-negative")
        if check:
            xs = np.linspace(self.a, self.b, 1000)
            if np.any(self.f(xs, 0.0) == 0.0) or np.ptp(np.sign(self.f(xs, 0.0))) != 0:
                raise ValueError("f(x, 0) must not vanish on (a, b)")
        self.f2 = self.f.diff(2)
        self.f1 = self.f.diff(1)
        self.f22 = self.f2.diff(2)
        self.h2 = self.h.diff(2)

    def inside(self, *xs):
        for x in xs:
            if not self.a < x < self.b:
                raise OutsideDomain(f"x = {x} outside ({self.a}, {self.b})")


class RegularSection:
    """s -> (comp1(s), comp2(s)) with comp2(0) = 0 and comp2'(0) != 0."""

    def __init__(self, comp1, comp2):
        self.comp1 = [float(c) for c in comp1] or [0.0]
        self.comp2 = [float(c) for c in comp2] or [0.0]
        if self.d(2, 0) != 0.0:
            raise ValueError("section must start on y = 0")
        if self.d(2, 1) == 0.0:
            raise ValueError("section must be transverse to y = 0")

    def d(self, i, k):
        comp = self.comp1 if i == 1 else self.comp2
        return math.factorial(k) * comp[k] if k < len(comp) else 0.0

    def __call__(self, s):
        return poly1_eval(self.comp1, s), poly1_eval(self.comp2, s)


def _h0(field):
    return lambda u: field.h(u, 0.0)


def _integral(fn, lo, hi):
    if lo == hi:
        return 0.0
    return gk15(fn, lo, hi)[0]


def transport_H(field, x, y):
    """exp of the integral of h(u, 0) from y to x."""
    field.inside(x, y)
    return math.exp(_integral(_h0(field), y, x))


def _H_vec(field, x, y):
    """H(x, y) for an array x, by cumulative integration from y."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.array([math.exp(_integral(_h0(field), y, xi)) for xi in x])


def _rho2_integral(field, xi10, x):
    if x == xi10:
        return 0.0
    return _integral(lambda u: _H_vec(field, u, xi10) * field.h2(u, 0.0), xi10, x)


def rho12(field, xi, x):
    """(rho1, rho2): first and second s-derivatives at s = 0 of the y-value over x."""
    xi10 = xi.d(1, 0)
    field.inside(x, xi10)
    H = transport_H(field, x, xi10)
    rho1 = xi.d(2, 1) * H
    rho2 = H * (xi.d(2, 2) - 2 * xi.d(1, 1) * xi.d(2, 1) * field.h(xi10, 0.0)
                + 2 * xi.d(2, 1) ** 2 * _rho2_integral(field, xi10, x))
    return rho1, rho2


def _check_connection(field, xi, zeta):
    x0, x1 = xi.d(1, 0), zeta.d(1, 0)
    field.inside(x0, x1)
    if not x0 < x1:
        raise NoConnection(f"the orbit from x = {x0} runs to larger x, not to {x1}")
    return x0, x1


def regular_map_coeffs(field, xi, zeta):
    """(p1, p2) = (P'(0), P''(0))."""
    x0, x1 = _check_connection(field, xi, zeta)
    p1 = xi.d(2, 1) / zeta.d(2, 1) * transport_H(field, x1, x0)
    _, r2 = rho12(field, xi, x1)
    p2 = ((2 * zeta.d(1, 1) * zeta.d(2, 1) * field.h(x1, 0.0) - zeta.d(2, 2)) * p1**2 + r2) / zeta.d(2, 1)
    return p1, p2


def regular_time_coeffs(field, xi, zeta, t2_factor=1):
    """(T~(0), T~'(0), T''(0)); the last is None unless ell = 0.

    t2_factor multiplies the zeta11 p2 f(zeta10, 0) term of T''(0); the
    default 1 is the verified value (2 reproduces the alternative reading).
    """
    x0, x1 = _check_connection(field, xi, zeta)
    ell = field.ell
    p1, p2 = regular_map_coeffs(field, xi, zeta)

    def r12(x):
        x = np.atleast_1d(x)
        out = np.array([rho12(field, xi, float(v)) for v in x])
        return out[:, 0], out[:, 1]

    def t0_integrand(x):
        r1, _ = r12(x)
        return r1**ell * field.f(x, 0.0)

    def t1_integrand(x):
        r1, r2 = r12(x)
        return r1 ** (ell - 1) * (ell * r2 * field.f(x, 0.0) + 2 * r1**2 * field.f2(x, 0.0))

    z11, z21, z12 = zeta.d(1, 1), zeta.d(2, 1), zeta.d(1, 2)
    x11, x21, x12 = xi.d(1, 1), xi.d(2, 1), xi.d(1, 2)
    T0 = _integral(t0_integrand, x0, x1)
    T1 = (z11 * z21**ell * p1 ** (ell + 1) * field.f(x1, 0.0)
          - x11 * x21**ell * field.f(x0, 0.0)
          + 0.5 * _integral(t1_integrand, x0, x1))
    if ell != 0:
        return T0, T1, None

    def t2_integrand(x):
        r1, r2 = r12(x)
        return r1**2 * field.f22(x, 0.0) + r2 * field.f2(x, 0.0)

    T2 = ((z12 * p1**2 + t2_factor * z11 * p2) * field.f(x1, 0.0)
          + z11**2 * p1**2 * field.f1(x1, 0.0)
          + 2 * z11 * z21 * p1**2 * field.f2(x1, 0.0)
          - x12 * field.f(x0, 0.0) - x11**2 * field.f1(x0, 0.0)
          - 2 * x11 * x21 * field.f2(x0, 0.0)
          + _integral(t2_integrand, x0, x1))
    return T0, T1, T2


# ---------------------------------------------------------------------------
# ODE oracle

def regular_transition(field, xi, zeta, s, rtol=1e-13, atol=1e-15, umax=0.3):
    """(P(s), T(s)) by integrating dy/dx = y h, dt/dx = y^ell f from xi(s)."""
    xs, ys = xi(s)
    ugrid = np.linspace(-umax, umax, 61)
    xhi = float(np.max(poly1_eval(zeta.comp1, ugrid)))
    if not xs < xhi < field.b:
        raise NoConnection("target section out of reach")

    def rhs(x, z):
        y = z[0]
        return [y * field.h(x, y), y**field.ell * field.f(x, y)]

    sol = solve_ivp(rhs, (xs, xhi), [ys, 0.0], method="DOP853", rtol=rtol, atol=atol,
                    dense_output=True)
    if not sol.success:
        raise NoConnection(sol.message)

    def g(u):
        return sol.sol(poly1_eval(zeta.comp1, u))[0] - poly1_eval(zeta.comp2, u)

    vals = np.array([g(u) for u in ugrid])
    # root nearest to u = 0 with a sign change
    idx = [k for k in range(len(ugrid) - 1) if vals[k] == 0 or vals[k] * vals[k + 1] < 0]
    if not idx:
        raise NoConnection("no crossing of the target section")
    k = min(idx, key=lambda k: abs(ugrid[k] + ugrid[k + 1]))
    u = brentq(g, ugrid[k], ugrid[k + 1], xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return u, float(sol.sol(poly1_eval(zeta.comp1, u))[1])


def regular_oracle(field, xi, zeta, h=0.02, npts=21, degree=8):
    """Taylor coefficients of P and T at s = 0 from a polynomial fit.

    Returns dict with p1, p2, Tt0, Tt1 and T2 (ell = 0 only).
    """
    s = h * np.cos(np.pi * (np.arange(npts) + 0.5) / npts)
    P = np.empty(npts)
    T = np.empty(npts)
    for k, sk in enumerate(s):
        P[k], T[k] = regular_transition(field, xi, zeta, float(sk))
    cp = np.polynomial.chebyshev.Chebyshev.fit(s, P, degree).convert(kind=np.polynomial.Polynomial).coef
    ct = np.polynomial.chebyshev.Chebyshev.fit(s, T, degree).convert(kind=np.polynomial.Polynomial).coef
    ell = field.ell
    out = {"p1": cp[1], "p2": 2 * cp[2], "Tt0": ct[ell], "Tt1": ct[ell + 1]}
    out["T2"] = 2 * ct[2] if ell == 0 else None
    return out
