"""Saddle family, transverse sections and the auxiliary functions.

The family is x1 P1 d/dx1 + x2 P2 d/dx2 divided by x1^n1 x2^n2, with P1 > 0
on the x1-axis and P2 < 0 on the x2-axis.  Index-1 auxiliary functions live
on the x2-axis (variable u, point (0, u)); index-2 ones on the x1-axis.

Values of L_i and of M_i^(ratio, .) are served from Chebyshev interpolants
built once per family from direct quadrature, because the B and C functions
nest them inside further Mellin transforms.  Jets are always exact jet
arithmetic.
"""

import math

import numpy as np
from numpy.polynomial import chebyshev as C

from .algebra import (DEFAULT_ORDER, Jet, Poly2, jet_exp, jet_int0,
                      poly1_eval, poly_axis_jet, poly_eval)
from .mellin import SmoothFn, mellin_hat
from .quadrature import gk15


# Auxiliary jets are longer than the algebra default so that the Mellin
# remainder can switch to the jet tail at a comfortable radius.
AUX_ORDER = 24


class ResonantLambda(ValueError):
    pass


class InvalidFamily(ValueError):
    pass


class InvalidSection(ValueError):
    pass


def _is_nonneg_int(v, tol=1e-9):
    return v > -tol and abs(v - round(v)) <= tol


class Section:
    """Transverse section s -> (comp1(s), comp2(s)), polynomial components.

    which = 1: starts on the x2-axis, comp1(0) = 0, comp2(0) > 0.
    which = 2: ends on the x1-axis, comp2(0) = 0, comp1(0) > 0.
    """

    def __init__(self, which, comp1, comp2):
        self.which = int(which)
        self.comp1 = [float(c) for c in comp1] or [0.0]
        self.comp2 = [float(c) for c in comp2] or [0.0]
        if max(len(self.comp1), len(self.comp2)) > 5:
            raise InvalidSection("section components are limited to degree 4")
        if self.which == 1:
            if self.d(1, 0) != 0.0 or not self.d(2, 0) > 0.0:
                raise InvalidSection("sigma1 must start at (0, c) with c > 0")
            if not self.d(1, 1) > 0.0:
                raise InvalidSection("sigma1 needs a positive first-component slope")
        elif self.which == 2:
            if self.d(2, 0) != 0.0 or not self.d(1, 0) > 0.0:
                raise InvalidSection("sigma2 must start at (c, 0) with c > 0")
            if not self.d(2, 1) > 0.0:
                raise InvalidSection("sigma2 needs a positive second-component slope")
        else:
            raise InvalidSection("which must be 1 or 2")

    @classmethod
    def default(cls, which):
        return cls(1, [0.0, 1.0], [1.0]) if which == 1 else cls(2, [1.0], [0.0, 1.0])

    def d(self, j, k):
        """k-th derivative at s = 0 of component j."""
        comp = self.comp1 if j == 1 else self.comp2
        return math.factorial(k) * comp[k] if k < len(comp) else 0.0

    def __call__(self, s):
        return poly1_eval(self.comp1, s), poly1_eval(self.comp2, s)

    def scaled(self, c):
        """The section s -> self(c s)."""
        return Section(self.which, [a * c**k for k, a in enumerate(self.comp1)],
                       [a * c**k for k, a in enumerate(self.comp2)])

    def swapped(self):
        return Section(3 - self.which, self.comp2, self.comp1)

    def to_dict(self):
        return {"x1": self.comp1, "x2": self.comp2}


class SaddleFamily:
    """Polynomial saddle family with pole orders n = (n1, n2).

    I1 is the validity interval of the x2-axis functions, I2 that of the
    x1-axis functions.
    """

    def __init__(self, P1, P2, n1=0, n2=0, I1=(-0.5, 1.5), I2=(-0.5, 1.5), check=True):
        self.P1 = P1 if isinstance(P1, Poly2) else Poly2.from_triples(P1)
        self.P2 = P2 if isinstance(P2, Poly2) else Poly2.from_triples(P2)
        self.n1 = int(n1)
        self.n2 = int(n2)
        self.I1 = (float(I1[0]), float(I1[1]))
        self.I2 = (float(I2[0]), float(I2[1]))
        if self.n1 < 0 or self.n2 < 0:
            raise InvalidFamily("pole orders must be non-negative")
        if check:
            self.validate()

    @property
    def lam(self):
        return -self.P2.coeffs.get((0, 0), 0.0) / self.P1.coeffs.get((0, 0), 0.0)

    def validate(self, npts=1000):
        for lo, hi, name in ((*self.I1, "I1"), (*self.I2, "I2")):
            if not lo < 0.0 < hi:
                raise InvalidFamily(f"{name} = ({lo}, {hi}) must contain 0")
        u2 = np.linspace(*self.I2, npts)
        if not np.all(poly_eval(self.P1, u2, 0.0) > 0.0):
            raise InvalidFamily("P1(x, 0) must be positive on I2")
        u1 = np.linspace(*self.I1, npts)
        if not np.all(poly_eval(self.P2, 0.0, u1) < 0.0):
            raise InvalidFamily("P2(0, x) must be negative on I1")
        if not self.lam > 0:
            raise InvalidFamily("hyperbolicity ratio must be positive")

    def with_lambda(self, lam):
        """Same family with the constant term of P2 moved so the ratio is lam."""
        c = dict(self.P2.coeffs)
        c[(0, 0)] = -float(lam) * self.P1.coeffs[(0, 0)]
        return SaddleFamily(self.P1, Poly2(c), self.n1, self.n2, self.I1, self.I2, check=False)

    def swapped(self):
        """Exchange the roles of the axes (the index-1/index-2 duality).

        The swapped field is x1 Q1 + x2 Q2 with Q1 = -P2, Q2 = -P1 after the
        coordinate swap, so that time runs forward along the new separatrices.
        """
        return SaddleFamily(-self.P2.swap() * (1.0 / self.lam), -self.P1.swap() * (1.0 / self.lam),
                            self.n2, self.n1, self.I2, self.I1, check=False)

    def to_dict(self):
        return {"P1": self.P1.triples(), "P2": self.P2.triples(), "n": [self.n1, self.n2],
                "I1": list(self.I1), "I2": list(self.I2)}


class _Cheb:
    """Chebyshev interpolant on [lo, hi] of a vectorized function."""

    def __init__(self, fun, lo, hi, tol=1e-13, degrees=(32, 64, 96, 128, 192)):
        probe = np.array([lo + (hi - lo) * t for t in (0.0123, 0.271, 0.5037, 0.777, 0.9871)])
        ref = np.asarray(fun(probe), dtype=float)
        for deg in degrees:
            k = np.arange(deg + 1)
            nodes = np.cos(np.pi * (k + 0.5) / (deg + 1))
            vals = np.asarray(fun(0.5 * (hi + lo) + 0.5 * (hi - lo) * nodes), dtype=float)
            coef = C.chebfit(nodes, vals, deg)
            self.coef, self.lo, self.hi = coef, lo, hi
            scale = max(1.0, float(np.max(np.abs(vals))))
            err = float(np.max(np.abs(self(probe) - ref)))
            if err <= tol * scale:
                break
        self.degree = deg
        self.error = err

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = (2 * x - (self.hi + self.lo)) / (self.hi - self.lo)
        return C.chebval(t, self.coef)


class _Axis:
    """Index-i auxiliary data.

    Pa is the field component whose ratio defines L (P1 for index 1), Pb the
    other one; `axis` is the axis the functions live on (2 for index 1) and
    the transverse derivative is taken in the other variable.
    """

    def __init__(self, Pa, Pb, axis, ratio, n, interval, order):
        self.Pa, self.Pb, self.axis, self.ratio, self.n = Pa, Pb, axis, ratio, n
        self.interval = interval
        self.order = order
        t = 3 - axis
        self.dPa, self.dPb = Pa.diff(t), Pb.diff(t)
        self.ddPb = Pb.diff(t).diff(t)
        J = lambda P: poly_axis_jet(P, axis, order)
        self.jPa, self.jPb, self.jdPa, self.jdPb, self.jddPb = (
            J(Pa), J(Pb), J(self.dPa), J(self.dPb), J(self.ddPb))
        r = self.jPa / self.jPb + ratio
        self.h_jet = Jet(r.coeffs[1:])
        self.h_radius = self._h_switch_radius()
        self.jL = jet_exp(jet_int0(r))
        self.E = _Cheb(self.log_L_direct, *interval, tol=1e-14)

    def at(self, P, u):
        u = np.asarray(u, dtype=float)
        return poly_eval(P, 0.0, u) if self.axis == 2 else poly_eval(P, u, 0.0)

    def _h_switch_radius(self):
        """Radius balancing jet truncation against cancellation in the direct form."""
        c = np.abs(self.h_jet.coeffs)
        K = c.size - 1
        scale = abs(self.ratio) + 1.0
        best_r, best_e = 1e-3, np.inf
        for r in np.geomspace(1e-3, 0.5, 40):
            e = max(c[K - 1] * r ** (K - 1), c[K] * r**K) + 4e-16 * scale / r
            if e < best_e:
                best_r, best_e = r, e
        return best_r

    def h(self, z):
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        near = np.abs(z) < self.h_radius
        out[near] = self.h_jet(z[near])
        zf = z[~near]
        out[~near] = (self.at(self.Pa, zf) / self.at(self.Pb, zf) + self.ratio) / zf
        return out

    def log_L_direct(self, u):
        """int_0^u h(z) dz by adaptive quadrature, vectorized in u."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        val, _ = gk15(lambda t: self.h(t[:, None] * u[None, :]), 0.0, 1.0,
                      epsabs=1e-15, epsrel=1e-14)
        return u * val

    def L(self, u):
        return np.exp(self.E(u))

    # d/dt (Pa/Pb), 1/Pb, its first and second transverse derivatives
    def dratio(self, u):
        a, b = self.at(self.Pa, u), self.at(self.Pb, u)
        return (self.at(self.dPa, u) * b - a * self.at(self.dPb, u)) / b**2

    def inv_b(self, u):
        return 1.0 / self.at(self.Pb, u)

    def d_inv_b(self, u):
        return -self.at(self.dPb, u) / self.at(self.Pb, u) ** 2

    def dd_inv_b(self, u):
        b, db, ddb = self.at(self.Pb, u), self.at(self.dPb, u), self.at(self.ddPb, u)
        return (2 * db**2 - b * ddb) / b**3

    def jets(self):
        jL, jPa, jPb, jdPa, jdPb, jddPb = self.jL, self.jPa, self.jPb, self.jdPa, self.jdPb, self.jddPb
        jdratio = (jdPa * jPb - jPa * jdPb) / (jPb * jPb)
        jd_inv = -jdPb / (jPb * jPb)
        jdd_inv = (2.0 * jdPb * jdPb - jPb * jddPb) / (jPb * jPb * jPb)
        return jdratio, 1.0 / jPb, jd_inv, jdd_inv


class AuxFunctions:
    """L_i, M_i, A_i always; B_i, C_i unless the ratio makes them resonant."""

    def __init__(self, fam, ax1, ax2, fns):
        self.fam = fam
        self.ax1, self.ax2 = ax1, ax2
        self._fns = fns
        for k, v in fns.items():
            if v is not None:
                setattr(self, "_" + k, v)

    def __getattr__(self, name):
        if name in ("L1", "L2", "M1", "M2", "A1", "A2", "B1", "B2", "C1", "C2", "Mhat1", "Mhat2"):
            v = self.__dict__["_fns"].get(name)
            if v is None:
                raise ResonantLambda(f"{name} is undefined at lambda = {self.fam.lam!r}")
            return v
        raise AttributeError(name)

    def has(self, name):
        return self._fns.get(name) is not None

    def axis(self, i):
        return self.ax1 if i == 1 else self.ax2


def _order_for(fam, order):
    if order is not None:
        return order
    lam = fam.lam
    need = max(2 / lam, 2 * lam, (fam.n1 + 1) / lam, lam * (fam.n2 + 1), fam.n1 + 1, fam.n2 + 1)
    return max(AUX_ORDER, int(math.ceil(need)) + 6)


def _build_axis_fns(ax, n, ratio, idx):
    I = ax.interval
    jdratio, jinv, jd_inv, jdd_inv = ax.jets()
    jL = ax.jL
    L = SmoothFn(ax.L, jL, I, name=f"L{idx}")
    M = SmoothFn(lambda u: ax.L(u) * ax.dratio(u), jL * jdratio, I, name=f"M{idx}")
    A = SmoothFn(lambda u: ax.L(u) ** n * ax.inv_b(u), (jL ** n) * jinv, I, name=f"A{idx}")
    out = {f"L{idx}": L, f"M{idx}": M, f"A{idx}": A,
           f"B{idx}": None, f"C{idx}": None, f"Mhat{idx}": None}
    if _is_nonneg_int(ratio):
        if n == 0:
            # the Mellin term carries the factor n, so B survives
            out[f"B{idx}"] = SmoothFn(lambda u: ax.L(u) * ax.d_inv_b(u), jL * jd_inv, I,
                                      name=f"B{idx}")
        return out
    mh = _Cheb(lambda u: mellin_hat(M, ratio, u), *I)
    jmh = Jet(M.jet.coeffs / (np.arange(M.jet.coeffs.size) - ratio))
    Mhat = SmoothFn(mh, jmh, I, name=f"Mhat{idx}", check=False)
    B = SmoothFn(lambda u: n * ax.L(u) ** n * ax.inv_b(u) * mh(u) + ax.L(u) ** (n + 1) * ax.d_inv_b(u),
                 n * (jL ** n) * jinv * jmh + (jL ** (n + 1)) * jd_inv, I, name=f"B{idx}")
    Cf = SmoothFn(lambda u: ax.L(u) ** 2 * ax.dd_inv_b(u) + 2 * ax.L(u) * mh(u) * ax.d_inv_b(u),
                  (jL ** 2) * jdd_inv + 2.0 * jL * jmh * jd_inv, I, name=f"C{idx}")
    out.update({f"B{idx}": B, f"C{idx}": Cf, f"Mhat{idx}": Mhat})
    return out


def build_aux(fam, order=None):
    """Auxiliary functions of the family as SmoothFn objects with exact jets."""
    order = _order_for(fam, order)
    lam = fam.lam
    ax1 = _Axis(fam.P1, fam.P2, 2, 1.0 / lam, fam.n1, fam.I1, order)
    ax2 = _Axis(fam.P2, fam.P1, 1, lam, fam.n2, fam.I2, order)
    fns = {}
    fns.update(_build_axis_fns(ax1, fam.n1, 1.0 / lam, 1))
    fns.update(_build_axis_fns(ax2, fam.n2, lam, 2))
    return AuxFunctions(fam, ax1, ax2, fns)


def s_values(fam, aux, sec1, sec2):
    """(S1, S2); either entry is None when its ratio is a non-negative integer."""
    lam = fam.lam
    S1 = S2 = None
    if not _is_nonneg_int(1.0 / lam):
        s111, s112, s120, s121 = sec1.d(1, 1), sec1.d(1, 2), sec1.d(2, 0), sec1.d(2, 1)
        S1 = (s112 / (2 * s111)
              - (s121 / s120) * poly_eval(fam.P1, 0.0, s120) / poly_eval(fam.P2, 0.0, s120)
              - s111 / aux.L1(s120) * mellin_hat(aux.M1, 1.0 / lam, s120))
    if not _is_nonneg_int(lam):
        s221, s222, s210, s211 = sec2.d(2, 1), sec2.d(2, 2), sec2.d(1, 0), sec2.d(1, 1)
        S2 = (s222 / (2 * s221)
              - (s211 / s210) * poly_eval(fam.P2, s210, 0.0) / poly_eval(fam.P1, s210, 0.0)
              - s221 / aux.L2(s210) * mellin_hat(aux.M2, lam, s210))
    return S1, S2


def require_s_values(fam, aux, sec1, sec2):
    S1, S2 = s_values(fam, aux, sec1, sec2)
    if S1 is None or S2 is None:
        raise ResonantLambda(f"S-values undefined at lambda = {fam.lam!r}")
    return S1, S2
