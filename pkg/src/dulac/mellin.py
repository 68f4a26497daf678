"""Incomplete Mellin transform f^(alpha, x) and its pole limits.

For alpha not a non-negative integer, f^(alpha, .) is the unique smooth
solution of x y' - alpha y = f through x = 0.  It is evaluated as

    sum_{i<k} c_i x^i / (i - alpha) + x^k * int_0^1 t^(k-alpha-1) g(t x) dt

with c_i the Taylor coefficients of f, g(y) = (f(y) - sum_{i<k} c_i y^i)/y^k
and k - alpha > 0.  The substitution t = u^(1/(k-alpha)) removes the weight.
"""

from math import comb, factorial

import numpy as np

from .algebra import DEFAULT_ORDER, Jet
from .quadrature import gk15


class AlphaNonnegativeInteger(ValueError):
    pass


class OutsideInterval(ValueError):
    pass


class NotAPole(ValueError):
    pass


class WrongBranch(ValueError):
    pass


class SmoothFn:
    """A smooth function on an interval around 0 together with its jet at 0.

    `eval` maps an array of abscissae to values.  `jet` is the Taylor jet at 0
    (a Jet, or a callable order -> Jet).
    """

    def __init__(self, eval, jet, interval, name="f", check=True):
        self.eval = eval
        self._jet = jet
        lo, hi = float(interval[0]), float(interval[1])
        if not lo < 0.0 < hi:
            raise ValueError(f"interval {interval!r} must contain 0 in its interior")
        self.interval = (lo, hi)
        self.name = name
        if check:
            self.check_jet()

    def __call__(self, x):
        return self.eval(x)

    @property
    def jet(self):
        if isinstance(self._jet, Jet):
            return self._jet
        return self._jet(DEFAULT_ORDER)

    def jet_at0(self, order=None):
        j = self.jet
        return j if order is None else j.truncate(order)

    def deriv_at0(self, k):
        return self.jet.derivative_at0(k)

    def check_jet(self, tol=1e-6):
        """Compare the jet with values and central differences near 0."""
        j = self.jet
        lo, hi = self.interval
        h = 1e-3 * min(-lo, hi, 1.0)
        pts = np.array([-h, 0.0, h])
        vals = np.asarray(self.eval(pts), dtype=float)
        scale = max(1.0, float(np.max(np.abs(vals))))
        if abs(vals[1] - j[0]) > tol * scale:
            raise ValueError(f"{self.name}: jet constant term {j[0]} != value {vals[1]}")
        if j.order >= 1:
            fd = (vals[2] - vals[0]) / (2 * h)
            slope_ref = j[1] + (j[3] * h * h if j.order >= 3 else 0.0)
            if abs(fd - slope_ref) > tol * max(1.0, abs(j[1])) * 10:
                raise ValueError(f"{self.name}: jet slope {j[1]} != finite difference {fd}")

    def in_interval(self, x):
        lo, hi = self.interval
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= lo) & (x <= hi)))


def smooth_from_callable(fun, jet, interval=(-1.0, 1.0), name="f"):
    return SmoothFn(fun, jet, interval, name=name)


def _check_alpha(alpha):
    a = float(alpha)
    if a > -1e-9 and abs(a - round(a)) <= 1e-9:
        raise AlphaNonnegativeInteger(f"alpha = {alpha!r} is a non-negative integer")
    return a


def choose_k(alpha):
    """Smallest k >= 0 with k - alpha >= 1/2."""
    return max(0, int(np.ceil(alpha + 0.5)))


def _switch_radius(c, k):
    """Radius below which the jet tail replaces the direct Taylor remainder.

    Balances truncation of the jet tail (estimated by its last three terms)
    against cancellation in (f - Taylor polynomial)/y^k, both at |y| = r.
    """
    K = c.size - 1
    if k >= K:
        return 0.0
    tail_idx = np.arange(max(k + 1, K - 2), K + 1)
    tail = np.abs(c[tail_idx])
    head = np.abs(c[:k + 1])
    best_r, best_e = 1e-4, np.inf
    for r in np.geomspace(1e-4, 0.5, 60):
        e_tail = np.sum(tail * r ** (tail_idx - k))
        e_direct = 4e-16 * np.sum(head * r ** np.arange(k + 1)) / r**k
        e = max(e_tail, e_direct)
        if e < best_e:
            best_r, best_e = r, e
    if not np.any(tail):
        return 0.5
    return best_r


def mellin_hat(f, alpha, x, k=None, epsabs=1e-12, epsrel=1e-12):
    """f^(alpha, x) for a SmoothFn f; x may be a scalar or an array."""
    alpha = _check_alpha(alpha)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if not f.in_interval(xa):
        raise OutsideInterval(f"x outside {f.interval}")
    if k is None:
        k = choose_k(alpha)
    if k - alpha <= 0:
        raise ValueError("k must exceed alpha")
    c = f.jet.coeffs
    if k > c.size - 1:
        raise ValueError(f"jet order {c.size - 1} too small for k = {k}")
    head = np.zeros_like(xa)
    for i in range(k):
        head = head + c[i] * xa**i / (i - alpha)
    beta = k - alpha
    r_sw = _switch_radius(c, k)
    tail_c = c[k:]
    low_c = c[:k]

    def g(y):
        out = np.empty_like(y)
        near = np.abs(y) < r_sw
        yn = y[near]
        acc = np.zeros_like(yn)
        for cc in tail_c[::-1]:
            acc = acc * yn + cc
        out[near] = acc
        yf = y[~near]
        if yf.size:
            fv = np.asarray(f.eval(yf), dtype=float)
            t = np.zeros_like(yf)
            for cc in low_c[::-1]:
                t = t * yf + cc
            out[~near] = (fv - t) / yf**k
        return out

    def integrand(u):
        t = u ** (1.0 / beta)
        y = t[:, None] * xa[None, :]
        return g(y.ravel()).reshape(y.shape) / beta

    rem, _ = gk15(integrand, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel)
    out = head + xa**k * rem
    return out if np.ndim(x) else float(out[0])


def mellin_hat_fn(f, alpha, name=None):
    """The SmoothFn x -> f^(alpha, x), with jet c_i/(i - alpha)."""
    alpha = _check_alpha(alpha)
    c = f.jet.coeffs
    jet = Jet(c / (np.arange(c.size) - alpha))
    return SmoothFn(lambda x: mellin_hat(f, alpha, x), jet, f.interval,
                    name=name or f"{f.name}^", check=False)


def mellin_pole_limit(f, i0, x):
    """lim_{alpha -> i0} (i0 - alpha) f^(alpha, x)."""
    if not f.in_interval(x):
        raise OutsideInterval(f"x outside {f.interval}")
    return f.jet[i0] * float(x) ** i0


def _as_index(v, tol=1e-9):
    r = round(v)
    if abs(v - r) > tol or r < 0:
        return None
    return int(r)


def mellin_affine_pole_limit(f, kappa1, kappa2, alpha0, x):
    """lim_{alpha -> alpha0} (alpha0 - alpha) f^(kappa1 alpha + kappa2, x)."""
    if kappa1 == 0:
        raise ValueError("kappa1 must be nonzero")
    i0 = _as_index(kappa1 * alpha0 + kappa2)
    if i0 is None:
        raise NotAPole(f"kappa1*alpha0 + kappa2 = {kappa1 * alpha0 + kappa2} is not in Z>=0")
    return mellin_pole_limit(f, i0, x) / kappa1


def mellin_product_pole_limit(A, M, i0, p, q, x, order, alpha_hat_A=None):
    """Pole limit of B^((q+1) alpha - p, x) at alpha = i0 for B = A * M^(alpha, .).

    order 2 returns lim (i0-alpha)^2 B^, order 1 lim (i0-alpha) B^.  The
    order-1 branch needs A^(i1, x) with i1 = q i0 - p < 0; it is computed
    unless supplied.
    """
    if q == -1:
        raise ValueError("q must differ from -1")
    i1 = q * i0 - p
    i2 = (q + 1) * i0 - p
    x = float(x)
    m = M.jet
    a = A.jet
    if order == 2:
        if i1 < 0:
            raise WrongBranch("order 2 needs q*i0 - p >= 0")
        return x**i2 / (q + 1) * m[i0] * a[i1]
    if order != 1:
        raise ValueError("order must be 1 or 2")
    if i1 >= 0:
        raise WrongBranch("order 1 needs q*i0 - p < 0")
    total = 0.0
    if i2 >= 0:
        s = 0.0
        for j in range(i2 + 1):
            mj = m.derivative_at0(j)
            aj = a.derivative_at0(i2 - j)
            s += comb(i2, j) * mj * aj / (j - i0)
        total += x**i2 / ((q + 1) * factorial(i2)) * s
    ah = mellin_hat(A, i1, x) if alpha_hat_A is None else alpha_hat_A
    total += x**i0 * m[i0] * ah
    return total
