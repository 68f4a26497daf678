"""Resonance combinatorics on the exponent lattice and pole residues.

A lattice point (i, j) stands for the monomial s^(i + lam j).  Membership,
grids, collision tests and compensator index sets are exact (integers and
Fractions).  Residues of the coefficient formulas at a resonant ratio lam0
are given in closed form and can be cross-checked by `richardson_limit`.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .algebra import poly_axis_jet
from .coefficients import delta00, delta_coeffs, time_coeffs
from .mellin import NotAPole, mellin_hat
from .saddle import build_aux, s_values


class UncoveredCase(ValueError):
    pass


@dataclass(frozen=True)
class ResonantRational:
    p: int
    q: int

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"{self.p}/{self.q} is not in lowest terms")

    @classmethod
    def of(cls, value):
        f = Fraction(value)
        return cls(f.numerator, f.denominator)

    @property
    def frac(self):
        return Fraction(self.p, self.q)

    @property
    def value(self):
        return self.p / self.q

    def __float__(self):
        return self.value

    def __str__(self):
        return f"{self.p}/{self.q}"


def parse_lambda0(text):
    """'p/q' or an integer string gives a ResonantRational; anything else a float."""
    if isinstance(text, ResonantRational):
        return text
    if isinstance(text, Fraction):
        return ResonantRational.of(text)
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    t = str(text).strip()
    if "/" in t:
        a, b = t.split("/")
        return ResonantRational.of(Fraction(int(a), int(b)))
    if t.isdigit():
        return ResonantRational(int(t), 1)
    return float(t)


def as_rational(lam, max_den=1000, tol=1e-12):
    """ResonantRational close to lam within tol, else None."""
    if isinstance(lam, ResonantRational):
        return lam
    f = Fraction(float(lam)).limit_denominator(max_den)
    if f > 0 and abs(float(f) - float(lam)) <= tol:
        return ResonantRational.of(f)
    return None


def _frac(x):
    if isinstance(x, ResonantRational):
        return x.frac
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    # decimal reading, so that 1.2 means 6/5
    return Fraction(repr(float(x)))


def in_lambda(i, j, k):
    return (j == 0 and i >= k[0]) or j >= k[1]


def lambda_in_D(i, j, k, lam0):
    """Is lam0 a collision ratio for (i, j), i.e. lam0 in D_ij^k?"""
    r = lam0 if isinstance(lam0, ResonantRational) else ResonantRational.of(_frac(lam0))
    p, q = r.p, r.q
    target = q * i + p * j
    for jj in range(target // p + 1):
        rest = target - p * jj
        if rest % q:
            continue
        ii = rest // q
        if (ii, jj) != (i, j) and in_lambda(ii, jj, k):
            return True
    return False


def grid_B(lam0, L, k):
    """{(i, j) in the lattice with offset k : i + lam0 j <= L}, sorted by exponent."""
    lam = _frac(lam0)
    Lf = _frac(L)
    out = []
    if Lf < 0:
        return out
    jmax = int(Lf / lam)
    for j in range(jmax + 1):
        for i in range(int(Lf) + 1):
            if i + lam * j <= Lf and in_lambda(i, j, k):
                out.append((i, j))
    return sorted(out, key=lambda t: (t[0] + lam * t[1], -t[1]))


def lambda_in_D_L(lam0, L, k):
    return any(lambda_in_D(i, j, k, lam0) for i, j in grid_B(lam0, L, k))


def a_set(i, j, lam0, k):
    """Compensator index set: shifts r with (i - r p, j + r q) on the lattice.

    Empty when the point itself is reached from a lower-j lattice point.
    """
    r0 = lam0 if isinstance(lam0, ResonantRational) else ResonantRational.of(_frac(lam0))
    p, q = r0.p, r0.q
    r = 1
    while j - r * q >= 0:
        if in_lambda(i + r * p, j - r * q, k):
            return set()
        r += 1
    return {r for r in range(i // p + 1) if in_lambda(i - r * p, j + r * q, k)}


def pole_order_bound(i, j, lam0):
    r = lam0 if isinstance(lam0, ResonantRational) else ResonantRational.of(_frac(lam0))
    return Fraction(i, r.p) + Fraction(j, r.q)


# ---------------------------------------------------------------------------
# Residues

# Coefficient ids accepted by `residue` and `coefficient_value`.
MAP_TARGETS = ("d01", "d10", "d11")
TIME_TARGETS = ("t_n10", "t_0n2", "t_n1p1_0", "t_0_n2p1", "t_20", "t_02")


def coefficient_value(target, fam, sec1, sec2, aux=None):
    """Closed-form value of one coefficient at the family's own lam."""
    aux = aux or build_aux(fam)
    if target == "d00":
        return delta00(fam, aux, sec1, sec2)
    if target in MAP_TARGETS:
        return getattr(delta_coeffs(fam, aux, sec1, sec2), target)
    v = getattr(time_coeffs(fam, aux, sec1, sec2), target)
    if v is None:
        raise ValueError(f"{target} is not defined for n = ({fam.n1}, {fam.n2})")
    return v


def richardson_limit(fn, lam0, order, hs=(1e-3, 1e-4)):
    """Limit of (lam - lam0)^order fn(lam) from symmetric punctured samples.

    F(h) = ((h)^order fn(lam0 + h) + (-h)^order fn(lam0 - h)) / 2 has an
    even expansion in h, so one elimination step removes the h^2 error.
    Returns (value, difference between the two levels).
    """
    lam0 = float(lam0)
    h1, h2 = hs

    def F(h):
        return 0.5 * (h**order * fn(lam0 + h) + (-h) ** order * fn(lam0 - h))

    f1, f2 = F(h1), F(h2)
    ratio = (h1 / h2) ** 2
    return (ratio * f2 - f1) / (ratio - 1.0), abs(f2 - f1)


def punctured_residue(target, lam0, fam, sec1, sec2, order, hs=(1e-3, 1e-4)):
    def fn(lam):
        return coefficient_value(target, fam.with_lambda(lam), sec1, sec2)
    return richardson_limit(fn, lam0, order, hs)


def _int_or_none(x):
    """x as int when the Fraction x is an integer, else None."""
    return int(x) if x.denominator == 1 else None


def _pole_set(target, n):
    """Membership test lam0 -> bool for the coefficient's pole set."""
    n1, n2 = n
    idx = {"d01": ((0, 1), (0, 0)), "d10": ((1, 0), (0, 0)), "d11": ((1, 1), (0, 0)),
           "t_n10": ((n1, 0), n), "t_0n2": ((0, n2), n), "t_n1p1_0": ((n1 + 1, 0), n),
           "t_0_n2p1": ((0, n2 + 1), n), "t_20": ((2, 0), n), "t_02": ((0, 2), n)}[target]
    (i, j), k = idx
    return lambda r: lambda_in_D(i, j, k, r)


def residue(target, lam0, fam, aux=None, sec1=None, sec2=None, variant="displayed",
            require_value=False):
    """(order, value) of the pole of `target` at the resonant ratio lam0.

    order 0 means lam0 is in the pole set but the coefficient extends
    smoothly there (value None).  For T20 (n1 = 0) and T02 (n2 = 0) only the
    order is known and value is None; require_value=True raises instead.

    variant="displayed" follows the published closed forms literally;
    variant="derived" uses the re-derived forms where the two differ.
    """
    from .saddle import Section
    sec1 = sec1 or Section.default(1)
    sec2 = sec2 or Section.default(2)
    r = lam0 if isinstance(lam0, ResonantRational) else as_rational(lam0)
    if r is None:
        raise NotAPole(f"lambda0 = {lam0!r} is not rational")
    n = (fam.n1, fam.n2)
    if target.startswith("t_") and n == (0, 0):
        raise ValueError("time coefficients need n != (0, 0)")
    if not _pole_set(target, n)(r):
        raise NotAPole(f"lambda0 = {r} is not a pole of {target} for n = {n}")
    if variant not in ("displayed", "derived"):
        raise ValueError("variant must be 'displayed' or 'derived'")
    fam0 = fam.with_lambda(r.value)
    if aux is None or abs(aux.fam.lam - r.value) > 1e-14:
        aux = build_aux(fam0)
    ctx = _Ctx(fam0, aux, sec1, sec2, r, variant)
    order, value = getattr(ctx, target)()
    if value is None and order > 0 and require_value:
        raise UncoveredCase(f"no closed-form residue for {target} at lambda0 = {r}")
    return order, value


class _Ctx:
    """Quantities at lam0 shared by the residue branches."""

    def __init__(self, fam, aux, sec1, sec2, r, variant):
        self.fam, self.aux, self.sec1, self.sec2 = fam, aux, sec1, sec2
        self.r, self.lam = r, r.frac
        self.derived = variant == "derived"
        self.n1, self.n2 = fam.n1, fam.n2
        self.s111, self.s120 = sec1.d(1, 1), sec1.d(2, 0)
        self.s210, self.s221 = sec2.d(1, 0), sec2.d(2, 1)
        self.L1 = float(aux.L1(self.s120))
        self.L2 = float(aux.L2(self.s210))
        self.d00 = delta00(fam, aux, sec1, sec2)
        self._S = None

    @property
    def S(self):
        if self._S is None:
            self._S = s_values(self.fam, self.aux, self.sec1, self.sec2)
        return self._S

    # jet coefficients f^(k)(0)/k!
    def m1(self, k):
        return self.aux.M1.jet[k]

    def m2(self, k):
        return self.aux.M2.jet[k]

    def a1(self, k):
        return self.aux.A1.jet[k]

    def a2(self, k):
        return self.aux.A2.jet[k]

    def _f3(self, idx):
        """L_i^(n_i+1) times the transverse derivative of 1/P_other on the axis."""
        ax = self.aux.axis(idx)
        n = self.n1 if idx == 1 else self.n2
        _, _, jd_inv, _ = ax.jets()
        return (ax.jL ** (n + 1)) * jd_inv

    # -- map coefficients ------------------------------------------------------

    def d10(self):
        i = _int_or_none(1 / self.lam)
        return 1, (-self.d00 * self.s111 * self.s120**i / (self.L1 * i**3) * self.m1(i))

    def d01(self):
        i = _int_or_none(self.lam)
        return 1, (-self.d00**2 * self.s221 * self.s210**i / self.L2 * self.m2(i))

    def d11(self):
        d00, lam = self.d00, self.lam
        if lam == 1:
            return 2, (2 * d00**2 * self.s111 * self.s120 * self.m1(1) / self.L1
                       * self.s221 * self.s210 * self.m2(1) / self.L2)
        i = _int_or_none(1 / lam)
        if i is not None:
            S2 = self.S[1]
            val = 2 * d00**2 * self.s111 * self.s120**i / (self.L1 * i**3) * S2
            # the published form multiplies by M1^(i)(0), the derivation by M1^(i)(0)/i!
            val *= self.m1(i) if self.derived else self.m1(i) * math.factorial(i)
            return 1, val
        i = _int_or_none(lam)
        S1 = self.S[0]
        return 1, (-2 * i * d00**2 * self.s221 * self.s210**i / self.L2 * self.m2(i) * S1)

    # -- time coefficients -----------------------------------------------------

    def t_0n2(self):
        n1, n2 = self.n1, self.n2
        i = _int_or_none(n2 * self.lam - n1)
        return 1, (-self.d00**n2 * self.s210 ** (n1 + i) * self.s221**n2
                   / (n2 * self.L2**n2) * self.a2(i))

    def t_n10(self):
        n1, n2 = self.n1, self.n2
        i = _int_or_none(n1 / self.lam - n2)
        if i is None or i < 0:
            return 0, None
        # published form evaluates L1 at sigma210; L1 lives on the other axis
        L1 = self.L1 if self.derived else float(self.aux.L1(self.s210))
        return 1, (-n1 / (n2 + i) ** 2 * self.s111**n1 * self.s120 ** (n2 + i)
                   / L1**n1 * self.a1(i))

    def t_0_n2p1(self):
        n1, n2 = self.n1, self.n2
        s210 = self.s210
        pref = self.d00 ** (n2 + 1) * self.s221 ** (n2 + 1) / self.L2 ** (n2 + 1)
        i = _int_or_none(self.lam)
        if i is not None and n2 * i - n1 >= 0:
            m = n2 * i - n1
            return 2, (n2 * pref * s210 ** ((n2 + 1) * i) / (n2 + 1) * self.m2(i) * self.a2(m))
        if i is not None:
            I = (n2 + 1) * i - n1
            ahat = mellin_hat(self.aux.A2, n2 * i - n1, s210)
            first = n2 * self.m2(i) * ahat * (s210**i if self.derived else s210**I)
            summ = 0.0
            R = 0.0
            if I >= 0:
                summ = sum(self.m2(j) * self.a2(I - j) / (j - i) for j in range(I + 1))
                summ *= n2 * s210**I / (n2 + 1)
                R = s210**I * self._f3(2)[I] / (n2 + 1)
            return 1, (-pref * s210**n1 * (first + summ + R))
        i = _int_or_none(self.lam * (n2 + 1) - n1)
        return 1, (-pref * s210 ** (n1 + i) / (n2 + 1) * self.aux.B2.jet[i])

    def t_n1p1_0(self):
        n1, n2 = self.n1, self.n2
        s111, s120, L1, lam = self.s111, self.s120, self.L1, self.lam
        ii = _int_or_none(1 / lam)
        if ii is not None:
            i = ii
            i1 = n1 * i - n2
            i0 = (n1 + 1) * i - n2
            pre = s111 ** (n1 + 1) * s120 ** ((n1 + 1) * i) / ((n1 + 1) * L1 ** (n1 + 1))
            if n1 >= 1 and i1 >= 0:
                core = self.m1(i) * self.a1(i1)
                if self.derived:
                    return 2, pre * core / i**4
                return 2, -pre * core / i**2
            if i0 >= 0:
                summ = sum(self.m1(j) * self.a1(i0 - j) / (j - i) for j in range(i0 + 1))
                if self.derived:
                    f3 = self._f3(1)[i0]
                else:
                    # published form reads the transverse derivative at (u, 0)
                    f3 = _f3_other_axis(self.fam, self.aux, n1)[i0]
                return 1, -pre / i**2 * (n1 * summ + f3)
            return 0, None
        b1 = b2 = None
        if n1 >= 1:
            b1 = _int_or_none(n1 / lam - n2)
            b1 = b1 if b1 is not None and b1 >= 0 else None
        b2 = _int_or_none((n1 + 1) / lam - n2)
        b2 = b2 if b2 is not None and b2 >= 0 else None
        lam0 = float(lam)
        val = 0.0
        if b1 is not None:
            S1 = self.S[0]
            val += -n1 * lam0 * s111**n1 * s120 ** (n2 + b1) / ((n2 + b1) * L1**n1) * self.a1(b1) * S1
        if b2 is not None:
            jam = (self.aux.A1.jet * self.aux.Mhat1.jet)[b2]
            if self.derived:
                coef = n1 * jam + self._f3(1)[b2]
                val += -lam0**2 / (n1 + 1) * s111 ** (n1 + 1) * s120 ** (n2 + b2) / L1 ** (n1 + 1) * coef
            else:
                val += (n1 * lam0 * s111 ** (n1 + 1) * s120 ** (n2 + b2)
                        / ((n2 + b2) * L1 ** (n1 + 1)) * jam)
        if b1 is None and b2 is None:
            return 0, None
        return 1, val

    def t_20(self):
        n2 = self.n2
        k = _int_or_none(1 / self.lam)
        return (2 if k is not None and k >= n2 else 1), None

    def t_02(self):
        n1 = self.n1
        lam = self.lam
        li = _int_or_none(lam)
        if li is not None and li >= n1:
            return 2, None
        if li is not None:
            return 1, None
        if 2 * lam >= n1:
            return 1, None
        return 0, None


def _f3_other_axis(fam, aux, n1):
    """L1^(n1+1)(u) times d/dx1 (1/P2) read at (u, 0) instead of (0, u)."""
    ax = aux.ax1
    K = ax.order
    jP2 = poly_axis_jet(fam.P2, 1, K)
    jdP2 = poly_axis_jet(fam.P2.diff(1), 1, K)
    return (ax.jL ** (n1 + 1)) * (-1.0 * jdP2 / (jP2 * jP2))


def residue_table(fam, sec1, sec2, lam0, targets=None, variant="displayed", check=True):
    """Rows (target, order, bound, value, richardson, rel_err) at lam0."""
    r = lam0 if isinstance(lam0, ResonantRational) else as_rational(lam0)
    n = (fam.n1, fam.n2)
    if targets is None:
        targets = list(MAP_TARGETS)
        if n != (0, 0):
            targets += ["t_n10", "t_0n2", "t_n1p1_0", "t_0_n2p1"]
            targets += ["t_20"] if n[0] == 0 else []
            targets += ["t_02"] if n[1] == 0 else []
    idx = {"d01": (0, 1), "d10": (1, 0), "d11": (1, 1), "t_n10": (n[0], 0),
           "t_0n2": (0, n[1]), "t_n1p1_0": (n[0] + 1, 0), "t_0_n2p1": (0, n[1] + 1),
           "t_20": (2, 0), "t_02": (0, 2)}
    rows = []
    for t in targets:
        try:
            order, val = residue(t, r, fam, None, sec1, sec2, variant=variant)
        except NotAPole:
            continue
        bound = pole_order_bound(*idx[t], r)
        rich = rel = None
        if check and order > 0:
            rich, _ = punctured_residue(t, r.value, fam, sec1, sec2, order)
            if val is not None:
                rel = abs(val - rich) / abs(rich) if abs(rich) > 1e-8 else abs(val - rich)
        rows.append((t, order, bound, val, rich, rel))
    return rows


__all__ = ["ResonantRational", "UncoveredCase", "NotAPole", "parse_lambda0", "as_rational",
           "in_lambda", "lambda_in_D", "grid_B", "lambda_in_D_L", "a_set", "pole_order_bound",
           "residue", "richardson_limit", "punctured_residue", "coefficient_value",
           "residue_table"]
