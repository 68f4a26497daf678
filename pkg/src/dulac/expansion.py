"""Principal parts of the Dulac map and time, with compensators at resonance."""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .coefficients import delta_coeffs, time_coeffs, time_coefficient
from .resonance import (ResonantRational, UncoveredCase, a_set, grid_B, lambda_in_D_L,
                        parse_lambda0, residue, richardson_limit)
from .saddle import build_aux


class NonpositiveS(ValueError):
    pass


def omega_eval(s, alpha):
    """Compensator omega(s; alpha) = (s^-alpha - 1)/alpha, and -log s at alpha = 0."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise NonpositiveS("s must be positive")
    ls = np.log(s)
    if abs(alpha) < 1e-12:
        out = -ls
    elif abs(alpha) < 1e-6:
        out = -ls + alpha * ls**2 / 2
    else:
        out = np.expm1(-alpha * ls) / alpha
    return out if out.ndim else float(out)


class LOutOfRange(ValueError):
    pass


class UnsupportedResonance(ValueError):
    pass


class CaseNotMatched(ValueError):
    pass


class UnsupportedFamily(ValueError):
    pass


class OrderTie(ValueError):
    pass


class Compensator:
    def __init__(self, alpha):
        self.alpha = float(alpha)

    def __call__(self, s):
        return omega_eval(s, self.alpha)


@dataclass
class CompensatorPoly:
    """sum_m coeffs[m] * omega(s; alpha)^m."""
    alpha: float
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("compensator coefficients must be finite")

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, s):
        w = omega_eval(s, self.alpha)
        return np.polynomial.polynomial.polyval(w, self.coeffs)


@dataclass
class Term:
    i: int
    j: int
    coeff: object  # float or CompensatorPoly
    absorbs: tuple = ()  # lattice points folded into this compensator term

    def value(self, s):
        return self.coeff(s) if isinstance(self.coeff, CompensatorPoly) else self.coeff


@dataclass
class Expansion:
    lam: float
    kind: str
    terms: list
    lam0: object
    L: float
    case: str
    L_range: tuple
    meta: dict = field(default_factory=dict)

    def grid_points(self):
        pts = set()
        for t in self.terms:
            pts.add((t.i, t.j))
            pts.update(t.absorbs)
        return pts

    def table(self):
        """Rows (i, j, omega_degree, coefficient, alpha, exponent_at_lambda0)."""
        lam0 = float(self.lam0)
        shift = lam0 if self.kind == "map" else 0.0
        rows = []
        for t in self.terms:
            e0 = shift + t.i + lam0 * t.j
            if isinstance(t.coeff, CompensatorPoly):
                for m, c in enumerate(t.coeff.coeffs):
                    rows.append((t.i, t.j, m, float(c), t.coeff.alpha, e0))
            else:
                rows.append((t.i, t.j, 0, float(t.coeff), 0.0, e0))
        return rows


def eval_expansion(e, s):
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise NonpositiveS("s must be positive")
    total = np.zeros_like(s_arr)
    for t in e.terms:
        total = total + t.value(s_arr) * s_arr ** (t.i + e.lam * t.j)
    if e.kind == "map":
        total = total * s_arr**e.lam
    return total if total.ndim else float(total)


def monomial_key(t, lam0):
    i, j, d = t
    return (i + float(lam0) * j, -d)


def monomial_order(t1, t2, lam0):
    """-1 if s^(i+lam j) omega^d of t1 precedes t2 as s -> 0, +1 if it follows."""
    lam = Fraction(lam0.p, lam0.q) if isinstance(lam0, ResonantRational) else Fraction(repr(float(lam0)))
    e1, e2 = t1[0] + lam * t1[1], t2[0] + lam * t2[1]
    if e1 != e2:
        return -1 if e1 < e2 else 1
    if t1[2] == t2[2]:
        raise OrderTie(f"{t1} and {t2} are the same monomial")
    return -1 if t1[2] > t2[2] else 1


# ---------------------------------------------------------------------------
# Case tables.  Each entry: (label, predicate on lam0 as Fraction or float,
# L range (lo, hi) as functions of lam0, half-open [lo, hi)).

def _map_cases():
    return [
        ("map(1): lam0 < 1", lambda l, r: l < 1,
         lambda l: (2 * l, min(3 * l, 1 + l))),
        ("map(2): lam0 = 1", lambda l, r: r is not None and r.frac == 1,
         lambda l: (2.0, 3.0)),
        ("map(3): lam0 > 1", lambda l, r: l > 1,
         lambda l: (l + 1, min(2 + l, 2 * l))),
    ]


def _time_cases(n2):
    a, b = 1 / (n2 + 1), 2 / (n2 + 1)

    def at(r, value):
        return r is not None and r.frac == value

    return [
        ("time(1)", lambda l, r: 0 < l < a,
         lambda l: (l * (n2 + 1), min(1.0, l * (n2 + 2)))),
        ("time(2)", lambda l, r: a < l < b and not (abs(l - 1 / n2) < 1e-15),
         lambda l: (max(1.0, l * (n2 + 1)), min(2.0, l * n2 + 1, l * (n2 + 2)))),
        ("time(3)", lambda l, r: b < l < 2 / n2,
         lambda l: (max(2.0, l * n2), l * n2 + min(1.0, l))),
        ("time(4)", lambda l, r: l > 2 / n2,
         lambda l: (2.0, min(3.0, l * n2))),
        ("time(5)", lambda l, r: at(r, Fraction(1, n2 + 1)),
         lambda l: (1.0, (n2 + 2) / (n2 + 1))),
        ("time(6)", lambda l, r: n2 > 1 and at(r, Fraction(1, n2)),
         lambda l: ((n2 + 1) / n2, (n2 + 2) / n2)),
        ("time(7)", lambda l, r: n2 > 1 and at(r, Fraction(2, n2 + 1)),
         lambda l: (2.0, min((2 * n2 + 4) / (n2 + 1), (3 * n2 + 1) / (n2 + 1)))),
        ("time(8)", lambda l, r: n2 == 1 and at(r, Fraction(1)),
         lambda l: (2.0, 3.0)),
        ("time(9)", lambda l, r: at(r, Fraction(2, n2)),
         lambda l: (2.0, min(3.0, 2 + 2 / n2))),
    ]


def _match_case(cases, lam0, L):
    r = lam0 if isinstance(lam0, ResonantRational) else None
    l = float(lam0)
    for label, pred, rng in cases:
        if pred(l, r):
            lo, hi = rng(l)
            return label, (lo, hi), lo - 1e-12 <= L < hi - 1e-12
    return None, None, False


# ---------------------------------------------------------------------------
# Coefficient lookup at a given lam

class _CoeffSource:
    """Closed-form coefficients by lattice index, cached per lam."""

    def __init__(self, fam, sec1, sec2, kind):
        self.fam, self.sec1, self.sec2, self.kind = fam, sec1, sec2, kind
        self._cache = {}

    def table(self, lam):
        key = float(lam)
        if key not in self._cache:
            fam = self.fam if key == self.fam.lam else self.fam.with_lambda(key)
            aux = build_aux(fam)
            if self.kind == "map":
                self._cache[key] = (fam, aux, delta_coeffs(fam, aux, self.sec1, self.sec2))
            else:
                self._cache[key] = (fam, aux, time_coeffs(fam, aux, self.sec1, self.sec2))
        return self._cache[key]

    def value(self, i, j, lam):
        fam, aux, tab = self.table(lam)
        if self.kind == "map":
            by = tab.by_index()
            if (i, j) not in by:
                raise UnsupportedResonance(f"no closed form for Delta({i},{j})")
            return by[(i, j)]
        try:
            return time_coefficient(i, j, fam, aux, self.sec1, self.sec2, tc=tab)
        except KeyError as exc:
            raise UnsupportedResonance(str(exc)) from None

    def target(self, i, j):
        n1, n2 = self.fam.n1, self.fam.n2
        if self.kind == "map":
            return {(0, 1): "d01", (1, 0): "d10", (1, 1): "d11"}.get((i, j))
        names = [("t_0_n2p1", (0, n2 + 1)), ("t_0n2", (0, n2)), ("t_n1p1_0", (n1 + 1, 0)),
                 ("t_n10", (n1, 0))]
        if n1 == 0:
            names.append(("t_20", (2, 0)))
        if n2 == 0:
            names.append(("t_02", (0, 2)))
        for name, ij in names:
            if ij == (i, j):
                return name
        return None


def _assemble(src, lam0, level, k, sec1, sec2, residue_variant):
    """Terms of the generic principal part over grid_B(lam0, level, k)."""
    fam = src.fam
    lam = fam.lam
    r = lam0 if isinstance(lam0, ResonantRational) else None
    grid = grid_B(lam0, level, k)
    meta = {"richardson": [], "residues": []}
    if r is None or not lambda_in_D_L(r, level, k):
        return [Term(i, j, src.value(i, j, lam)) for i, j in grid], meta
    p, q = r.p, r.q
    exact = abs(lam - r.value) <= 1e-15
    alpha = p - lam * q
    terms = []
    for i, j in grid:
        A = sorted(a_set(i, j, r, k))
        if not A:
            continue
        if A == [0]:
            terms.append(Term(i, j, src.value(i, j, lam)))
            continue
        members = [(i - rr * p, j + rr * q) for rr in A]
        if not exact:
            vals = [src.value(a, b, lam) for a, b in members]
            coeffs = [alpha**m * sum(comb(rr, m) * v for rr, v in zip(A, vals) if rr >= m)
                      for m in range(A[-1] + 1)]
        else:
            coeffs = []
            for m in range(A[-1] + 1):
                if m == A[-1]:
                    coeffs.append(_top_coefficient(src, r, members[-1], m, sec1, sec2,
                                                   residue_variant, meta))
                    continue

                def g(lm, m=m):
                    a = p - lm * q
                    return a**m * sum(comb(rr, m) * src.value(x, y, lm)
                                      for rr, (x, y) in zip(A, members) if rr >= m)

                val, diff = richardson_limit(g, r.value, 0)
                meta["richardson"].append({"term": (i, j), "omega_degree": m, "value": val,
                                           "level_difference": diff})
                coeffs.append(val)
        terms.append(Term(i, j, CompensatorPoly(alpha, coeffs), tuple(members[1:])))
    return terms, meta


def _top_coefficient(src, r, ij, m, sec1, sec2, variant, meta):
    """Limit of alpha^m T_ij at lam0 from the closed-form residue."""
    name = src.target(*ij)
    if name is None:
        raise UnsupportedResonance(f"no residue formula for index {ij}")
    order, value = residue(name, r, src.fam, None, sec1, sec2, variant=variant)
    if order > m:
        raise UnsupportedResonance(f"{name} has a pole of order {order} > {m} at {r}")
    if order < m:
        value = 0.0
    elif value is None:
        raise UncoveredCase(f"no closed-form residue for {name} at {r}")
    c = (-r.q) ** m * value
    meta["residues"].append({"target": name, "order": order, "value": value, "coefficient": c})
    return c


def dulac_map_principal(fam, aux, sec1, sec2, lam0, L, residue_variant="displayed"):
    """Principal part of D(s) for the case selected by lam0 (evaluated at fam.lam)."""
    lam0 = parse_lambda0(lam0)
    label, rng, ok = _match_case(_map_cases(), lam0, L)
    if label is None:
        raise CaseNotMatched(f"lambda0 = {lam0} matches no map case (pass 1 as '1/1')")
    if not ok:
        r = lam0 if isinstance(lam0, ResonantRational) else None
        if r is not None and r.frac != 1 and lambda_in_D_L(r, _frac_sub(L, r), (0, 0)):
            raise UnsupportedResonance(f"L = {L} brings resonant lattice points at {r}")
        raise LOutOfRange(f"L = {L} outside [{rng[0]}, {rng[1]}) for {label}")
    src = _CoeffSource(fam, sec1, sec2, "map")
    terms, meta = _assemble(src, lam0, _frac_sub(L, lam0), (0, 0), sec1, sec2, residue_variant)
    return Expansion(fam.lam, "map", terms, lam0, L, label, rng, meta)


def dulac_time_principal(fam, aux, sec1, sec2, lam0, L, residue_variant="displayed"):
    """Principal part of T(s) for n1 = 0, n2 >= 1."""
    if fam.n1 != 0 or fam.n2 < 1:
        raise UnsupportedFamily("time assembly needs n1 = 0 and n2 >= 1")
    lam0 = parse_lambda0(lam0)
    label, rng, ok = _match_case(_time_cases(fam.n2), lam0, L)
    if label is None:
        raise CaseNotMatched(f"lambda0 = {lam0} matches none of the nine time cases")
    if not ok:
        raise LOutOfRange(f"L = {L} outside [{rng[0]}, {rng[1]}) for {label}")
    src = _CoeffSource(fam, sec1, sec2, "time")
    terms, meta = _assemble(src, lam0, _frac_L(L), (fam.n1, fam.n2), sec1, sec2, residue_variant)
    return Expansion(fam.lam, "time", terms, lam0, L, label, rng, meta)


def _frac_L(L):
    return L if isinstance(L, Fraction) else Fraction(repr(float(L)))


def _frac_sub(L, lam0):
    lf = lam0.frac if isinstance(lam0, ResonantRational) else Fraction(repr(float(lam0)))
    return _frac_L(L) - lf
