"""Closed-form leading coefficients of the Dulac map and the Dulac time.

Map:  D(s) = s^lam (d00 + d01 s^lam + d10 s + d11 s^(1+lam) + ...).
Time: T(s) = sum T_ij s^(i + lam j) over the index set of n = (n1, n2).

Each value carries a validity flag: False when lam lies in the exclusion set
of that coefficient, where the formula is singular or not the coefficient.
Values are still returned whenever the formula can be evaluated, because the
resonant assembly needs them at lam0 +- h.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import poly_eval
from .mellin import AlphaNonnegativeInteger, mellin_hat
from .saddle import ResonantLambda, s_values

_TOL = 1e-9


def _is_pos_int(v, lo=1):
    r = round(v)
    return abs(v - r) <= _TOL and r >= lo


def _is_nonneg_int(v):
    return _is_pos_int(v, lo=0)


# Exclusion sets, tested on floats with tolerance 1e-9.  Each returns a
# reason string when lam is in the set, else None.

def excl_d01(lam, n=None):
    return "lambda in N" if _is_pos_int(lam) else None


def excl_d10(lam, n=None):
    return "lambda in 1/N" if _is_pos_int(1 / lam) else None


def excl_d11(lam, n=None):
    return excl_d01(lam) or excl_d10(lam)


def excl_t_n10(lam, n):
    n1, n2 = n
    for i in range(1, n1 + 1):
        if _is_pos_int(i / lam, lo=max(n2, 1)):
            return f"lambda in {i}/N>={n2}"
    return None


def excl_t_0n2(lam, n):
    n1, n2 = n
    if n2 >= 1 and _is_pos_int(n2 * lam, lo=max(n1, 1)):
        return f"lambda in N>={n1}/{n2}"
    return None


def excl_t_n1p1_0(lam, n):
    n1, n2 = n
    for i in range(1, n1 + 2):
        if _is_pos_int(i / lam, lo=max(n2, 1)):
            return f"lambda in {i}/N>={n2}"
    kmax = math.ceil(n2 / (n1 + 1)) - 1
    for k in range(1, kmax + 1):
        if abs(lam - 1 / k) <= _TOL:
            return f"lambda = 1/{k} (extra exclusion, k < ceil(n2/(n1+1)))"
    return None


def excl_t_0n2p1(lam, n):
    n1, n2 = n
    if _is_pos_int((n2 + 1) * lam, lo=max(n1, 1)):
        return f"lambda in N>={n1}/{n2 + 1}"
    if _is_pos_int(lam):
        return "lambda in N"
    return None


def excl_t_20(lam, n):
    n1, n2 = n
    if _is_pos_int(2 / lam, lo=max(n2, 1)):
        return f"lambda in 2/N>={n2}"
    for k in range(1, math.ceil(n2 / 2)):
        if abs(lam - 1 / k) <= _TOL:
            return f"lambda = 1/{k} (extra exclusion, k < ceil(n2/2))"
    return None


def excl_t_02(lam, n):
    return "lambda in N/2" if _is_pos_int(2 * lam) else None


@dataclass
class DulacMapCoeffs:
    d00: float
    d01: float
    d10: float
    d11: float
    lam: float
    valid: dict = field(default_factory=dict)
    reasons: dict = field(default_factory=dict)

    def by_index(self):
        return {(0, 0): self.d00, (0, 1): self.d01, (1, 0): self.d10, (1, 1): self.d11}

    def rows(self):
        names = {"d00": (0, 0), "d01": (0, 1), "d10": (1, 0), "d11": (1, 1)}
        return [(k, ij, getattr(self, k), self.valid[k], self.reasons.get(k, ""))
                for k, ij in names.items()]


@dataclass
class DulacTimeCoeffs:
    n: tuple
    lam: float
    t_n10: float
    t_0n2: float
    t_n1p1_0: float
    t_0_n2p1: float
    t_20: float = None
    t_02: float = None
    valid: dict = field(default_factory=dict)
    reasons: dict = field(default_factory=dict)

    def index_of(self, name):
        n1, n2 = self.n
        return {"t_n10": (n1, 0), "t_0n2": (0, n2), "t_n1p1_0": (n1 + 1, 0),
                "t_0_n2p1": (0, n2 + 1), "t_20": (2, 0), "t_02": (0, 2)}[name]

    def names(self):
        out = ["t_n10", "t_0n2", "t_n1p1_0", "t_0_n2p1"]
        if self.t_20 is not None:
            out.append("t_20")
        if self.t_02 is not None:
            out.append("t_02")
        return out

    def by_index(self):
        return {self.index_of(k): getattr(self, k) for k in self.names()}

    def rows(self):
        return [(k, self.index_of(k), getattr(self, k), self.valid[k], self.reasons.get(k, ""))
                for k in self.names()]


def _hat(f, alpha, x):
    try:
        return mellin_hat(f, alpha, x)
    except AlphaNonnegativeInteger:
        return float("nan")


def _get(aux, name):
    try:
        return getattr(aux, name)
    except ResonantLambda:
        return None


def delta00(fam, aux, sec1, sec2):
    lam = fam.lam
    s111, s120 = sec1.d(1, 1), sec1.d(2, 0)
    s210, s221 = sec2.d(1, 0), sec2.d(2, 1)
    return (s111**lam * s120 / aux.L1(s120) ** lam) * (aux.L2(s210) / (s221 * s210**lam))


def delta_coeffs(fam, aux, sec1, sec2):
    lam = fam.lam
    d00 = delta00(fam, aux, sec1, sec2)
    S1, S2 = s_values(fam, aux, sec1, sec2)
    nan = float("nan")
    d01 = -d00**2 * S2 if S2 is not None else nan
    d10 = d00 * lam * S1 if S1 is not None else nan
    d11 = -2 * d00**2 * lam * S1 * S2 if S1 is not None and S2 is not None else nan
    reasons = {}
    for k, fn in (("d01", excl_d01), ("d10", excl_d10), ("d11", excl_d11)):
        r = fn(lam)
        if r:
            reasons[k] = r
    valid = {k: k not in reasons and np.isfinite(v)
             for k, v in (("d00", d00), ("d01", d01), ("d10", d10), ("d11", d11))}
    return DulacMapCoeffs(d00, d01, d10, d11, lam, valid, reasons)


def time_coeffs(fam, aux, sec1, sec2):
    n1, n2 = fam.n1, fam.n2
    if n1 == 0 and n2 == 0:
        raise ValueError("time coefficients need n != (0, 0)")
    lam = fam.lam
    nan = float("nan")
    s111, s112, s120, s121, s122 = (sec1.d(1, 1), sec1.d(1, 2), sec1.d(2, 0),
                                    sec1.d(2, 1), sec1.d(2, 2))
    s210, s211, s212, s221 = sec2.d(1, 0), sec2.d(1, 1), sec2.d(1, 2), sec2.d(2, 1)
    d00 = delta00(fam, aux, sec1, sec2)
    S1, S2 = s_values(fam, aux, sec1, sec2)
    L1 = aux.L1(s120)
    L2 = aux.L2(s210)
    P1z = poly_eval(fam.P1, s210, 0.0)
    P2z = poly_eval(fam.P2, 0.0, s120)

    A1hat = _hat(aux.A1, n1 / lam - n2, s120)
    t_n10 = -s111**n1 * s120**n2 / L1**n1 * A1hat
    t_0n2 = d00**n2 * s210**n1 * s221**n2 / L2**n2 * _hat(aux.A2, n2 * lam - n1, s210)

    B1 = _get(aux, "B1")
    if B1 is not None and (n1 == 0 or S1 is not None):
        sa = n1 * S1 / L1**n1 * A1hat if n1 else 0.0
        t_n1p1_0 = -s111**n1 * s120**n2 * (
            s121 / (s120 * P2z) + sa
            + s111 / L1 ** (n1 + 1) * _hat(B1, (n1 + 1) / lam - n2, s120))
    else:
        t_n1p1_0 = nan

    B2 = _get(aux, "B2")
    if B2 is not None:
        t_0_n2p1 = d00 ** (n2 + 1) * s210**n1 * s221**n2 * (
            s211 / (s210 * P1z)
            + s221 / L2 ** (n2 + 1) * _hat(B2, lam * (n2 + 1) - n1, s210))
    else:
        t_0_n2p1 = nan

    t_20 = t_02 = None
    if n1 == 0:
        C1 = _get(aux, "C1")
        if C1 is not None and B1 is not None and S1 is not None:
            ax = aux.ax1
            dP2 = poly_eval(fam.P2.diff(2), 0.0, s120)
            d2inv = -dP2 / P2z**2
            d1inv = float(ax.d_inv_b(s120))
            t_20 = -s120**n2 * (
                (s122 * s120 + (n2 - 1) * s121**2) / (2 * s120**2 * P2z)
                + s121**2 / (2 * s120) * d2inv
                + s121 * s111 / s120 * d1inv
                + s111**2 / (2 * L1**2) * _hat(C1, 2 / lam - n2, s120)
                + s111 * S1 / L1 * _hat(B1, 1 / lam - n2, s120))
        else:
            t_20 = nan
    if n2 == 0:
        C2 = _get(aux, "C2")
        if C2 is not None and S2 is not None:
            ax = aux.ax2
            dP1 = poly_eval(fam.P1.diff(1), s210, 0.0)
            d1inv = -dP1 / P1z**2
            d2inv = float(ax.d_inv_b(s210))
            Z = ((s212 * s210 + (n1 - 1) * s211**2) / (2 * s210**2 * P1z)
                 + s211**2 / (2 * s210) * d1inv
                 + s211 * s221 / s210 * d2inv)
            t_02 = d00**2 * s210**n1 * (
                Z + s221**2 / (2 * L2**2) * _hat(C2, 2 * lam - n1, s210)
                - s211 * S2 / (2 * s210 * P1z))
        else:
            t_02 = nan

    out = DulacTimeCoeffs((n1, n2), lam, t_n10, t_0n2, t_n1p1_0, t_0_n2p1, t_20, t_02)
    checks = {"t_n10": excl_t_n10, "t_0n2": excl_t_0n2, "t_n1p1_0": excl_t_n1p1_0,
              "t_0_n2p1": excl_t_0n2p1, "t_20": excl_t_20, "t_02": excl_t_02}
    for k in out.names():
        r = checks[k](lam, (n1, n2))
        if r:
            out.reasons[k] = r
        out.valid[k] = r is None and bool(np.isfinite(getattr(out, k)))
    return out


def omega_factor(j, fam, aux, sec1, sec2):
    """Omega_{1j} = (j + 1) lam S1, the first-order factorization coefficient."""
    S1, _ = s_values(fam, aux, sec1, sec2)
    if S1 is None:
        raise ResonantLambda(f"S1 undefined at lambda = {fam.lam!r}")
    return (j + 1) * fam.lam * S1


def t1j_via_factorization(j, t0j, fam, aux, sec1, sec2):
    """T_{1j} = Omega_{1,j-1} T_{0j} = j lam S1 T_{0j}."""
    from .resonance import as_rational, lambda_in_D
    if j < 1:
        raise ValueError("j must be >= 1")
    lam = fam.lam
    if excl_d10(lam):
        raise ResonantLambda("lambda in 1/N")
    r = as_rational(lam)
    if r is not None and lambda_in_D(1, j, (fam.n1, fam.n2), r):
        raise ResonantLambda(f"lambda in the exclusion set of T(1,{j})")
    return omega_factor(j - 1, fam, aux, sec1, sec2) * t0j


def time_coefficient(i, j, fam, aux, sec1, sec2, tc=None):
    """T_ij for the indices with a closed form; KeyError otherwise."""
    tc = tc or time_coeffs(fam, aux, sec1, sec2)
    table = tc.by_index()
    if (i, j) in table:
        return table[(i, j)]
    if i == 1 and j >= 1 and (0, j) in table and fam.n1 <= 1:
        S1, _ = s_values(fam, aux, sec1, sec2)
        if S1 is None:
            return float("nan")
        return j * fam.lam * S1 * table[(0, j)]
    raise KeyError(f"no closed form for T({i},{j}) with n = ({fam.n1}, {fam.n2})")
