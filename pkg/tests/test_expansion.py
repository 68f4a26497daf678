"""Principal parts: case selection, ordering, grids and resonant assembly."""

import math
from fractions import Fraction

import numpy as np
import pytest

from dulac.expansion import (CaseNotMatched, CompensatorPoly, Expansion, LOutOfRange,
                             NonpositiveS, OrderTie, Term, UnsupportedFamily,
                             dulac_map_principal, dulac_time_principal, eval_expansion,
                             monomial_order, omega_eval)
from dulac.oracle import sample_dulac
from dulac.resonance import ResonantRational, a_set, grid_B
from dulac.algebra import Poly2
from dulac.saddle import SaddleFamily, Section

from conftest import SEC1, SEC2, family_a, family_b, family_res, fix_lin

DEF1, DEF2 = Section.default(1), Section.default(2)


def _resonant_family(lam):
    return SaddleFamily(Poly2({(0, 0): 1.0, (1, 0): 0.1, (0, 1): 0.25, (1, 1): 0.15}),
                        Poly2({(0, 0): -lam, (1, 0): -0.3, (0, 1): -0.2, (0, 2): -0.1,
                               (1, 1): 0.05}), 0, 1)


def test_omega_eval():
    assert omega_eval(math.e ** -1, 0.0) == pytest.approx(1.0, rel=1e-15)
    assert omega_eval(0.25, 0.5) == pytest.approx((0.25**-0.5 - 1) / 0.5, rel=1e-14)
    # continuous through alpha = 0
    s = 0.03
    assert omega_eval(s, 1e-8) == pytest.approx(-math.log(s), rel=1e-7)
    assert omega_eval(s, 2e-6) == pytest.approx((s**-2e-6 - 1) / 2e-6, rel=1e-10)
    with pytest.raises(NonpositiveS):
        omega_eval(0.0, 0.3)


def test_fix_lin_map():
    e = dulac_map_principal(fix_lin(0.5), None, DEF1, DEF2, 0.5, 1.2)
    assert e.case.startswith("map(1)")
    coeffs = {(t.i, t.j): t.coeff for t in e.terms}
    assert coeffs[(0, 0)] == pytest.approx(1.0, rel=1e-10)
    assert abs(coeffs[(0, 1)]) < 1e-10
    assert eval_expansion(e, 0.04) == pytest.approx(0.2, rel=1e-10)


def test_fix_lin_time():
    e = dulac_time_principal(fix_lin(0.2, 0, 2), None, DEF1, DEF2, 0.2, 0.6)
    assert e.case == "time(1)"
    coeffs = {(t.i, t.j): t.coeff for t in e.terms}
    assert set(coeffs) == {(0, 0), (0, 2), (0, 3)}
    assert coeffs[(0, 2)] == pytest.approx(-2.5, rel=1e-10)


def test_monomial_order():
    lam0 = ResonantRational(1, 1)
    # s^lam precedes s^(1+lam) omega, which precedes s^(1+lam)
    assert monomial_order((0, 0, 0), (1, 0, 1), lam0) == -1
    assert monomial_order((1, 0, 1), (1, 0, 0), lam0) == -1
    assert monomial_order((0, 1, 0), (1, 0, 1), lam0) == 1
    assert monomial_order((0, 0, 0), (0, 2, 0), 0.3) == -1
    with pytest.raises(OrderTie):
        monomial_order((1, 0, 0), (0, 1, 0), lam0)


def test_terms_follow_exponent_order():
    e = dulac_time_principal(family_b(0.9), None, SEC1, SEC2, 0.9, 2.2)
    keys = [(t.i, t.j, 0) for t in e.terms]
    for a, b in zip(keys, keys[1:]):
        assert monomial_order(a, b, 0.9) == -1


@pytest.mark.parametrize("lam0,lo,hi", [(0.4, 0.8, 1.2), (1.5, 2.5, 3.0), (3.0, 4.0, 5.0)])
def test_map_case_ranges(lam0, lo, hi):
    fam = fix_lin(lam0)
    e = dulac_map_principal(fam, None, DEF1, DEF2, lam0, lo)
    assert e.L_range == pytest.approx((lo, hi))
    with pytest.raises(LOutOfRange):
        dulac_map_principal(fam, None, DEF1, DEF2, lam0, hi)
    with pytest.raises(LOutOfRange):
        dulac_map_principal(fam, None, DEF1, DEF2, lam0, lo - 0.01)


def test_time_case_ranges():
    n2 = 2

    def fam(lam0):
        return fix_lin(float(Fraction(lam0)), 0, n2)

    e = dulac_time_principal(fam("1/3"), None, DEF1, DEF2, "1/3", 1.0)
    assert e.case == "time(5)"
    assert e.L_range == pytest.approx((1.0, 4 / 3))
    e = dulac_time_principal(fam("1/2"), None, DEF1, DEF2, "1/2", 1.5)
    assert e.case == "time(6)"
    e = dulac_time_principal(fam("2/3"), None, DEF1, DEF2, "2/3", 2.0)
    assert e.case == "time(7)"
    assert e.L_range == pytest.approx((2.0, min(8 / 3, 7 / 3)))
    e = dulac_time_principal(fam("1/1"), None, DEF1, DEF2, "1/1", 2.0)
    assert e.case == "time(9)"
    with pytest.raises(LOutOfRange):
        dulac_time_principal(fam("1/3"), None, DEF1, DEF2, "1/3", 4 / 3)


def test_unmatched_and_unsupported():
    # a float exactly at a resonance is not accepted as that resonance
    with pytest.raises(CaseNotMatched):
        dulac_map_principal(fix_lin(1.0), None, DEF1, DEF2, 1.0, 2.5)
    with pytest.raises(CaseNotMatched):
        dulac_time_principal(fix_lin(1 / 3, 0, 2), None, DEF1, DEF2, 1 / 3, 1.1)
    with pytest.raises(UnsupportedFamily):
        dulac_time_principal(fix_lin(0.5, 1, 1), None, DEF1, DEF2, 0.5, 1.0)
    with pytest.raises(NonpositiveS):
        eval_expansion(dulac_map_principal(fix_lin(0.5), None, DEF1, DEF2, 0.5, 1.2), -0.1)


@pytest.mark.parametrize("kind,n2,lam0,L", [
    ("map", 1, "1/1", 2.5), ("time", 1, "1/2", 1.2), ("time", 2, "1/3", 1.1),
    ("time", 2, "1/2", 1.6), ("time", 2, "2/3", 2.1), ("time", 1, "1/1", 2.5),
    ("time", 2, "1/1", 2.2), ("time", 1, "2/1", 2.5)])
def test_grid_consistency(kind, n2, lam0, L):
    """Kept and absorbed points together are exactly the grid."""
    r = ResonantRational.of(Fraction(lam0))
    fam = fix_lin(r.value, 0, n2)
    if kind == "map":
        e = dulac_map_principal(fam, None, DEF1, DEF2, lam0, L)
        grid = grid_B(r, Fraction(repr(L)) - r.frac, (0, 0))
        k = (0, 0)
    else:
        e = dulac_time_principal(fam, None, DEF1, DEF2, lam0, L)
        grid = grid_B(r, Fraction(repr(L)), (0, n2))
        k = (0, n2)
    assert e.grid_points() == set(grid)
    for t in e.terms:
        A = a_set(t.i, t.j, r, k)
        assert A
        if isinstance(t.coeff, CompensatorPoly):
            assert t.coeff.degree == max(A)
            assert len(t.absorbs) == len(A) - 1


def test_compensator_term_value():
    # one compensator term [0, 1] with alpha = 0 at (1, 0): s * omega(s; 0) = s ln(1/s)
    e = Expansion(0.7, "time", [Term(1, 0, CompensatorPoly(0.0, [0.0, 1.0]))],
                  ResonantRational(1, 1), 1.5, "manual", (1.0, 2.0))
    assert eval_expansion(e, 0.1) == pytest.approx(0.1 * math.log(10.0), rel=1e-14)


def test_resonant_map_table_and_meta():
    e = dulac_map_principal(_resonant_family(1.0), None, SEC1, SEC2, "1/1", 2.5)
    assert e.case.startswith("map(2)")
    comp = [t for t in e.terms if isinstance(t.coeff, CompensatorPoly)]
    assert len(comp) == 1 and (comp[0].i, comp[0].j) == (1, 0)
    assert comp[0].absorbs == ((0, 1),)
    assert comp[0].coeff.alpha == 0.0
    assert len(e.meta["residues"]) == 1 and e.meta["residues"][0]["target"] == "d01"
    rows = e.table()
    assert [r[:3] for r in rows] == [(0, 0, 0), (1, 0, 0), (1, 0, 1)]
    assert rows[-1][5] == pytest.approx(2.0)


def test_resonant_principal_parts_match_flow():
    fam = family_res(1.0)
    e = dulac_map_principal(fam, None, DEF1, DEF2, "1/1", 2.5)
    for s in (0.02, 0.05):
        D = sample_dulac(fam, DEF1, DEF2, [s])[0].D
        assert eval_expansion(e, s) == pytest.approx(D, rel=1e-3)
    fam = family_res(0.5)
    e = dulac_time_principal(fam, None, DEF1, DEF2, "1/2", 1.2)
    assert e.case == "time(5)"
    for s in (0.02, 0.05):
        T = sample_dulac(fam, DEF1, DEF2, [s])[0].T
        assert eval_expansion(e, s) == pytest.approx(T, rel=1e-3)


@pytest.mark.parametrize("kind,lam0,L,n2", [("map", "1/1", 2.5, 1), ("time", "1/2", 1.2, 1),
                                            ("time", "1/3", 1.1, 2)])
def test_continuity_across_resonance(kind, lam0, L, n2):
    r = ResonantRational.of(Fraction(lam0))
    s = 0.05
    build = dulac_map_principal if kind == "map" else dulac_time_principal

    def value(lam):
        fam = _resonant_family(lam) if n2 == 1 else family_b(lam)
        return eval_expansion(build(fam, None, SEC1, SEC2, lam0, L), s)

    v0 = value(r.value)
    for h in (1e-4, -1e-4):
        assert value(r.value + h) == pytest.approx(v0, rel=1e-3)


def test_non_resonant_values_match_closed_forms():
    fam = family_a(0.618)
    e = dulac_map_principal(fam, None, SEC1, SEC2, 0.618, 1.3)
    assert all(not isinstance(t.coeff, CompensatorPoly) for t in e.terms)
    s = np.array([0.01, 0.02])
    assert np.all(np.isfinite(eval_expansion(e, s)))
