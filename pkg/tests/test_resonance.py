"""Lattice combinatorics (exact) and pole residues against punctured extrapolation."""

import math
import random
from fractions import Fraction

import pytest

from dulac.mellin import NotAPole
from dulac.resonance import (ResonantRational, a_set, coefficient_value, grid_B, in_lambda, lambda_in_D,
                             lambda_in_D_L, parse_lambda0, pole_order_bound,
                             punctured_residue, residue, residue_table)
from dulac.algebra import Poly2
from dulac.saddle import SaddleFamily

from conftest import SEC1, SEC2

RATIOS = [ResonantRational(p, q) for p in range(1, 21) for q in range(1, 21)
          if math.gcd(p, q) == 1]


def _in(lam, numerators, denominators):
    return any(lam * m == i for i in numerators for m in denominators)


def _naturals_from(a):
    # lam > 0, so N_{>=0} behaves like N
    return range(max(a, 1), 500)


def _members(ij, k):
    return {r for r in RATIOS if lambda_in_D(*ij, k, r)}


def _expected(pred):
    return {r for r in RATIOS if pred(r.frac)}


# ---------------------------------------------------------------------------
# explicit collision sets

def test_map_collision_sets():
    k = (0, 0)
    assert _members((0, 0), k) == set()
    assert _members((0, 1), k) == _expected(lambda l: l.denominator == 1)
    assert _members((1, 0), k) == _expected(lambda l: l.numerator == 1)
    assert _members((1, 1), k) == _expected(lambda l: l.denominator == 1 or l.numerator == 1)


@pytest.mark.parametrize("n1", range(4))
@pytest.mark.parametrize("n2", range(4))
def test_time_collision_sets(n1, n2):
    if (n1, n2) == (0, 0):
        pytest.skip("time coefficients need n != (0, 0)")
    n = (n1, n2)
    assert _members((0, 0), n) == set()
    assert _members((n1, 0), n) == _expected(
        lambda l: _in(l, range(1, n1 + 1), _naturals_from(n2)))
    assert _members((0, n2), n) == _expected(
        lambda l: n2 >= 1 and _in(l * n2, _naturals_from(n1), [1]))
    assert _members((n1 + 1, 0), n) == _expected(
        lambda l: _in(l, range(1, n1 + 2), _naturals_from(n2)))
    assert _members((0, n2 + 1), n) == _expected(
        lambda l: _in(l * (n2 + 1), _naturals_from(n1), [1]) or l.denominator == 1)
    if n1 == 0:
        assert _members((2, 0), n) == _expected(lambda l: _in(l, [2], _naturals_from(n2)))
    if n2 == 0:
        assert _members((0, 2), n) == _expected(lambda l: (2 * l).denominator == 1)


# ---------------------------------------------------------------------------
# grids and compensator sets of the worked cases

def _A(points, lam0, k):
    return {ij: a_set(*ij, lam0, k) for ij in points}


def test_map_cases():
    r = ResonantRational(1, 1)
    assert set(grid_B(r, 1, (0, 0))) == {(0, 0), (1, 0), (0, 1)}
    assert lambda_in_D_L(r, 1, (0, 0))
    assert _A([(0, 0), (1, 0), (0, 1)], r, (0, 0)) == {
        (0, 0): {0}, (1, 0): {0, 1}, (0, 1): set()}
    # lam0 < 1 and lam0 > 1 with L - lam0 inside the case ranges
    lam0 = ResonantRational(2, 5)
    assert set(grid_B(lam0, Fraction(4, 5) - lam0.frac + Fraction(1, 100), (0, 0))) == {(0, 0), (0, 1)}
    lam0 = ResonantRational(5, 2)
    assert set(grid_B(lam0, Fraction(1), (0, 0))) == {(0, 0), (1, 0)}


@pytest.mark.parametrize("n2", [1, 2, 3])
def test_time_case_non_resonant_grids(n2):
    n = (0, n2)
    # (1): lam0 in (0, 1/(n2+1)), L = lam0 (n2 + 1)
    lam0 = Fraction(1, 2 * (n2 + 1))
    assert set(grid_B(lam0, lam0 * (n2 + 1), n)) == {(0, 0), (0, n2), (0, n2 + 1)}
    # (4): lam0 > 2/n2, L = 2
    lam0 = Fraction(2, n2) + Fraction(1, 7)
    assert set(grid_B(lam0, 2, n)) == {(0, 0), (1, 0), (2, 0)}


@pytest.mark.parametrize("n2", [1, 2, 3])
def test_time_case_5(n2):
    n, r = (0, n2), ResonantRational(1, n2 + 1)
    B = grid_B(r, 1, n)
    assert set(B) == {(0, 0), (0, n2), (0, n2 + 1), (1, 0)}
    assert lambda_in_D_L(r, 1, n)
    assert _A(B, r, n) == {(0, 0): {0}, (0, n2): {0}, (1, 0): {0, 1}, (0, n2 + 1): set()}


@pytest.mark.parametrize("n2", [2, 3])
def test_time_case_6(n2):
    n, r = (0, n2), ResonantRational(1, n2)
    L = Fraction(n2 + 1, n2)
    B = grid_B(r, L, n)
    assert set(B) == {(0, 0), (1, 0), (0, n2), (0, n2 + 1)}
    assert _A(B, r, n) == {(0, 0): {0}, (1, 0): {0, 1}, (0, n2): set(), (0, n2 + 1): {0}}


@pytest.mark.parametrize("n2", [2, 3])
def test_time_case_7(n2):
    n, r = (0, n2), ResonantRational.of(Fraction(2, n2 + 1))
    d = math.gcd(2, n2 + 1)
    B = grid_B(r, 2, n)
    assert set(B) == {(0, 0), (1, 0), (0, n2), (2, 0), (0, n2 + 1)}
    # the set {0, d} sits on (2, 0); (0, n2 + 1) is absorbed into it
    assert _A(B, r, n) == {(0, 0): {0}, (1, 0): {0}, (0, n2): {0}, (2, 0): {0, d},
                           (0, n2 + 1): set()}


def test_time_case_8():
    n, r = (0, 1), ResonantRational(1, 1)
    B = grid_B(r, 2, n)
    assert set(B) == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}
    assert _A(B, r, n) == {(0, 0): {0}, (0, 1): set(), (0, 2): set(), (1, 1): set(),
                           (1, 0): {0, 1}, (2, 0): {0, 1, 2}}


@pytest.mark.parametrize("n2", [1, 2, 3])
def test_time_case_9(n2):
    n, r = (0, n2), ResonantRational.of(Fraction(2, n2))
    d = math.gcd(2, n2)
    B = grid_B(r, 2, n)
    assert set(B) == {(0, 0), (1, 0), (2, 0), (0, n2)}
    assert _A(B, r, n) == {(0, 0): {0}, (1, 0): {0}, (0, n2): set(), (2, 0): {0, d}}


# ---------------------------------------------------------------------------
# brute force on random instances

def _brute_in_D(i, j, k, lam):
    hi = i + lam * j
    for jj in range(int(hi / lam) + 2):
        for ii in range(int(hi) + 2):
            if (ii, jj) != (i, j) and in_lambda(ii, jj, k) and ii + lam * jj == hi:
                return True
    return False


def _brute_grid(lam, L, k):
    return {(i, j) for i in range(int(L) + 2) for j in range(int(L / lam) + 2)
            if in_lambda(i, j, k) and i + lam * j <= L}


def _brute_A(i, j, r, k):
    p, q = r.p, r.q
    if any(in_lambda(i + s * p, j - s * q, k) for s in range(1, j // q + 1)):
        return set()
    return {s for s in range(0, 60) if i - s * p >= 0 and in_lambda(i - s * p, j + s * q, k)}


def test_brute_force_equivalence():
    rng = random.Random(20240501)
    for _ in range(200):
        r = rng.choice(RATIOS)
        k = (rng.randint(0, 3), rng.randint(0, 3))
        i, j = rng.randint(0, 6), rng.randint(0, 6)
        L = Fraction(rng.randint(0, 60), rng.randint(1, 12))
        assert lambda_in_D(i, j, k, r) == _brute_in_D(i, j, k, r.frac)
        assert set(grid_B(r, L, k)) == _brute_grid(r.frac, L, k)
        if in_lambda(i, j, k):
            assert a_set(i, j, r, k) == _brute_A(i, j, r, k)
        assert lambda_in_D_L(r, L, k) == any(_brute_in_D(a, b, k, r.frac)
                                             for a, b in _brute_grid(r.frac, L, k))


def test_grid_sorted_by_exponent():
    B = grid_B(ResonantRational(2, 3), 4, (1, 2))
    e = [i + Fraction(2, 3) * j for i, j in B]
    assert e == sorted(e)


def test_pole_order_bound():
    assert pole_order_bound(1, 1, ResonantRational(1, 1)) == 2
    assert pole_order_bound(0, 3, ResonantRational(2, 3)) == 1
    assert pole_order_bound(2, 0, ResonantRational(2, 5)) == 1


# ---------------------------------------------------------------------------
# rationals

def test_resonant_rational_validation():
    with pytest.raises(ValueError):
        ResonantRational(2, 4)
    with pytest.raises(ValueError):
        ResonantRational(0, 1)
    with pytest.raises(ValueError):
        ResonantRational(-1, 2)
    assert ResonantRational.of(Fraction(4, 6)) == ResonantRational(2, 3)
    assert str(ResonantRational(3, 7)) == "3/7"


def test_parse_lambda0():
    assert parse_lambda0("1/1") == ResonantRational(1, 1)
    assert parse_lambda0("2/4") == ResonantRational(1, 2)
    assert parse_lambda0("3") == ResonantRational(3, 1)
    assert parse_lambda0(" 5/3 ") == ResonantRational(5, 3)
    assert parse_lambda0("0.618") == 0.618
    assert parse_lambda0(1.0) == 1.0
    assert isinstance(parse_lambda0(1.0), float)


# ---------------------------------------------------------------------------
# residues

def _family(n1, n2):
    return SaddleFamily(Poly2({(0, 0): 1.0, (1, 0): 0.1, (0, 1): 0.2, (1, 1): 0.15}),
                        Poly2({(0, 0): -0.5, (1, 0): -0.3, (0, 1): -0.2, (0, 2): -0.1,
                               (1, 1): 0.05}), n1, n2)


RESIDUE_CASES = [((0, 1), "1"), ((0, 1), "1/2"), ((1, 1), "2"), ((1, 2), "1/2"),
                 ((0, 2), "1/3"), ((2, 1), "2/3")]


@pytest.mark.parametrize("n,lam0", RESIDUE_CASES)
def test_derived_residues_match_extrapolation(n, lam0):
    rows = residue_table(_family(*n), SEC1, SEC2, parse_lambda0(lam0), variant="derived")
    assert rows
    for target, order, bound, value, rich, rel in rows:
        assert order <= bound, target
        if rel is not None:
            assert rel < 1e-3, (target, value, rich)


@pytest.mark.parametrize("n,lam0", RESIDUE_CASES)
def test_order_never_exceeds_bound(n, lam0):
    for target, order, bound, *_ in residue_table(_family(*n), SEC1, SEC2,
                                                  parse_lambda0(lam0), check=False):
        assert order <= bound, target


def test_d11_double_pole_at_one():
    fam = _family(0, 1)
    order, value = residue("d11", ResonantRational(1, 1), fam, None, SEC1, SEC2)
    assert order == 2
    rich, diff = punctured_residue("d11", 1.0, fam, SEC1, SEC2, 2)
    assert abs(value - rich) <= 1e-3 * abs(rich)
    # one-sided: (lam - 1) d11 grows like 1/h, so a simple pole is ruled out
    g = [h * coefficient_value("d11", fam.with_lambda(1.0 + h), SEC1, SEC2) for h in (1e-2, 1e-3)]
    assert 8 < abs(g[1] / g[0]) < 12


def test_residue_rejects_non_poles():
    fam = _family(0, 1)
    with pytest.raises(NotAPole):
        residue("d01", ResonantRational(1, 2), fam, None, SEC1, SEC2)
    with pytest.raises(NotAPole):
        residue("d01", 0.61803398875, fam, None, SEC1, SEC2)
