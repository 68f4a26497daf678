"""Regular transitions along y = 0: closed forms against the ODE oracle."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dulac.algebra import Poly2
from dulac.regular import (NoConnection, OutsideDomain, RegularField, RegularSection,
                           regular_map_coeffs, regular_oracle, regular_time_coeffs,
                           regular_transition, transport_H)

F_GEN = Poly2({(0, 0): 1.0, (1, 0): 0.3, (0, 1): 0.4, (0, 2): 0.2, (1, 1): -0.1})
H_GEN = Poly2({(0, 0): 0.2, (1, 0): 0.5, (0, 1): 0.7, (1, 1): 0.3, (0, 2): -0.2})
XI = RegularSection([0.1, 0.3, 0.2], [0.0, 1.2, 0.4])
ZETA = RegularSection([0.9, -0.2, 0.1], [0.0, 0.8, -0.3])


def _vertical(x0):
    return RegularSection([x0], [0.0, 1.0])


FIELDS = [
    ("ell0", RegularField(0, F_GEN, H_GEN)),
    ("ell1", RegularField(1, F_GEN, H_GEN)),
    ("ell2", RegularField(2, F_GEN, H_GEN)),
    ("ell0_b", RegularField(0, Poly2({(0, 0): 2.0, (1, 0): -0.4, (0, 1): 0.3, (2, 0): 0.1}),
                            Poly2({(0, 0): -0.3, (1, 0): 0.2, (0, 1): -0.5, (0, 2): 0.4}))),
]


def test_trivial_field():
    field = RegularField(0, Poly2({(0, 0): 1.0}), Poly2({}))
    xi, zeta = _vertical(0.2), _vertical(1.0)
    assert regular_map_coeffs(field, xi, zeta) == pytest.approx((1.0, 0.0), abs=1e-15)
    T0, T1, T2 = regular_time_coeffs(field, xi, zeta)
    assert (T0, T1, T2) == pytest.approx((0.8, 0.0, 0.0), abs=1e-14)


def test_constant_h():
    c = 0.7
    field = RegularField(1, Poly2({(0, 0): 1.0}), Poly2({(0, 0): c}))
    xi, zeta = _vertical(0.0), _vertical(1.5)
    p1, p2 = regular_map_coeffs(field, xi, zeta)
    assert p1 == pytest.approx(math.exp(1.5 * c), rel=1e-14)
    assert p2 == pytest.approx(0.0, abs=1e-14)
    assert transport_H(field, 1.5, 0.0) == pytest.approx(math.exp(1.5 * c), rel=1e-14)
    # T = int s e^(c x) dx, so T~(0) = (e^(1.5 c) - 1)/c
    T0, T1, T2 = regular_time_coeffs(field, xi, zeta)
    assert T0 == pytest.approx(math.expm1(1.5 * c) / c, rel=1e-13)
    assert T1 == pytest.approx(0.0, abs=1e-14)
    assert T2 is None


@pytest.mark.parametrize("name,field", FIELDS, ids=[f[0] for f in FIELDS])
def test_closed_forms_match_oracle(name, field):
    o = regular_oracle(field, XI, ZETA)
    p1, p2 = regular_map_coeffs(field, XI, ZETA)
    T0, T1, T2 = regular_time_coeffs(field, XI, ZETA)
    assert p1 == pytest.approx(o["p1"], rel=1e-5)
    assert p2 == pytest.approx(o["p2"], rel=1e-5)
    assert T0 == pytest.approx(o["Tt0"], rel=1e-5)
    assert T1 == pytest.approx(o["Tt1"], rel=1e-5)
    if field.ell == 0:
        assert T2 == pytest.approx(o["T2"], rel=1e-5)


def test_second_time_coefficient_variant():
    """Doubling the zeta11 p2 term of T''(0) disagrees with the oracle."""
    field = FIELDS[0][1]
    o = regular_oracle(field, XI, ZETA)
    _, _, T2 = regular_time_coeffs(field, XI, ZETA)
    _, _, T2_alt = regular_time_coeffs(field, XI, ZETA, t2_factor=2)
    assert T2 == pytest.approx(o["T2"], rel=1e-5)
    assert abs(T2_alt - o["T2"]) > 1e-2 * abs(o["T2"])


def test_composition():
    """P for xi -> eta -> zeta is the composition; ell = 0 times add."""
    field = FIELDS[0][1]
    eta = RegularSection([0.5, 0.1], [0.0, 1.1, 0.2])
    a1, a2 = regular_map_coeffs(field, XI, eta)
    b1, b2 = regular_map_coeffs(field, eta, ZETA)
    p1, p2 = regular_map_coeffs(field, XI, ZETA)
    assert p1 == pytest.approx(b1 * a1, rel=1e-12)
    assert p2 == pytest.approx(b2 * a1**2 + b1 * a2, rel=1e-10)
    t_a = regular_time_coeffs(field, XI, eta)[0]
    t_b = regular_time_coeffs(field, eta, ZETA)[0]
    assert regular_time_coeffs(field, XI, ZETA)[0] == pytest.approx(t_a + t_b, rel=1e-12)


def test_transport_against_variational_equation():
    field = FIELDS[0][1]
    sol = solve_ivp(lambda x, v: field.h(x, 0.0) * v, (0.1, 1.3), [1.0], method="DOP853",
                    rtol=1e-13, atol=1e-15)
    assert transport_H(field, 1.3, 0.1) == pytest.approx(sol.y[0, -1], rel=1e-11)
    assert transport_H(field, 0.1, 1.3) * transport_H(field, 1.3, 0.1) == pytest.approx(1.0)


def test_transition_at_zero_section_point():
    field = FIELDS[0][1]
    P, T = regular_transition(field, XI, ZETA, 0.0)
    assert P == pytest.approx(0.0, abs=1e-14)
    assert T == pytest.approx(regular_time_coeffs(field, XI, ZETA)[0], rel=1e-10)


def test_errors():
    field = FIELDS[0][1]
    with pytest.raises(NoConnection):
        regular_map_coeffs(field, ZETA, XI)
    with pytest.raises(OutsideDomain):
        regular_map_coeffs(field, XI, _vertical(3.0))
    with pytest.raises(ValueError):
        RegularSection([0.0], [0.1, 1.0])
    with pytest.raises(ValueError):
        RegularSection([0.0], [0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        RegularField(0, Poly2({(1, 0): 1.0}), Poly2({}))
    with pytest.raises(ValueError):
        RegularField(-1, Poly2({(0, 0): 1.0}), Poly2({}))
