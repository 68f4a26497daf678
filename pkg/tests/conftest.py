import pytest

from dulac.algebra import Poly2
from dulac.saddle import SaddleFamily, Section

SEC1 = Section(1, [0.0, 0.8, 0.1], [0.9, 0.05])
SEC2 = Section(2, [1.1, 0.1], [0.0, 0.7, 0.05])


def fix_lin(lam, n1=0, n2=1):
    return SaddleFamily(Poly2({(0, 0): 1.0}), Poly2({(0, 0): -lam}), n1, n2)


def fix_nl(lam, n1=0, n2=1):
    """P1 = 1, P2 = -lam (1 + x1 + x2)."""
    return SaddleFamily(Poly2({(0, 0): 1.0}),
                        Poly2({(0, 0): -lam, (1, 0): -lam, (0, 1): -lam}), n1, n2,
                        I1=(-0.5, 0.9), I2=(-0.5, 0.9))


def family_a(lam, n1=0, n2=1):
    return SaddleFamily(Poly2({(0, 0): 1.0, (0, 1): 0.2}),
                        Poly2({(0, 0): -lam, (1, 0): -0.3, (0, 1): -0.2}), n1, n2)


def family_b(lam, n1=0, n2=2):
    return SaddleFamily(Poly2({(0, 0): 1.0, (1, 0): 0.1, (0, 1): 0.25, (1, 1): 0.15}),
                        Poly2({(0, 0): -lam, (1, 0): -0.3, (0, 1): -0.2, (0, 2): -0.1, (1, 1): 0.05}),
                        n1, n2)


def family_c(lam, n1=1, n2=1):
    return SaddleFamily(Poly2({(0, 0): 1.0, (1, 0): -0.2, (0, 1): 0.3}),
                        Poly2({(0, 0): -lam, (1, 0): 0.25, (0, 1): -0.15, (2, 0): 0.1}), n1, n2)


@pytest.fixture
def sections():
    return SEC1, SEC2


@pytest.fixture
def default_sections():
    return Section.default(1), Section.default(2)


def family_res(lam, n1=0, n2=1, scale=0.5):
    """family_b's nonlinear part scaled down, for checks at s up to 0.05."""
    p1 = {(0, 0): 1.0, (1, 0): 0.1, (0, 1): 0.25, (1, 1): 0.15}
    p2 = {(1, 0): -0.3, (0, 1): -0.2, (0, 2): -0.1, (1, 1): 0.05}
    return SaddleFamily(Poly2({k: (v if k == (0, 0) else scale * v) for k, v in p1.items()}),
                        Poly2({(0, 0): -lam, **{k: scale * v for k, v in p2.items()}}), n1, n2)
