"""Asymptotics of the Dulac map and Dulac time of an unfolded hyperbolic saddle."""

from .algebra import Jet, Poly2, poly_axis_jet, poly_eval
from .coefficients import delta_coeffs, time_coefficient, time_coeffs
from .expansion import (CompensatorPoly, Expansion, dulac_map_principal, dulac_time_principal,
                        eval_expansion, monomial_order, omega_eval)
from .mellin import SmoothFn, mellin_hat
from .regular import RegularField, RegularSection, regular_map_coeffs, regular_time_coeffs
from .resonance import ResonantRational, a_set, grid_B, lambda_in_D, parse_lambda0, residue
from .saddle import SaddleFamily, Section, build_aux, s_values

__version__ = "0.1.0"
