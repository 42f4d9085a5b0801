"""Barycentric interpolation at Chebyshev points of the second kind, with a
pair-precision oracle for studying node-rounding errors."""

from .binned import (BinLayout, BinnedGrid, eval_binned, gen_binned_nodes, layout_dyadic,
                     layout_three, locate_bin, parse_layout, verify_layout)
from .cheb_core import (Grid, WeightVector, first_formula_eval, gen_nodes_ext, gen_nodes_usual,
                        lebesgue_estimate, normalized_lambda, rho_estimate, salzer_grid,
                        salzer_weights, second_formula_eval)
from .error_model import (BoundReport, RoundedGrid, ZVector, binned_grid, bn_compute, bound_suite,
                          compute_z, error_poly_E, r_row, usual_grid, z_from_r, z_stats)
from .errors import ConstructionError, DomainError, RangeError, StepOneCritical, UsageError
from .extprec import DDArray, ExtReal, ext_add, ext_div, ext_mul, ext_sincos, ext_sub, ext_to_double
from .harness import build_test_set, measure_errors

__version__ = "0.1.0"
