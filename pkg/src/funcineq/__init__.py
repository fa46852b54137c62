"""Numerical checks for transport-entropy, infimum-convolution and
reverse-Hölder inequalities on finite metric-measure spaces."""

from .convex import (ConvexProfile, biconjugate_check, compose, conjugate_of_composition,
                     generalized_inverse, grid_profile, identity, legendre, linear_offset,
                     parse_profile, phi1_scaled, quadratic)
from .functionals import (entropy, extract_one_sided_profile, log_lp_norm, lp_norm,
                          moment_log_derivative_check, negative_moment_reflection_check)
from .infconv import ic_check, ic_reduction_check, ic_to_concentration, inf_convolve
from .reverse_holder import (estimate_poincare_discrete, exp_nontight_constants,
                             herbst_ls_constant, rh_verify, thm_1_1_constant, thm_Lb_bound,
                             thm_main_constant, thm_poincare_constant)
from .space import (MetricMeasureSpace, ScalarField, discretize_line, load_space, product_space,
                    random_space, validate_space)
from .transport import relative_entropy, te_check, wasserstein

__version__ = "0.1.0"
