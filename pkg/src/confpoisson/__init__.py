"""Poisson transforms for degenerate boundary value problems on the
Euclidean half-space and the Heisenberg group, with numerical checks of
their identities."""

from .params import ModelParams, ParameterRangeError, euclidean, heisenberg
from .specfun import (AccuracyError, DivergenceError, ModelConstants, PoleError, c_heis, c_real,
                      eigenvalue, gamma_fn, gauss_2f1, gegenbauer, gegenbauer_two_var, iso_heis,
                      iso_real, lp_bound, model_constants, pochhammer)
from .euclid_field import (GridField, SpectralField, apply_delta_a, dft, idft, lp_norm,
                           sobolev_norm, trace_restrict)
from .euclid_poisson import (BoundaryData, ToleranceNotMet, boundary_op_real, continuous_family_real,
                             higher_poisson_real, kinv_solution_real, poisson_multiplier_real,
                             poisson_transform_real)
from .heis_core import apply_L_a, heis_inv, heis_mul, koranyi_norm
from .heis_poisson import (HeisBoundaryData, heis_poisson_transform, higher_poisson_heis,
                           isometry_weight_ratio, kinv_solution_heis, partial_trace_factor,
                           radial_coeffs, recursion_residual)
from .juhl import JuhlOperator, from_sexpr, juhl_apply, juhl_build, restrict_D_ak, to_sexpr
from .checks import CHECKS, CRITERIA, CheckRecord, SuiteConfig, VerificationReport, run_suite

__version__ = "0.1.0"
