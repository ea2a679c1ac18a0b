"""Counting model resonances of radial potentials in odd dimensions."""

from .bound import BoundConfig, bound_report, i_l, mu_star, stefanov_sum
from .counting import (
    CountingTable,
    FitReport,
    c_d,
    dim_harmonics,
    fit_residual_exponent,
    h_d,
    integrate_count,
    model_count,
    model_table,
    smooth_exponent_transfer,
    weyl_sum,
    weyl_table,
)
from .errors import (
    BoundaryZeroError,
    ConvergenceError,
    DegenerateFitError,
    DomainError,
    InsufficientDataError,
    NonIntegerError,
    PrecisionWarning,
    QuadratureError,
    RescountError,
    StripEscapeError,
)
from .geometry import RhoPoint, StripIndex, kplus_boundary_arc, rho, rho_inverse, strip, zeta
from .model import F, m_minus, n_minus, n_plus, rho_star, solve_rho, z_hat
from .modes import ModeIndex
from .special import airy_ai, airy_ai_prime, bessel_envelope, bessel_j_uniform
from .zeros import ContourSpec, bessel_zeros_scaled, count_zeros_argument_principle, m_plus

__version__ = "0.1.0"
