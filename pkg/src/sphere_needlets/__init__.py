"""Classical and generalised needlet approximation on the unit sphere.

Submodules: ``sphere_core`` (Legendre polynomials, harmonics), ``filters``,
``cubature``, ``kernels`` (Sobolev kernels, worst-case errors), ``needlet``,
``bj_analysis`` (error-budget constants) and ``experiments``.
"""

from .bj_analysis import BjRequest, BjResult, bj_asymptotic, bj_exact, bj_quadrature, error_budget, s_m_kernel
from .cubature import (
    CubatureRule,
    bauer_spiral,
    equal_area_points,
    exactness_defect,
    gl_product_rule,
    load_pointset,
    needlet_rule_for_level,
    random_points,
    verified_precision,
)
from .errors import SphereNeedletError
from .experiments import (
    ErrorReport,
    RunConfig,
    TestFunction,
    fit_convergence_order,
    franke,
    l2_error,
    run_experiment,
    wendland_phi,
    wendland_sum,
)
from .filters import Filter, build_filter, level_weights, verify_partition_of_unity
from .kernels import KernelSpec, SobolevParams, kernel_eval, strength_estimate, wce_squared, worst_case_error
from .needlet import (
    CoefficientSet,
    NeedletLevel,
    NeedletScheme,
    compute_coefficients,
    evaluate_approximation,
    lambda_kernel,
    load_coefficients,
    make_scheme,
    needlet_value,
    save_coefficients,
)
from .sphere_core import (
    harmonic_space_dim,
    legendre_P,
    poly_space_dim,
    proj_kernel,
    real_spherical_harmonic,
)

__version__ = "0.1.0"
