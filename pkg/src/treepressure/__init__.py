"""Numerical laboratory for tree pressure of smooth interval maps.

Builds preimage trees of multimodal interval maps, folds exponential
Birkhoff weights over them in log domain, and cross-checks the resulting
pressure estimates against spectral and periodic-orbit oracles, with
support for log-singular potentials, coboundary identities and
exceptional-set detection.
"""

from .errors import (
    ConvergenceError,
    DepthCapError,
    MapDomainError,
    OrbitEscapeError,
    PeriodCapError,
    PreconditionError,
    TreePressureError,
    VerificationError,
)
from .exceptional import (
    ExceptionalReport,
    find_exceptional_sets,
    is_exceptional,
    sigma_prime_construction,
)
from .maps import (
    CANTOR_REPELLER,
    FULL_INTERVAL,
    CriticalPoint,
    MonotoneBranch,
    Orbit,
    SmoothIntervalMap,
    TentConjugacy,
    chebyshev,
    cycle_orbits,
    julia_base_point,
    logistic,
    map_from_spec,
    periodic_points,
    polynomial_map,
)
from .potentials import (
    NEG_INFINITY,
    POLE,
    AveragedPotential,
    SingularPotential,
    SnBoundResult,
    SupBirkhoffEstimate,
    averaged_potential_eval,
    birkhoff_sum,
    coboundary_h,
    constant_potential,
    eval_potential,
    geometric_potential,
    is_pole_marker,
    polynomial_potential,
    potential_from_spec,
    singular_potential,
    singular_set,
    sup_birkhoff_average,
    verify_cohomology,
    verify_snbound,
)
from .preimage import (
    NormalityCertificate,
    TreeFoldResult,
    enumerate_preimage_level,
    lambda_normal,
    preimage_point,
    preimage_tree_fold,
    preimages,
)
from .pressure import (
    HyperbolicityReport,
    LowerBoundDiagnostic,
    PressureEstimate,
    default_pressure_oracle,
    grid_function,
    hyperbolicity_check,
    lower_bound_diagnostic,
    periodic_orbit_pressure,
    transfer_apply,
    tree_pressure,
    ulam_pressure,
)

__version__ = "0.1.0"
