"""Podium, Laplace and Staircase mechanisms for pure epsilon-DP on bounded scalars."""
from .baselines import (
    StaircaseShape,
    laplace_density,
    laplace_variance,
    sample_laplace,
    sample_staircase,
    staircase_density,
    staircase_shape,
    staircase_variance,
)
from .core import (
    InputDomain,
    Mechanism,
    PrivacyParams,
    PrivatizedValue,
    relative_efficiency,
    shift_to_centered,
    unshift,
)
from .errors import (
    InputOutOfRange,
    NonPositiveEpsilon,
    NonPositiveVariance,
    OutOfDomain,
    PrivacyError,
    RegimeMismatch,
    ToleranceNotMet,
    ZeroDensity,
)
from .kernels import BACKEND
from .podium import (
    PodiumShape,
    PodiumStep,
    SolverMode,
    compute_shape,
    density,
    lookup_table,
    sample,
    sample_many,
    solve_s_approx,
    solve_s_exact,
    step_location,
    variance_at,
)

__version__ = "0.1.0"
