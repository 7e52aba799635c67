"""Least-squares and Durbin-Watson statistics for a double autoregression whose
roots drift towards the unit circle, with exact-identity checks, limiting rate
functions and Monte Carlo experiments."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AllReplicasDegenerate,
    ConfigError,
    ConsistencyFailure,
    DegenerateFourthMoment,
    DegenerateSecondMoment,
    DivergentIdentity,
    InequalityViolated,
    InvalidRegime,
    LengthMismatch,
    MiddevError,
    NonStationaryAtN,
    ZeroDenominator,
)
from .noise import NoiseSpec, make_noise, sample_noise  # noqa: E402
from .params import Case, ModelConfig, Scale, sample_schedule, validate_conditions  # noqa: E402
from .simulate import Trajectory, generate, generate_with_noise  # noqa: E402
from .estimate import EstimateSet, full_estimate, sign_flip  # noqa: E402
from .ledger import build_ledger, check_identities, check_inequalities  # noqa: E402
from .rates import RateModel, build as build_rates, consistency_check, eval_rate  # noqa: E402
