"""Bivariate survival distributions with a diagonal singular component.

The package builds, evaluates, validates, decomposes and samples the class
of bivariate survival functions that are stable under the baseline
semigroup shift ``(x1, x2) -> (x1 (+) t, x2 (+) t)``: on each wedge the
survival factorizes into a marginal factor of the wedge difference times a
power of the baseline survival at the minimum, and ties ``X1 = X2`` carry
positive probability.  See the README for the CLI and file formats.
"""

from .baseline import BaselineModel, CustomHazard, Exponential, Pareto, Weibull
from .bivariate import Decomposition, GeneralBivariateModel, PHBivariateModel
from .errors import (
    BisurvError,
    ConfigError,
    DecompositionError,
    DomainError,
    InvalidModelError,
    ModelError,
    NumericError,
    SamplerError,
    UndefinedComponentError,
)
from .marginals import (
    FromHazard,
    LinearFailureRate,
    MarginalModel,
    ProportionalHazard,
    limit_hazard_ratio,
)
from .sampling import SampleBatch, sample_general, sample_ph
from .validity import (
    GridSpec,
    ResidualReport,
    ValidationReport,
    check_functional_equation,
    check_hazard_gradient_identity,
    check_hazard_rate_conditions,
    check_marginal_conditions,
    check_two_increasing,
    combined_validation,
    hazard_gradient,
    reconstruct_survival_from_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineModel", "Exponential", "Weibull", "Pareto", "CustomHazard",
    "MarginalModel", "ProportionalHazard", "LinearFailureRate", "FromHazard",
    "limit_hazard_ratio",
    "GeneralBivariateModel", "PHBivariateModel", "Decomposition",
    "GridSpec", "ValidationReport", "ResidualReport",
    "check_marginal_conditions", "check_hazard_rate_conditions",
    "check_two_increasing", "check_functional_equation",
    "check_hazard_gradient_identity", "hazard_gradient",
    "reconstruct_survival_from_gradient", "combined_validation",
    "SampleBatch", "sample_ph", "sample_general",
    "BisurvError", "ConfigError", "DecompositionError", "DomainError",
    "InvalidModelError", "ModelError", "NumericError", "SamplerError",
    "UndefinedComponentError",
    "__version__",
]
