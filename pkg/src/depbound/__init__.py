"""Conservative variance bounds for the sample mean under an unknown dependency graph."""
from .core import (
    AdjacencyMatrix,
    InconsistentDataError,
    ObservedData,
    induced_subgraph,
    is_compatible,
    truncated_degrees,
    validate,
)
from .estimators import VarianceEstimate, naive, v1, v2, v2_prime
from .inference import ConfidenceInterval, normal_quantile, wald_ci
from .io import DataFormatError, load_data

__version__ = "0.1.0"

__all__ = [
    "AdjacencyMatrix",
    "ConfidenceInterval",
    "DataFormatError",
    "InconsistentDataError",
    "ObservedData",
    "VarianceEstimate",
    "induced_subgraph",
    "is_compatible",
    "load_data",
    "naive",
    "normal_quantile",
    "truncated_degrees",
    "v1",
    "v2",
    "v2_prime",
    "validate",
    "wald_ci",
]
