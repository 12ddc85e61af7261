"""Variance estimators for the sample mean of dependent outcomes.

All double sums over ``A`` run over ordered pairs, so each undirected edge
contributes twice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import AdjacencyMatrix, ObservedData, residuals, sample_variance, truncated_degrees

Kind = Literal["naive", "v1", "v2", "v2_prime"]
KINDS: tuple[str, ...] = ("naive", "v1", "v2", "v2_prime")


@dataclass(frozen=True)
class VarianceEstimate:
    kind: str
    value: float
    at_matrix: AdjacencyMatrix | None = None

    @property
    def negative(self) -> bool:
        return self.value < 0

    @property
    def standard_error(self) -> float:
        if self.value < 0:
            raise ValueError(f"{self.kind} variance estimate is negative ({self.value!r})")
        return math.sqrt(self.value)


def _check_dims(A: AdjacencyMatrix, data: ObservedData) -> None:
    if A.n != data.n:
        raise ValueError(f"matrix has {A.n} vertices but data has {data.n}")


def edge_cross_sum(A: AdjacencyMatrix, data: ObservedData) -> float:
    """Sum of residual cross-products over the edges of ``A``, each edge once."""
    if not A.edges:
        return 0.0
    r = residuals(data.outcomes)
    e = A.edge_array()
    return math.fsum(r[e[:, 0]] * r[e[:, 1]])


def naive(data: ObservedData) -> VarianceEstimate:
    return VarianceEstimate("naive", sample_variance(data.outcomes) / data.n)


def v1(A: AdjacencyMatrix, data: ObservedData) -> VarianceEstimate:
    """General-case estimator: plug-in variance plus residual cross-products on ``A``.

    The value can be negative when ``A`` joins residuals of opposite sign;
    it is returned as computed.
    """
    _check_dims(A, data)
    n = data.n
    r = residuals(data.outcomes)
    e = A.edge_array()
    total = math.fsum(np.concatenate([r * r, 2.0 * r[e[:, 0]] * r[e[:, 1]]]))
    return VarianceEstimate("v1", total / (n * n), A)


def v2(A: AdjacencyMatrix, data: ObservedData) -> VarianceEstimate:
    """Homoskedastic estimator; depends on ``A`` only through its edge count."""
    _check_dims(A, data)
    n = data.n
    s2 = sample_variance(data.outcomes)
    return VarianceEstimate("v2", s2 / n * (1.0 + 2.0 * len(A) / n), A)


def v2_prime(data: ObservedData) -> VarianceEstimate:
    """Closed-form homoskedastic bound from degrees truncated at ``n - 1``.

    Observed edges play no role.
    """
    n = data.n
    s2 = sample_variance(data.outcomes)
    return VarianceEstimate("v2_prime", s2 / n * (1.0 + int(truncated_degrees(data).sum()) / n))


def v1_from_objective(objective: float, data: ObservedData) -> float:
    """V1 given the single-count edge objective ``sum_{i<j} w_ij a_ij``."""
    n = data.n
    return (n * sample_variance(data.outcomes) + 2.0 * objective) / (n * n)


def v2_from_objective(objective: float, data: ObservedData) -> float:
    """V2 given an edge count (or a relaxed, fractional edge count)."""
    n = data.n
    return sample_variance(data.outcomes) / n * (1.0 + 2.0 * objective / n)
