from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..core import AdjacencyMatrix

OPTIMAL = "optimal"
GAP_LIMIT = "gap_limit"
TIME_LIMIT = "time_limit"
INFEASIBLE = "infeasible"

# tightest gap still reported as optimal
EXACT_GAP = 1e-9


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("DEPBOUND_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SolverConfig:
    """Branch-and-bound settings.

    ``gap`` is an absolute tolerance on the objective. ``rel_gap`` guards
    against instances whose weights are so large that ``gap`` is below float
    resolution. ``matching`` enables the exact matching step at the root;
    switching it off leaves plain branch-and-bound.
    """

    gap: float = EXACT_GAP
    rel_gap: float = 1e-12
    time_limit: float | None = None
    threads: int = field(default_factory=default_threads)
    matching: bool = True

    def __post_init__(self):
        if self.gap < 0 or self.rel_gap < 0:
            raise ValueError("gap tolerances must be nonnegative")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if self.threads < 1:
            raise ValueError("thread count must be at least 1")

    def tolerance(self, objective: float) -> float:
        return max(self.gap, self.rel_gap * abs(objective))


@dataclass(frozen=True)
class SolverStats:
    nodes: int = 0
    lp_solves: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class SolverResult:
    best_matrix: AdjacencyMatrix | None
    objective: float
    upper_bound: float
    status: str
    stats: SolverStats = SolverStats()

    @property
    def gap(self) -> float:
        if self.status == INFEASIBLE:
            return float("nan")
        return max(0.0, self.upper_bound - self.objective)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def summary(self) -> dict:
        return {
            "status": self.status,
            "objective": self.objective,
            "upper_bound": self.upper_bound,
            "gap": self.gap,
            "nodes": self.stats.nodes,
            "lp_solves": self.stats.lp_solves,
            "wall_time": self.stats.wall_time,
        }
