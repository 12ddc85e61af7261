from .bnb import greedy_bound, solve
from .brute import DEFAULT_MAX_FREE, InstanceTooLargeError, brute_force
from .instance import InfeasibleInstanceError, ProblemInstance, build_v1_instance, build_v2_instance
from .lp import lp_relaxation_bound
from .matching import max_weight_subgraph
from .realize import max_v2_fast_path, realize_degrees
from .result import GAP_LIMIT, INFEASIBLE, OPTIMAL, TIME_LIMIT, SolverConfig, SolverResult, SolverStats

__all__ = [
    "DEFAULT_MAX_FREE",
    "GAP_LIMIT",
    "INFEASIBLE",
    "OPTIMAL",
    "TIME_LIMIT",
    "InfeasibleInstanceError",
    "InstanceTooLargeError",
    "ProblemInstance",
    "SolverConfig",
    "SolverResult",
    "SolverStats",
    "brute_force",
    "build_v1_instance",
    "build_v2_instance",
    "greedy_bound",
    "lp_relaxation_bound",
    "max_v2_fast_path",
    "realize_degrees",
    "solve",
    "max_weight_subgraph",
]
