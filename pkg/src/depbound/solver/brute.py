"""Exhaustive reference solver for small instances.

Shares no code with the branch-and-bound path: no presolve, no bounds, no
LP. Vertices are processed in order; at vertex ``v`` every admissible set of
new neighbours ``u > v`` is tried. Identical residual-cap states reached by
different assignments are solved once (memoized), which keeps ``n = 8``
tractable without changing the result of plain enumeration.
"""
from __future__ import annotations

import math
import time
from functools import lru_cache
from itertools import combinations

from ..core import AdjacencyMatrix
from .instance import ProblemInstance
from .result import INFEASIBLE, OPTIMAL, SolverResult, SolverStats

DEFAULT_MAX_FREE = 28


class InstanceTooLargeError(ValueError):
    pass


def brute_force(instance: ProblemInstance, max_free: int = DEFAULT_MAX_FREE) -> SolverResult:
    """Exact optimum by exhaustive search over the free edge variables."""
    start = time.perf_counter()
    n = instance.n
    if instance.free_pair_count > max_free:
        raise InstanceTooLargeError(
            f"{instance.free_pair_count} free variables exceeds the brute-force cap of {max_free}"
        )
    forced = instance.forced_edges
    rem0 = [int(instance.degree_caps[i]) for i in range(n)]
    for i, j in forced:
        rem0[i] -= 1
        rem0[j] -= 1
    if min(rem0, default=0) < 0:
        return SolverResult(None, float("nan"), float("nan"), INFEASIBLE,
                            SolverStats(wall_time=time.perf_counter() - start))
    w = instance.weights.tolist()
    free_after = [[u for u in range(v + 1, n) if (v, u) not in forced] for v in range(n)]
    calls = 0

    @lru_cache(maxsize=None)
    def best(v: int, rem: tuple[int, ...]) -> tuple[float, tuple]:
        # rem[k] is the residual cap of vertex v + k
        nonlocal calls
        calls += 1
        if v == n:
            return 0.0, ()
        here, later = rem[0], list(rem[1:])
        options = [u for u in free_after[v] if later[u - v - 1] > 0]
        top_val, top_pick = -math.inf, ()
        for size in range(min(here, len(options)) + 1):
            for pick in combinations(options, size):
                nxt = later[:]
                for u in pick:
                    nxt[u - v - 1] -= 1
                sub_val, sub_pick = best(v + 1, tuple(nxt))
                val = math.fsum([w[v][u] for u in pick] + [sub_val])
                if val > top_val:
                    top_val, top_pick = val, (tuple((v, u) for u in pick),) + sub_pick
        return top_val, top_pick

    _, picks = best(0, tuple(rem0))
    edges = set(forced)
    for chunk in picks:
        edges.update(chunk)
    obj = instance.objective(edges)
    return SolverResult(
        AdjacencyMatrix(n, frozenset(edges)),
        obj,
        obj,
        OPTIMAL,
        SolverStats(nodes=calls, wall_time=time.perf_counter() - start),
    )
