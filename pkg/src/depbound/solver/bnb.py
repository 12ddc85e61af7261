"""Exact branch-and-bound for the degree-constrained edge program.

Presolve fixes forced edges at one and free pairs of nonpositive weight at
zero. Each node is bounded first by the per-vertex greedy bound and, when
that fails to prune, by the certified LP bound (see :mod:`.lp`). Nodes are
explored best-bound first; fractional LP solutions are branched on the pair
with the largest ``|w| * min(x, 1 - x)``, ties broken by pair order.

The root also tries to close the whole tree. With root prices ``y`` and
reduced costs ``r``, every solution of value at least ``v`` avoids the pairs
with ``r_e < -(bound - v)``. An exact matching computation (see
:mod:`.matching`) over a superset of the remaining pairs therefore yields
the optimum. On large instances the relaxation is highly degenerate, and
this step finishes what cuts and branching alone approach very slowly.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from ..core import AdjacencyMatrix, Pair
from .instance import ProblemInstance
from .lp import LPSolution, RelaxationModel, free_positive_mask
from .matching import max_weight_subgraph
from .realize import realize_degrees
from .result import EXACT_GAP, GAP_LIMIT, INFEASIBLE, OPTIMAL, TIME_LIMIT, SolverConfig, SolverResult, SolverStats

FRACTIONAL_TOL = 1e-6
BAND_WIDTH = 12
ROOT_CUT_ROUNDS = 25
# first matching round: LP support plus this many best pairs per vertex
BOOTSTRAP_PER_VERTEX = 5
# the matching step gives up when more pairs than this survive fixing
MATCHING_PAIR_LIMIT = 60000


def greedy_bound(W: np.ndarray, allowed: np.ndarray, caps: np.ndarray) -> float:
    """Half the sum, over vertices, of each vertex's ``cap`` best incident weights."""
    n = W.shape[0]
    if n == 0:
        return 0.0
    caps = np.minimum(np.asarray(caps, dtype=np.int64), n - 1)
    kmax = int(caps.max(initial=0))
    if kmax <= 0:
        return 0.0
    M = np.where(allowed, W, 0.0)
    if kmax < n - 1:
        M = -np.partition(-M, kmax - 1, axis=1)[:, :kmax]
    top = -np.sort(-M, axis=1)[:, :kmax]
    csum = np.concatenate([np.zeros((n, 1)), np.cumsum(top, axis=1)], axis=1)
    return 0.5 * math.fsum(csum[np.arange(n), caps])


def greedy_fill(W, order_pairs, caps, chosen: set, used: np.ndarray) -> None:
    """Add pairs from ``order_pairs`` in order while both endpoints have room."""
    for i, j in order_pairs:
        if used[i] < caps[i] and used[j] < caps[j] and (i, j) not in chosen:
            chosen.add((i, j))
            used[i] += 1
            used[j] += 1


def _by_weight(W, pairs: np.ndarray) -> list[Pair]:
    if len(pairs) == 0:
        return []
    w = W[pairs[:, 0], pairs[:, 1]]
    order = np.lexsort((pairs[:, 1], pairs[:, 0], -w))
    return [tuple(p) for p in pairs[order].tolist()]


def initial_candidates(W: np.ndarray, allowed: np.ndarray, caps: np.ndarray, per_vertex: int = 4) -> np.ndarray:
    """Sparse starting column set: each vertex's best pairs plus a band in strength order."""
    n = W.shape[0]
    M = np.where(allowed, W, -np.inf)
    k = min(per_vertex, n - 1)
    out = []
    if k > 0:
        top = np.argpartition(-M, k - 1, axis=1)[:, :k]
        rows = np.repeat(np.arange(n), k)
        out.append(np.column_stack([rows, top.reshape(-1)]))
    # vertices of similar strength tend to pair up in optimal solutions
    strength = np.where(allowed, W, 0.0).max(axis=1, initial=0.0)
    order = np.lexsort((np.arange(n), -strength))
    for off in range(1, BAND_WIDTH + 1):
        a, b = order[:-off], order[off:]
        if len(a):
            out.append(np.column_stack([a, b]))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    p = np.vstack(out)
    p = np.sort(p, axis=1)
    p = p[allowed[p[:, 0], p[:, 1]]]
    return np.unique(p, axis=0)


@dataclass
class _Node:
    fixed1: tuple[Pair, ...]
    fixed0: frozenset[Pair]
    bound: float
    depth: int = 0


@dataclass
class _Evaluated:
    pruned: bool
    bound: float
    solution: set[Pair] | None
    value: float
    branch_pair: Pair | None
    lp_solves: int


class _Search:
    def __init__(self, instance: ProblemInstance, config: SolverConfig):
        self.instance = instance
        self.config = config
        self.W = instance.weights
        self.n = instance.n
        self.caps = instance.degree_caps - instance.forced_degrees()
        self.forced_value = math.fsum(self.W[i, j] for i, j in instance.forced_edges)
        self.allowed = free_positive_mask(instance, self.caps)
        iu, ju = np.nonzero(np.triu(self.allowed, 1))
        self.integral_weights = bool(np.all(self.W[iu, ju] == np.round(self.W[iu, ju])))
        self.model = RelaxationModel(self.W, self.allowed, self.caps)

    def value(self, edges) -> float:
        return math.fsum(itertools.chain((self.forced_value,), (self.W[i, j] for i, j in edges)))

    def tighten(self, bound: float) -> float:
        if self.integral_weights:
            # integer objective values: only the integer part of a bound counts
            return math.floor(bound + 1e-9)
        return bound

    def node_state(self, node: _Node):
        caps = self.caps.copy()
        for i, j in node.fixed1:
            caps[i] -= 1
            caps[j] -= 1
        allowed = self.allowed.copy()
        for i, j in itertools.chain(node.fixed1, node.fixed0):
            allowed[i, j] = allowed[j, i] = False
        closed = caps <= 0
        allowed[closed, :] = False
        allowed[:, closed] = False
        return caps, allowed

    def heuristic(self, caps, allowed, fixed1, lp_pairs=None, lp_x=None, candidates=None) -> set[Pair]:
        """Round an LP solution (or just a candidate list) to a feasible edge set."""
        chosen: set[Pair] = set()
        used = np.zeros(self.n, dtype=np.int64)
        cap_eff = np.maximum(caps, 0)
        if lp_pairs is not None and len(lp_pairs):
            keep = allowed[lp_pairs[:, 0], lp_pairs[:, 1]]
            ones = lp_pairs[keep & (lp_x >= 1.0 - FRACTIONAL_TOL)]
            greedy_fill(self.W, _by_weight(self.W, ones), cap_eff, chosen, used)
            frac = lp_pairs[keep & (lp_x > FRACTIONAL_TOL) & (lp_x < 1.0 - FRACTIONAL_TOL)]
            greedy_fill(self.W, _by_weight(self.W, frac), cap_eff, chosen, used)
        if candidates is not None and len(candidates):
            c = candidates[allowed[candidates[:, 0], candidates[:, 1]]]
            greedy_fill(self.W, _by_weight(self.W, c), cap_eff, chosen, used)
        return chosen | set(fixed1)

    def certify_root(self, sol: LPSolution) -> tuple[set[Pair] | None, bool]:
        """Exact optimum through matching, plus whether it is proven optimal."""
        iu, ju = np.nonzero(np.triu(self.allowed, 1))
        if not iu.size:
            return set(), True
        r = sol.reduced[iu, ju]
        w = self.W[iu, ju]
        # float error in the reduced costs and the bound
        margin = 1e-8 * max(1.0, abs(sol.bound))
        lp_x = np.zeros((self.n, self.n))
        lp_x[sol.pairs[:, 0], sol.pairs[:, 1]] = sol.x
        support = lp_x[iu, ju] > FRACTIONAL_TOL
        order = np.argsort(-r, kind="stable")
        edges = None
        per_vertex = BOOTSTRAP_PER_VERTEX
        cand = support.copy()
        cand[order[: per_vertex * self.n]] = True
        while True:
            rows = np.flatnonzero(cand)
            picked = max_weight_subgraph(np.column_stack([iu[rows], ju[rows]]), w[rows], self.caps)
            if picked is None:
                return edges, False
            chosen = rows[picked]
            found = set(zip(iu[chosen].tolist(), ju[chosen].tolist()))
            if edges is None or self.value(found) > self.value(edges):
                edges = found
            gamma = sol.bound - math.fsum(w[chosen])
            if self.integral_weights:
                # only solutions at least one unit better need excluding
                gamma -= 1.0
            need = r >= -(gamma + margin)
            if not (need & ~cand).any():
                return edges, True
            if need.sum() <= MATCHING_PAIR_LIMIT:
                # every solution at least as good as ``edges`` lies in ``need``
                cand = need
            elif cand.all() or per_vertex * self.n >= MATCHING_PAIR_LIMIT:
                return edges, False
            else:
                # the incumbent is too weak to fix many pairs: widen the search
                per_vertex *= 2
                cand[order[: per_vertex * self.n]] = True

    def evaluate(self, node: _Node, incumbent: float) -> _Evaluated:
        caps, allowed = self.node_state(node)
        if np.any(caps < 0):
            return _Evaluated(True, -math.inf, None, -math.inf, None, 0)
        base = self.value(node.fixed1)
        gb = self.tighten(base + greedy_bound(self.W, allowed, caps))
        if gb <= incumbent + self.config.tolerance(incumbent):
            return _Evaluated(True, gb, None, -math.inf, None, 0)
        target = incumbent + self.config.tolerance(incumbent) - self.forced_value
        sol = self.model.solve(allowed, node.fixed1, node.fixed0, separate=True, stop_at=target)
        # the model bound already counts the pairs fixed at one
        bound = self.tighten(min(gb, math.fsum([self.forced_value, sol.bound])))
        pairs, x = sol.pairs, sol.x
        edges = self.heuristic(caps, allowed, node.fixed1, pairs, x, pairs)
        val = self.value(edges)
        frac = np.minimum(x, 1.0 - x)
        mask = (frac > FRACTIONAL_TOL) & allowed[pairs[:, 0], pairs[:, 1]]
        best = max(incumbent, val)
        if bound <= best + self.config.tolerance(best) or not mask.any():
            return _Evaluated(True, bound, edges, val, None, sol.solves)
        fp = pairs[mask]
        score = np.abs(self.W[fp[:, 0], fp[:, 1]]) * frac[mask]
        pick = np.lexsort((fp[:, 1], fp[:, 0], -score))[0]
        return _Evaluated(False, bound, edges, val, tuple(fp[pick].tolist()), sol.solves)

    def run(self) -> SolverResult:
        start = time.perf_counter()
        cfg = self.config
        deadline = None if cfg.time_limit is None else start + cfg.time_limit
        W = self.W

        root_cands = initial_candidates(W, self.allowed, self.caps)
        iu, ju = np.nonzero(np.triu(self.allowed, 1))
        all_pairs = np.column_stack([iu, ju])
        best_edges = self.heuristic(self.caps, self.allowed, (), candidates=all_pairs)
        best_val = self.value(best_edges)
        if self.instance.unit_weights:
            # a realization of the capped degrees meets the greedy bound
            target = np.minimum(self.caps, self.allowed.sum(axis=1))
            full = realize_degrees(self.n, target, forbidden=self.instance.forced_edges)
            if full is not None and self.value(full) > best_val:
                best_edges, best_val = full, self.value(full)
        gb = self.tighten(math.fsum([self.forced_value, greedy_bound(W, self.allowed, self.caps)]))
        if gb <= best_val + cfg.tolerance(best_val):
            return self._result(best_edges, gb, OPTIMAL, 0, 0, start)
        self.model.add_columns(root_cands)
        if best_edges:
            self.model.add_columns(list(best_edges))

        nodes = lp_solves = 0
        if cfg.matching:
            root = self.model.solve(self.allowed, max_rounds=ROOT_CUT_ROUNDS)
            lp_solves += root.solves
            root_bound = self.tighten(math.fsum([self.forced_value, root.bound]))
            if root_bound <= best_val + cfg.tolerance(best_val):
                return self._result(best_edges, root_bound, OPTIMAL, 1, lp_solves, start)
            edges, proven = self.certify_root(root)
            if edges is not None and self.value(edges) > best_val:
                best_edges, best_val = edges, self.value(edges)
            if proven:
                return self._result(best_edges, best_val, OPTIMAL, 1, lp_solves, start)

        counter = itertools.count()
        heap: list = [(-math.inf, next(counter), _Node((), frozenset(), math.inf))]
        pruned_max = -math.inf
        timed_out = False
        while heap:
            if deadline is not None and time.perf_counter() >= deadline:
                timed_out = True
                break
            negb, _, node = heapq.heappop(heap)
            if -negb <= best_val + cfg.tolerance(best_val):
                pruned_max = max(pruned_max, -negb)
                continue
            res = self.evaluate(node, best_val)
            nodes += 1
            lp_solves += res.lp_solves
            if res.solution is not None and res.value > best_val:
                best_val, best_edges = res.value, res.solution
            if res.pruned or res.bound <= best_val + cfg.tolerance(best_val):
                pruned_max = max(pruned_max, res.bound)
                continue
            p = res.branch_pair
            one = _Node(node.fixed1 + (p,), node.fixed0, res.bound, node.depth + 1)
            zero = _Node(node.fixed1, node.fixed0 | {p}, res.bound, node.depth + 1)
            heapq.heappush(heap, (-res.bound, next(counter), one))
            heapq.heappush(heap, (-res.bound, next(counter), zero))

        open_max = max((-negb for negb, _, _ in heap), default=-math.inf)
        upper = max(best_val, pruned_max, open_max)
        gap = upper - best_val
        if timed_out and heap:
            status = TIME_LIMIT
        elif gap <= min(cfg.tolerance(best_val), max(EXACT_GAP, cfg.rel_gap * abs(best_val))):
            status = OPTIMAL
        else:
            status = GAP_LIMIT
        return self._result(best_edges, upper, status, nodes, lp_solves, start)

    def _result(self, best_edges, upper, status, nodes, lp_solves, start) -> SolverResult:
        edges = frozenset(best_edges) | self.instance.forced_edges
        objective = self.instance.objective(edges)
        if status == OPTIMAL:
            upper = max(upper, objective)
        stats = SolverStats(nodes=nodes, lp_solves=lp_solves, wall_time=time.perf_counter() - start)
        return SolverResult(AdjacencyMatrix(self.n, edges), objective, upper, status, stats)


def solve(instance: ProblemInstance, config: SolverConfig | None = None) -> SolverResult:
    """Maximize the instance objective over all compatible edge sets."""
    config = config or SolverConfig()
    if not instance.feasible:
        return SolverResult(None, float("nan"), float("nan"), INFEASIBLE)
    return _Search(instance, config).run()
