"""Continuous relaxation of the degree-constrained edge program.

The relaxation ``max w.x  s.t.  sum_{e ~ i} x_e <= c_i,  0 <= x <= 1`` is
kept in one HiGHS model for a whole search. Columns enter by pricing, rows
by odd-set separation, and branching only changes column bounds, so every
re-solve starts from the previous basis. Odd-set cuts

    x(E(S)) + x(F) <= (c(S) + |F| - 1) / 2,   F a subset of the pairs leaving S,
                                              c(S) + |F| odd,

hold for every integer solution (sum the degree rows over S and ``x_e <= 1``
over F, halve, round down).

Any nonnegative prices ``y`` (vertex rows) and ``p`` (cut rows) certify the
upper bound

    c.y + rhs.p + sum_{e fixed at 1} r_e + sum_{free allowed e} max(0, r_e),
    r_e = w_e - y_i - y_j - (cut prices covering e),

which is the dual objective with the column-bound duals filled in
optimally. It is evaluated over every allowed pair, so it holds whatever the
candidate set or the accuracy of the LP engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import highspy
import networkx as nx
import numpy as np

from .instance import ProblemInstance

# reduced cost above which an excluded pair enters the model
PRICE_TOL = 1e-10
MAX_NEW_COLUMNS = 4000
CUT_VIOLATION = 1e-6
MAX_CUT_ROUNDS = 100
# separation stops when the last TAIL_ROUNDS rounds closed less than
# TAIL_FRACTION of the distance to the stopping value
TAIL_ROUNDS = 4
TAIL_FRACTION = 0.02
FRACTIONAL_TOL = 1e-6

_INF = highspy.kHighsInf
_I32 = np.int32


@dataclass(frozen=True)
class OddSetCut:
    members: tuple[int, ...]
    teeth: tuple[tuple[int, int], ...]
    rhs: float

    def covers(self, pairs: np.ndarray, n: int) -> np.ndarray:
        """Boolean mask of the rows of ``pairs`` that appear in the cut."""
        ins = np.zeros(n, dtype=bool)
        ins[list(self.members)] = True
        hit = ins[pairs[:, 0]] & ins[pairs[:, 1]]
        if self.teeth:
            t = np.asarray(self.teeth, dtype=np.int64)
            hit |= np.isin(pairs[:, 0] * n + pairs[:, 1], t[:, 0] * n + t[:, 1])
        return hit


@dataclass
class LPSolution:
    pairs: np.ndarray  # (k, 2) model columns, i < j
    x: np.ndarray  # primal values on ``pairs``
    y: np.ndarray  # vertex prices
    bound: float  # certified upper bound
    primal: float  # w.x of the primal solution
    solves: int
    reduced: np.ndarray | None = None  # reduced costs behind ``bound``

    def fractional(self) -> np.ndarray:
        return (self.x > FRACTIONAL_TOL) & (self.x < 1.0 - FRACTIONAL_TOL)


def _odd_set_cut(side, pairs, x, caps, n) -> OddSetCut | None:
    """Most violated cut with vertex set ``side``, choosing the teeth freely."""
    S = sorted(side)
    ins = np.zeros(n, dtype=bool)
    ins[S] = True
    inside = ins[pairs[:, 0]] & ins[pairs[:, 1]]
    leaving = ins[pairs[:, 0]] ^ ins[pairs[:, 1]]
    lx, lp = x[leaving], pairs[leaving]
    teeth = lx > 0.5
    cap_s = int(np.asarray(caps)[S].sum())
    if (cap_s + int(teeth.sum())) % 2 == 0:
        if not len(lx):
            return None
        # cheapest parity repair: toggle the leaving pair closest to 1/2
        k = int(np.argmin(np.abs(1.0 - 2.0 * lx)))
        teeth[k] = not teeth[k]
    rhs = (cap_s + int(teeth.sum()) - 1) / 2
    if float(x[inside].sum()) + float(lx[teeth].sum()) <= rhs + CUT_VIOLATION:
        return None
    return OddSetCut(tuple(S), tuple(tuple(t) for t in lp[teeth].tolist()), rhs)


def separate_odd_sets(pairs, x, caps, n, tol=FRACTIONAL_TOL) -> list[OddSetCut]:
    """Violated odd-set cuts from a Gomory-Hu tree of the fractional support.

    A cut with vertex set S and teeth F is violated exactly when

        s(S) + sum_{e in d(S) - F} x_e + sum_{e in F} (1 - x_e) < 1,

    where ``s`` is the slack of the degree rows. Giving each fractional pair
    capacity ``min(x, 1 - x)`` and joining every vertex with slack to an
    extra node, the left side (with the best choice of F) is a cut capacity
    up to one parity repair, so the candidate sets are the sides of the
    light Gomory-Hu tree edges plus the components that never touch the
    extra node.
    """
    support = x > tol
    pairs, x = pairs[support], x[support]
    frac = x < 1.0 - tol
    deg = np.zeros(n)
    np.add.at(deg, pairs[:, 0], x)
    np.add.at(deg, pairs[:, 1], x)
    slack = np.asarray(caps) - deg
    hub = n
    G = nx.Graph()
    for (a, b), v in zip(pairs[frac].tolist(), x[frac].tolist()):
        G.add_edge(a, b, capacity=min(v, 1.0 - v))
    for v in np.flatnonzero(slack > tol).tolist():
        if v in G:
            G.add_edge(v, hub, capacity=float(slack[v]))
    out = []
    for comp in nx.connected_components(G):
        sides = [] if hub in comp else [set(comp)]
        tree = nx.gomory_hu_tree(G.subgraph(comp))
        for u, v, weight in list(tree.edges(data="weight")):
            if weight >= 1.0 - CUT_VIOLATION:
                continue
            tree.remove_edge(u, v)
            side = nx.node_connected_component(tree, u)
            tree.add_edge(u, v, weight=weight)
            sides.append(set(comp) - side if hub in side else side)
        for side in sides:
            cut = _odd_set_cut(side - {hub}, pairs, x, caps, n)
            if cut is not None:
                out.append(cut)
    return out


class RelaxationModel:
    """Persistent LP over the free pairs of one instance.

    ``W`` is the weight matrix, ``allowed`` the symmetric mask of pairs that
    may be chosen (false diagonal) and ``caps`` the degree caps left after
    forced edges.
    """

    def __init__(self, W: np.ndarray, allowed: np.ndarray, caps: np.ndarray):
        self.W = W
        self.allowed = allowed
        self.caps = np.asarray(caps, dtype=np.int64)
        self.n = n = W.shape[0]
        self.pairs = np.zeros((0, 2), dtype=np.int64)
        self.column = {}
        self.in_model = np.zeros((n, n), dtype=bool)
        self.cuts: list[OddSetCut] = []
        self._cut_keys: set = set()
        self._cut_cells: list[np.ndarray] = []
        self._bounded: set[int] = set()
        self.solves = 0
        h = self.h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        h.setOptionValue("primal_feasibility_tolerance", 1e-10)
        h.setOptionValue("dual_feasibility_tolerance", 1e-10)
        h.changeObjectiveSense(highspy.ObjSense.kMaximize)
        if n:
            h.addRows(n, np.full(n, -_INF), self.caps.astype(float), 0,
                      np.zeros(n, dtype=_I32), np.zeros(0, dtype=_I32), np.zeros(0))

    def add_columns(self, pairs) -> None:
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if not len(pairs):
            return
        pairs = np.unique(np.sort(pairs, axis=1), axis=0)
        pairs = pairs[~self.in_model[pairs[:, 0], pairs[:, 1]]]
        k = len(pairs)
        if not k:
            return
        n = self.n
        per_col = [[int(i), int(j)] for i, j in pairs.tolist()]
        for r, cut in enumerate(self.cuts):
            for c in np.flatnonzero(cut.covers(pairs, n)).tolist():
                per_col[c].append(n + r)
        starts = np.zeros(k, dtype=_I32)
        starts[1:] = np.cumsum([len(rows) for rows in per_col])[:-1]
        index = np.fromiter((r for rows in per_col for r in rows), dtype=_I32)
        w = self.W[pairs[:, 0], pairs[:, 1]].astype(float)
        self.h.addCols(k, w, np.zeros(k), np.ones(k), index.size, starts, index, np.ones(index.size))
        base = len(self.pairs)
        for c, (i, j) in enumerate(pairs.tolist()):
            self.column[(i, j)] = base + c
        self.in_model[pairs[:, 0], pairs[:, 1]] = True
        self.pairs = np.vstack([self.pairs, pairs])

    def add_cuts(self, cuts) -> int:
        fresh = []
        for cut in cuts:
            key = (cut.members, cut.teeth)
            if key not in self._cut_keys:
                self._cut_keys.add(key)
                fresh.append(cut)
        for cut in fresh:
            cols = np.flatnonzero(cut.covers(self.pairs, self.n)).astype(_I32)
            self.h.addRows(1, np.array([-_INF]), np.array([cut.rhs]), cols.size,
                           np.zeros(1, dtype=_I32), cols, np.ones(cols.size))
            self.cuts.append(cut)
            S = np.array(cut.members, dtype=np.int64)
            cells = [(S[:, None] * self.n + S[None, :]).reshape(-1)]
            if cut.teeth:
                t = np.asarray(cut.teeth, dtype=np.int64)
                cells += [t[:, 0] * self.n + t[:, 1], t[:, 1] * self.n + t[:, 0]]
            self._cut_cells.append(np.concatenate(cells))
        return len(fresh)

    def set_fixed(self, fixed1, fixed0) -> None:
        """Fix the given pairs at one and zero; every other column is freed."""
        if fixed1:
            self.add_columns(list(fixed1))
        want = {}
        for p in fixed1:
            want[self.column[p]] = 1.0
        for p in fixed0:
            c = self.column.get(p)
            if c is not None:
                want[c] = 0.0
        reset = [c for c in self._bounded if c not in want]
        idx = reset + list(want)
        if idx:
            lo = [0.0] * len(reset) + list(want.values())
            hi = [1.0] * len(reset) + list(want.values())
            self.h.changeColsBounds(len(idx), np.array(idx, dtype=_I32), np.array(lo), np.array(hi))
        self._bounded = set(want)

    def _run(self):
        self.h.run()
        self.solves += 1
        status = self.h.getModelStatus()
        if status != highspy.HighsModelStatus.kOptimal:
            # numerical trouble on a warm start: retry from scratch once
            self.h.clearSolver()
            self.h.run()
            self.solves += 1
            status = self.h.getModelStatus()
        if status != highspy.HighsModelStatus.kOptimal:
            raise RuntimeError(f"LP relaxation failed: {self.h.modelStatusToString(status)}")
        sol = self.h.getSolution()
        x = np.clip(np.asarray(sol.col_value, dtype=float), 0.0, 1.0)
        duals = np.maximum(np.asarray(sol.row_dual, dtype=float), 0.0)
        return x, duals[: self.n], duals[self.n:]

    def reduced_costs(self, y, prices) -> np.ndarray:
        n = self.n
        R = self.W - y[:, None] - y[None, :]
        live = np.flatnonzero(prices > 0)
        if live.size:
            cells = [self._cut_cells[k] for k in live.tolist()]
            weights = np.repeat(prices[live], [c.size for c in cells])
            R -= np.bincount(np.concatenate(cells), weights, minlength=n * n).reshape(n, n)
        return R

    def certified_bound(self, R, y, prices, free, fixed1) -> float:
        terms = [float(self.caps @ y)]
        terms += [c.rhs * float(p) for c, p in zip(self.cuts, prices)]
        terms += [R[i, j] for i, j in fixed1]
        # ``free`` is symmetric, so every pair appears twice
        terms.append(0.5 * float(np.where(free, np.maximum(R, 0.0), 0.0).sum()))
        return math.fsum(terms)

    def solve(self, free: np.ndarray, fixed1=(), fixed0=(), separate: bool = True,
              stop_at: float = -math.inf, max_rounds: int = MAX_CUT_ROUNDS) -> LPSolution:
        """Optimize with ``fixed1``/``fixed0`` imposed and ``free`` the pairs left open.

        ``free`` must exclude the fixed pairs and may exclude pairs at
        vertices already saturated by ``fixed1``. Separation ends early once
        the LP value is at most ``stop_at`` or has stalled above it.
        """
        fixed1 = list(fixed1)
        self.set_fixed(fixed1, fixed0)
        rounds = 0
        history: list[float] = []
        start = self.solves
        while True:
            if len(self.pairs):
                x, y, p = self._run()
            else:
                x, y, p = np.zeros(0), np.zeros(self.n), np.zeros(len(self.cuts))
            R = self.reduced_costs(y, p)
            viol = np.triu(free & (R > PRICE_TOL), 1) & ~self.in_model
            vi, vj = np.nonzero(viol)
            if vi.size:
                if vi.size > MAX_NEW_COLUMNS:
                    top = np.argsort(-R[vi, vj], kind="stable")[:MAX_NEW_COLUMNS]
                    vi, vj = vi[top], vj[top]
                self.add_columns(np.column_stack([vi, vj]))
                continue
            if separate and rounds < max_rounds and len(self.pairs):
                obj = self.h.getInfo().objective_function_value
                history.append(obj)
                if obj <= stop_at:
                    break
                if math.isfinite(stop_at) and len(history) > TAIL_ROUNDS:
                    if history[-1 - TAIL_ROUNDS] - obj < TAIL_FRACTION * (obj - stop_at):
                        break
                if self.add_cuts(separate_odd_sets(self.pairs, x, self.caps, self.n)):
                    rounds += 1
                    continue
            break
        bound = self.certified_bound(R, y, p, free, fixed1)
        primal = math.fsum(self.W[self.pairs[:, 0], self.pairs[:, 1]] * x) if len(x) else 0.0
        return LPSolution(self.pairs.copy(), x, y, bound, primal, self.solves - start, R)


def snap_half_integral(x: np.ndarray, tol: float = 1e-7) -> np.ndarray | None:
    """Round to multiples of 1/2 when every entry is that close, else None."""
    h = np.round(2.0 * x) / 2.0
    if np.all(np.abs(h - x) <= tol):
        return h
    return None


def free_positive_mask(instance: ProblemInstance, caps: np.ndarray) -> np.ndarray:
    """Pairs that can still improve the objective: free, positive weight, both caps open.

    Free pairs of nonpositive weight can be fixed at zero without losing
    optimality, so they are excluded.
    """
    allowed = instance.weights > 0
    np.fill_diagonal(allowed, False)
    for i, j in instance.forced_edges:
        allowed[i, j] = allowed[j, i] = False
    open_ = np.asarray(caps) > 0
    allowed &= open_[:, None] & open_[None, :]
    return allowed


def lp_relaxation_bound(instance: ProblemInstance) -> float:
    """Optimum of the continuous relaxation with forced edges fixed at one.

    No cuts are added. Extreme points of this relaxation are half-integral;
    when the LP engine's solution rounds to one whose value the certified
    dual bound confirms, that exact value is returned, otherwise the
    certified bound.
    """
    if not instance.feasible:
        raise ValueError("instance is infeasible: forced edges exceed degree caps")
    n = instance.n
    W = instance.weights
    caps = instance.degree_caps - instance.forced_degrees()
    forced = [W[i, j] for i, j in instance.forced_edges]
    allowed = free_positive_mask(instance, caps)
    iu, ju = np.nonzero(np.triu(allowed, 1))
    if not len(iu):
        return math.fsum(forced)
    model = RelaxationModel(W, allowed, caps)
    model.add_columns(np.column_stack([iu, ju]))
    sol = model.solve(allowed, separate=False)
    h = snap_half_integral(sol.x)
    if h is not None and len(sol.pairs):
        deg = np.zeros(n)
        np.add.at(deg, sol.pairs[:, 0], h)
        np.add.at(deg, sol.pairs[:, 1], h)
        if np.all(deg <= caps + 1e-12):
            terms = W[sol.pairs[:, 0], sol.pairs[:, 1]] * h
            scale = max(1.0, abs(sol.bound))
            if abs(sol.bound - math.fsum(terms)) <= 1e-12 * scale:
                # one correctly rounded sum, like the objective of a solution
                return math.fsum(forced + terms.tolist())
    # round up so the float still bounds the exact optimum
    return math.nextafter(math.fsum(forced + [sol.bound]), math.inf)
