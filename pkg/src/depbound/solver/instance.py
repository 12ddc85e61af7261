"""0-1 program instances over the upper-triangular edge variables.

An instance asks for an edge set maximizing ``sum_{i<j} w_ij a_ij`` subject
to per-vertex degree caps and a set of edges fixed to one.

Plain-text dump format (indices 1-based, ``#`` starts a comment)::

    n <n>
    caps <c_1> ... <c_n>
    forced <i> <j>          (zero or more lines)
    w <i> <j> <weight>      (zero or more lines; absent pairs weigh 0)

Weights are written with ``repr`` so they round-trip exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import ObservedData, Pair, normalize_pair, residuals


class InfeasibleInstanceError(ValueError):
    """Forced edges exceed a vertex's degree cap."""


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    n: int
    weights: np.ndarray
    degree_caps: np.ndarray
    forced_edges: frozenset[Pair] = field(default_factory=frozenset)
    unit_weights: bool = False
    check: bool = True

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise ValueError(f"weights must be {self.n}x{self.n}, got {w.shape}")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        np.fill_diagonal(w, 0.0)
        w.setflags(write=False)
        caps = np.array(self.degree_caps, dtype=np.int64).reshape(-1)
        if caps.shape != (self.n,):
            raise ValueError(f"expected {self.n} degree caps, got {caps.size}")
        if np.any(caps < 0):
            raise ValueError("degree caps must be nonnegative")
        caps.setflags(write=False)
        forced = frozenset(normalize_pair(i, j) for i, j in self.forced_edges)
        for i, j in forced:
            if i == j:
                raise ValueError(f"forced self-pair at vertex {i}")
            if i < 0 or j >= self.n:
                raise ValueError(f"forced edge ({i}, {j}) out of range")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "degree_caps", caps)
        object.__setattr__(self, "forced_edges", forced)
        if self.check:
            over = self.overloaded_vertices()
            if over:
                raise InfeasibleInstanceError(
                    "forced edges exceed degree caps at vertices "
                    + ", ".join(str(v) for v in over)
                )

    def forced_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.forced_edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def overloaded_vertices(self) -> list[int]:
        return np.flatnonzero(self.forced_degrees() > self.degree_caps).tolist()

    @property
    def feasible(self) -> bool:
        return not self.overloaded_vertices()

    def weight(self, i: int, j: int) -> float:
        return float(self.weights[i, j])

    def objective(self, edges) -> float:
        """Single-count objective of an edge set."""
        return math.fsum(self.weights[i, j] for i, j in edges)

    def is_feasible_solution(self, edges) -> bool:
        edges = {normalize_pair(i, j) for i, j in edges}
        if not self.forced_edges <= edges:
            return False
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in edges:
            if i == j:
                return False
            deg[i] += 1
            deg[j] += 1
        return bool(np.all(deg <= self.degree_caps))

    @property
    def free_pair_count(self) -> int:
        return self.n * (self.n - 1) // 2 - len(self.forced_edges)

    # -- text format ---------------------------------------------------------

    def dumps(self) -> str:
        lines = [f"n {self.n}", "caps " + " ".join(str(int(c)) for c in self.degree_caps)]
        lines += [f"forced {i + 1} {j + 1}" for i, j in sorted(self.forced_edges)]
        iu, ju = np.triu_indices(self.n, 1)
        for i, j in zip(iu.tolist(), ju.tolist()):
            wij = self.weights[i, j]
            if wij != 0.0:
                lines.append(f"w {i + 1} {j + 1} {float(wij)!r}")
        return "\n".join(lines) + "\n"

    def dump(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str, check: bool = True) -> "ProblemInstance":
        n = None
        caps = None
        forced = []
        triples = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, *rest = line.split()
            try:
                if key == "n":
                    (n,) = (int(v) for v in rest)
                elif key == "caps":
                    caps = [int(v) for v in rest]
                elif key == "forced":
                    i, j = (int(v) for v in rest)
                    forced.append((i - 1, j - 1))
                elif key == "w":
                    if len(rest) != 3:
                        raise ValueError
                    i, j, wij = int(rest[0]), int(rest[1]), float(rest[2])
                    triples.append((i - 1, j - 1, wij))
                else:
                    raise ValueError
            except ValueError:
                raise ValueError(f"line {lineno}: cannot parse {raw!r}") from None
        if n is None or caps is None:
            raise ValueError("instance text needs 'n' and 'caps' lines")
        w = np.zeros((n, n))
        for i, j, wij in triples:
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"weight pair ({i + 1}, {j + 1}) invalid for n={n}")
            w[i, j] = w[j, i] = wij
        unit = n > 1 and bool(np.all(w[np.triu_indices(n, 1)] == 1.0))
        return cls(n, w, caps, frozenset(forced), unit_weights=unit, check=check)

    @classmethod
    def load(cls, path, check: bool = True) -> "ProblemInstance":
        return cls.loads(Path(path).read_text(), check=check)


def build_v1_instance(data: ObservedData) -> ProblemInstance:
    """Weights are residual cross-products; caps are the raw degrees."""
    r = residuals(data.outcomes)
    w = np.outer(r, r)
    return ProblemInstance(data.n, w, data.degrees, frozenset(data.observed_edges))


def build_v2_instance(data: ObservedData) -> ProblemInstance:
    w = np.ones((data.n, data.n))
    return ProblemInstance(data.n, w, data.degrees, frozenset(data.observed_edges), unit_weights=True)
