"""Observed study data, adjacency matrices and compatibility checks.

Vertices are indexed ``0..n-1`` throughout the Python API. External string
IDs are kept on :class:`ObservedData` so results can be reported under the
labels used in the input files.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Pair = tuple[int, int]


def normalize_pair(i: int, j: int) -> Pair:
    """Return the unordered pair ``{i, j}`` as ``(min, max)``."""
    i, j = int(i), int(j)
    return (i, j) if i <= j else (j, i)


def _readonly(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Symmetric 0-1 matrix with zero diagonal, stored as its edge set.

    Edges are canonical ``(i, j)`` pairs with ``i < j``.
    """

    n: int
    edges: frozenset[Pair] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"vertex count must be nonnegative, got {self.n}")
        canon = frozenset(normalize_pair(i, j) for i, j in self.edges)
        for i, j in canon:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if i < 0 or j >= self.n:
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
        object.__setattr__(self, "edges", canon)

    @classmethod
    def empty(cls, n: int) -> "AdjacencyMatrix":
        return cls(n, frozenset())

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "AdjacencyMatrix":
        return cls(n, frozenset(normalize_pair(i, j) for i, j in edges))

    @classmethod
    def from_dense(cls, matrix) -> "AdjacencyMatrix":
        m = np.asarray(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if not np.array_equal(m, m.T):
            raise ValueError("adjacency matrix must be symmetric")
        if np.any(np.diag(m) != 0):
            raise ValueError("adjacency matrix must have a zero diagonal")
        if not np.all((m == 0) | (m == 1)):
            raise ValueError("adjacency matrix must be 0-1")
        iu, ju = np.nonzero(np.triu(m, 1))
        return cls(m.shape[0], frozenset(zip(iu.tolist(), ju.tolist())))

    def to_dense(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=np.int8)
        if self.edges:
            e = np.array(sorted(self.edges))
            m[e[:, 0], e[:, 1]] = 1
            m[e[:, 1], e[:, 0]] = 1
        return m

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def edge_array(self) -> np.ndarray:
        """Edges as a sorted ``(m, 2)`` integer array."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(sorted(self.edges), dtype=np.int64)

    def with_edges(self, extra: Iterable[Sequence[int]]) -> "AdjacencyMatrix":
        return AdjacencyMatrix(self.n, self.edges | {normalize_pair(i, j) for i, j in extra})

    def permuted(self, perm: Sequence[int]) -> "AdjacencyMatrix":
        """Relabel vertex ``v`` as ``perm[v]``."""
        return AdjacencyMatrix(self.n, frozenset(normalize_pair(perm[i], perm[j]) for i, j in self.edges))

    def __contains__(self, pair) -> bool:
        return normalize_pair(*pair) in self.edges

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class ObservedData:
    """Outcomes, full-graph degrees and observed edges for ``n`` sampled units.

    ``observed_edges`` keeps the pairs as given (order and any duplicates or
    self-loops) so that :func:`validate` can report them; ingestion already
    deduplicates.
    """

    outcomes: np.ndarray
    degrees: np.ndarray
    observed_edges: tuple[Pair, ...] = ()
    ids: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "outcomes", _readonly(self.outcomes, float))
        object.__setattr__(self, "degrees", _readonly(self.degrees, np.int64))
        object.__setattr__(
            self, "observed_edges", tuple(normalize_pair(i, j) for i, j in self.observed_edges)
        )
        if self.ids is not None:
            object.__setattr__(self, "ids", tuple(str(v) for v in self.ids))

    @property
    def n(self) -> int:
        return len(self.outcomes)

    def label(self, i: int) -> str:
        return self.ids[i] if self.ids is not None else str(i + 1)

    def observed_matrix(self) -> AdjacencyMatrix:
        """Adjacency matrix of the observed-edge graph."""
        return AdjacencyMatrix.from_edges(self.n, self.observed_edges)

    def with_degrees(self, degrees) -> "ObservedData":
        return ObservedData(self.outcomes, degrees, self.observed_edges, self.ids)

    def with_edges(self, edges) -> "ObservedData":
        return ObservedData(self.outcomes, self.degrees, tuple(edges), self.ids)


@dataclass(frozen=True)
class Violation:
    where: str
    reason: str


@dataclass(frozen=True)
class CompatibilityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def compatible(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.compatible

    def describe(self) -> str:
        if self.compatible:
            return "compatible"
        return "; ".join(f"{v.where}: {v.reason}" for v in self.violations)


class InconsistentDataError(ValueError):
    """Observed data violate their own invariants."""

    def __init__(self, report: CompatibilityReport):
        super().__init__(report.describe())
        self.report = report


def validate(data: ObservedData) -> CompatibilityReport:
    """Check the internal consistency of observed data.

    Every violated invariant is listed; nothing is raised.
    """
    out: list[Violation] = []
    n_x, n_d = len(data.outcomes), len(data.degrees)
    if n_x == 0:
        out.append(Violation("data", "no sampled vertices"))
    if n_x != n_d:
        out.append(Violation("data", f"{n_x} outcomes but {n_d} degrees"))
    if n_x and not np.all(np.isfinite(data.outcomes)):
        bad = np.flatnonzero(~np.isfinite(data.outcomes))
        for i in bad:
            out.append(Violation(f"vertex {data.label(int(i))}", "outcome is not finite"))
    for i in np.flatnonzero(data.degrees < 0):
        out.append(Violation(f"vertex {data.label(int(i))}", f"negative degree {data.degrees[i]}"))

    n = min(n_x, n_d)
    seen: set[Pair] = set()
    observed_deg = np.zeros(n, dtype=np.int64)
    for i, j in data.observed_edges:
        where = f"edge {{{i + 1},{j + 1}}}"
        if i == j:
            out.append(Violation(where, "self-loop"))
            continue
        if i < 0 or j >= n:
            out.append(Violation(where, "vertex index out of range"))
            continue
        if (i, j) in seen:
            out.append(Violation(where, "duplicate edge"))
            continue
        seen.add((i, j))
        observed_deg[i] += 1
        observed_deg[j] += 1
    for i in range(n):
        if observed_deg[i] > data.degrees[i]:
            out.append(
                Violation(
                    f"vertex {data.label(i)}",
                    f"observed degree {observed_deg[i]} exceeds reported degree {data.degrees[i]}",
                )
            )
    return CompatibilityReport(tuple(out))


def is_compatible(A: AdjacencyMatrix, data: ObservedData) -> CompatibilityReport:
    """Whether ``A`` contains every observed edge and respects the degree caps."""
    if A.n != data.n:
        raise ValueError(f"matrix has {A.n} vertices but data has {data.n}")
    out = []
    for i, j in dict.fromkeys(data.observed_edges):
        if (i, j) not in A.edges:
            out.append(Violation(f"edge {{{i + 1},{j + 1}}}", "observed edge missing from matrix"))
    deg = A.degrees()
    for i in np.flatnonzero(deg > data.degrees):
        out.append(
            Violation(
                f"vertex {data.label(int(i))}",
                f"row sum {deg[i]} exceeds degree {data.degrees[i]}",
            )
        )
    return CompatibilityReport(tuple(out))


def truncated_degrees(data: ObservedData) -> np.ndarray:
    return np.minimum(np.asarray(data.degrees, dtype=np.int64), max(data.n - 1, 0))


def sample_mean(outcomes) -> float:
    x = np.asarray(outcomes, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("sample mean of an empty sample")
    return math.fsum(x) / x.size


def residuals(outcomes) -> np.ndarray:
    x = np.asarray(outcomes, dtype=float).reshape(-1)
    return x - sample_mean(x)


def sample_variance(outcomes) -> float:
    """Plug-in variance with divisor ``n`` (no Bessel correction)."""
    r = residuals(outcomes)
    return math.fsum(r * r) / r.size


def induced_subgraph(G: AdjacencyMatrix, subset: Sequence[int]) -> AdjacencyMatrix:
    """Subgraph on ``subset``, relabelled ``0..len(subset)-1`` in the given order."""
    subset = [int(v) for v in subset]
    pos = {}
    for k, v in enumerate(subset):
        if not 0 <= v < G.n:
            raise IndexError(f"vertex {v} out of range for n={G.n}")
        if v in pos:
            raise ValueError(f"vertex {v} repeated in subset")
        pos[v] = k
    edges = {
        normalize_pair(pos[i], pos[j]) for i, j in G.edges if i in pos and j in pos
    }
    return AdjacencyMatrix(len(subset), frozenset(edges))
