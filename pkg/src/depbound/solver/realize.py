"""Constructive maximizer for the unit-weight program.

If some compatible matrix has row sums exactly equal to the truncated
degrees, no compatible matrix has more edges, so it maximizes the edge
count. Such a matrix is sought with a Havel-Hakimi style construction on top
of the observed edges.
"""
from __future__ import annotations

import numpy as np

from ..core import AdjacencyMatrix, ObservedData, is_compatible, normalize_pair, truncated_degrees


def realize_degrees(n: int, targets, forbidden=()) -> set[tuple[int, int]] | None:
    """Simple graph with the given degree sequence avoiding ``forbidden`` pairs.

    Repeatedly joins the vertex with the largest remaining demand to the
    admissible vertices of largest remaining demand. Returns None when the
    construction gets stuck; this is exact for an empty ``forbidden`` set and
    a heuristic otherwise.
    """
    rem = np.array(targets, dtype=np.int64).copy()
    if rem.shape != (n,) or np.any(rem < 0) or rem.sum() % 2:
        return None
    blocked = np.zeros((n, n), dtype=bool)
    np.fill_diagonal(blocked, True)
    for i, j in forbidden:
        blocked[i, j] = blocked[j, i] = True
    edges: set[tuple[int, int]] = set()
    idx = np.arange(n)
    while rem.any():
        v = int(np.lexsort((idx, -rem))[0])
        k = int(rem[v])
        ok = ~blocked[v] & (rem > 0)
        cand = idx[ok]
        if len(cand) < k:
            return None
        order = np.lexsort((cand, -rem[cand]))
        chosen = cand[order[:k]]
        for u in chosen.tolist():
            edges.add(normalize_pair(v, u))
            blocked[v, u] = blocked[u, v] = True
        rem[chosen] -= 1
        rem[v] = 0
    return edges


def max_v2_fast_path(data: ObservedData) -> AdjacencyMatrix | None:
    """Compatible matrix whose row sums equal the truncated degrees, if one is found."""
    n = data.n
    target = truncated_degrees(data)
    observed = set(dict.fromkeys(data.observed_edges))
    deg = np.zeros(n, dtype=np.int64)
    for i, j in observed:
        deg[i] += 1
        deg[j] += 1
    extra = realize_degrees(n, target - deg, forbidden=observed)
    if extra is None:
        return None
    A = AdjacencyMatrix(n, frozenset(observed | extra))
    if not is_compatible(A, data) or not np.array_equal(A.degrees(), target):
        return None
    return A
