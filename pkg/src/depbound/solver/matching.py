"""Exact degree-constrained subgraphs through ordinary weighted matching.

A vertex with cap ``c`` becomes ``c`` copies and a pair joins all copies of
its endpoints with weight ``2w``. That allows a pair to be used twice. When
a maximum matching does so, the offending pairs get two private nodes
``p_u, p_v`` that allow a single use, and the matching is recomputed:

    copies of u --(L + w)-- p_u --(2L)-- p_v --(L + w)-- copies of v

Matching ``p_u p_v`` means the pair is unused (``2L``); matching both
halves means it is used (``2L + 2w``). Using only one half earns
``L + w < 2L`` and is never optimal. Every gadget earns ``2L`` either way.
Each round solves a relaxation of the subgraph problem, so the first round
without a repeated pair is optimal. Tied weights can make repeats move
around from round to round; after a few rounds every pair whose endpoints
both have more than one copy gets a gadget (only those pairs can repeat).

Weights are scaled to exact integers by a common power of two, so the
matching is exact for any finite float input whose scaled values fit the
matching library's 128-bit arithmetic.
"""
from __future__ import annotations

import numpy as np
import rustworkx as rx
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

# headroom below the library's signed 128-bit weights
MAX_WEIGHT_BITS = 100
# rounds of lazy gadget insertion before switching to the full reduction
LAZY_ROUNDS = 4


def dyadic_integers(values) -> list[int] | None:
    """Exact integers proportional to ``values`` (positive finite floats).

    Returns None when the common scale would need more than
    ``MAX_WEIGHT_BITS`` bits.
    """
    ratios = [float(v).as_integer_ratio() for v in values]
    if not ratios:
        return []
    shift = max(den.bit_length() - 1 for _, den in ratios)
    ints = [num << (shift - (den.bit_length() - 1)) for num, den in ratios]
    if max(ints).bit_length() > MAX_WEIGHT_BITS:
        return None
    return ints


def _matching_round(pairs, ints, copies, gadget: set[int]) -> dict[int, int]:
    """Times each pair is used in a maximum matching of the copy graph."""
    g = rx.PyGraph()
    node = {v: g.add_nodes_from([v] * c) for v, c in copies.items()}
    big = 2 * max(ints) + 2
    for k, ((a, b), w) in enumerate(zip(pairs, ints)):
        ca, cb = node[a], node[b]
        if k not in gadget:
            for p in ca:
                for q in cb:
                    g.add_edge(p, q, (k, 2 * w))
            continue
        pu, pv = g.add_node(None), g.add_node(None)
        g.add_edge(pu, pv, (-1, 2 * big))
        for p in ca:
            g.add_edge(p, pu, (k, big + w))
        for q in cb:
            g.add_edge(pv, q, (k, big + w))
    used: dict[int, int] = {}
    for a, b in rx.max_weight_matching(g, weight_fn=lambda d: d[1]):
        k = g.get_edge_data(a, b)[0]
        if k >= 0:
            used[k] = used.get(k, 0) + 1
    for k in gadget:
        if k in used:
            if used[k] != 2:
                raise RuntimeError("matching used half of a pair gadget")
            used[k] = 1
    return used


def _component_matching(pairs: list[tuple[int, int]], ints: list[int], caps) -> list[int]:
    copies = {v: int(caps[v]) for v in sorted({v for p in pairs for v in p})}
    # start without gadgets; a pair used twice gets one and the round repeats
    gadget: set[int] = set()
    for _ in range(LAZY_ROUNDS):
        used = _matching_round(pairs, ints, copies, gadget)
        doubled = {k for k, c in used.items() if c > 1}
        if not doubled:
            return sorted(used)
        gadget |= doubled
    # ties let the doubled pairs wander; one exact round with every gadget
    multi = {k for k, (a, b) in enumerate(pairs) if copies[a] > 1 and copies[b] > 1}
    used = _matching_round(pairs, ints, copies, gadget | multi)
    return sorted(used)


def max_weight_subgraph(pairs: np.ndarray, weights: np.ndarray, caps) -> np.ndarray | None:
    """Rows of ``pairs`` forming a maximum-weight subgraph under ``caps``.

    ``weights`` must be positive. Returns None when the weights cannot be
    represented exactly.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    caps = np.asarray(caps, dtype=np.int64)
    keep = (caps[pairs[:, 0]] > 0) & (caps[pairs[:, 1]] > 0)
    idx = np.flatnonzero(keep)
    if not idx.size:
        return np.zeros(0, dtype=np.int64)
    ints = dyadic_integers(np.asarray(weights, dtype=float)[idx])
    if ints is None:
        return None
    sub = pairs[idx]
    n = int(caps.size)
    adj = coo_matrix((np.ones(len(sub)), (sub[:, 0], sub[:, 1])), shape=(n, n))
    _, label = connected_components(adj, directed=False)
    comp = label[sub[:, 0]]
    chosen = []
    for c in np.unique(comp).tolist():
        rows = np.flatnonzero(comp == c)
        picked = _component_matching([tuple(p) for p in sub[rows].tolist()],
                                     [ints[r] for r in rows.tolist()], caps)
        chosen.extend(idx[rows[picked]].tolist())
    return np.array(sorted(chosen), dtype=np.int64)
