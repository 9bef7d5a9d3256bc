"""Projection of the bipartite graph onto the vertex set.

Two vertices are neighbours when they share at least one element. Degrees
are computed from per-vertex unions of element member lists, processed in
blocks of vertices, so per-element cliques are never stored as edges.
"""
from dataclasses import dataclass

import numpy as np

from .genbip import BudgetExceeded

__all__ = [
    "DegreeRecord",
    "project_degrees",
    "project_edges",
    "split_degree_by_weight_threshold",
    "degree_array",
    "write_degrees_csv",
    "EDGE_BUDGET",
]

EDGE_BUDGET = 5 * 10**7
# cap on gathered (vertex, co-member) entries per block
_GATHER = 1 << 22


@dataclass(frozen=True)
class DegreeRecord:
    vertex: int
    degree: int
    below: int = None
    above: int = None


def _neighbour_blocks(bip):
    """Yield ``(lo, hi, owner, neighbour)`` for blocks of vertices.

    ``owner``/``neighbour`` hold every distinct (vertex, neighbour) pair with
    ``lo <= vertex < hi``, sorted by owner.
    """
    n = bip.n
    vptr, vadj = bip.vertex_ptr, bip.vertex_adj
    eptr, eadj = bip.element_ptr, bip.element_adj
    sizes = np.diff(eptr)
    # entries gathered per vertex = sum of its elements' sizes
    per_edge = sizes[vadj]
    csum = np.zeros(vadj.size + 1, dtype=np.int64)
    np.cumsum(per_edge, out=csum[1:])
    per_vertex = csum[vptr]
    lo = 0
    while lo < n:
        hi = int(np.searchsorted(per_vertex, per_vertex[lo] + _GATHER, side="right")) - 1
        hi = min(n, max(hi, lo + 1))
        e_lo, e_hi = vptr[lo], vptr[hi]
        elems = vadj[e_lo:e_hi]
        owners = np.repeat(np.arange(lo, hi, dtype=np.int64), np.diff(vptr[lo:hi + 1]))
        lens = sizes[elems]
        owner = np.repeat(owners, lens)
        # ragged gather of element member lists
        starts = np.repeat(eptr[elems] - (np.cumsum(lens) - lens), lens)
        neighbour = eadj[starts + np.arange(lens.sum(), dtype=np.int64)]
        keep = neighbour != owner
        key = np.unique(owner[keep] * n + neighbour[keep])
        yield lo, hi, key // n, key % n
        lo = hi


def degree_array(bip, threshold=None):
    """Degrees as an int array, plus (below, above) arrays if ``threshold`` is set."""
    n = bip.n
    degree = np.zeros(n, dtype=np.int64)
    below = np.zeros(n, dtype=np.int64) if threshold is not None else None
    weights = bip.weights.vertex_weights if threshold is not None else None
    for lo, hi, owner, neighbour in _neighbour_blocks(bip):
        degree[lo:hi] = np.bincount(owner - lo, minlength=hi - lo)
        if threshold is not None:
            light = weights[neighbour] <= threshold
            below[lo:hi] = np.bincount(owner[light] - lo, minlength=hi - lo)
    if threshold is None:
        return degree
    return degree, below, degree - below


def project_degrees(bip):
    """One :class:`DegreeRecord` per vertex with its intersection-graph degree."""
    return [DegreeRecord(i, int(d)) for i, d in enumerate(degree_array(bip))]


def split_degree_by_weight_threshold(bip, threshold=None):
    """Split each degree into neighbours with weight ``<= threshold`` and the rest.

    The default threshold is ``n**0.25``.
    """
    if threshold is None:
        threshold = bip.n ** 0.25
    threshold = float(threshold)
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    degree, below, above = degree_array(bip, threshold)
    return [DegreeRecord(i, int(d), int(b), int(a)) for i, (d, b, a) in enumerate(zip(degree, below, above))]


def project_edges(bip, budget=EDGE_BUDGET):
    """Deduplicated projected edges as an ``(E, 2)`` array with ``i < j`` rows.

    Raises :class:`BudgetExceeded` naming the largest element when the
    element cliques together hold more than ``budget`` pairs.
    """
    n = bip.n
    sizes = bip.element_sizes()
    pairs = sizes * (sizes - 1) // 2
    if pairs.sum() > budget:
        worst = int(np.argmax(sizes))
        raise BudgetExceeded(
            f"projection needs {int(pairs.sum())} vertex pairs (budget {budget});"
            f" element {worst} alone has {int(sizes[worst])} members"
        )
    keys = []
    for j in np.flatnonzero(sizes > 1):
        members = bip.element_vertices(j)
        i, k = np.triu_indices(members.size, 1)
        keys.append(members[i] * n + members[k])
    if not keys:
        return np.empty((0, 2), dtype=np.int64)
    key = np.unique(np.concatenate(keys))
    return np.column_stack([key // n, key % n])


def write_degrees_csv(records, fh):
    """CSV with header ``vertex,degree`` or ``vertex,degree,below,above``."""
    split = bool(records) and records[0].below is not None
    fh.write("vertex,degree,below,above\n" if split else "vertex,degree\n")
    for r in records:
        if split:
            fh.write(f"{r.vertex},{r.degree},{r.below},{r.above}\n")
        else:
            fh.write(f"{r.vertex},{r.degree}\n")
