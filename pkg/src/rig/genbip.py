"""Generation of the bipartite vertex/element graph.

Two samplers produce the same distribution:

* :func:`generate_naive` flips one coin per (vertex, element) pair and is
  kept as the reference oracle;
* :func:`generate_thinned` walks each row of the probability matrix with
  geometric skips at a per-row cap and accepts candidates with probability
  ``p_ij / cap``, so its cost scales with the number of candidates instead
  of ``n * m``.
"""
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, WeightAssignment
from .streams import stream

__all__ = [
    "BipartiteGraph",
    "PerformanceWarning",
    "BudgetExceeded",
    "generate_naive",
    "generate_thinned",
    "generate",
    "choose_orientation",
    "write_edge_list",
    "read_edge_list",
    "NAIVE_BUDGET",
]

NAIVE_BUDGET = 10**8
BLOCK = 4096
# rows whose cap exceeds this are swept slot by slot (cap raised to 1)
DENSE_CAP = 0.25
_NAIVE_CHUNK = 2**22


class PerformanceWarning(UserWarning):
    pass


class BudgetExceeded(RuntimeError):
    """A request would exceed a configured work budget."""


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Realised vertex/element graph in compressed adjacency form.

    ``vertex_ptr``/``vertex_adj`` list the elements of each vertex and
    ``element_ptr``/``element_adj`` the vertices of each element; both are
    sorted within each row.
    """

    params: ModelParams
    weights: WeightAssignment
    vertex_ptr: np.ndarray
    vertex_adj: np.ndarray
    element_ptr: np.ndarray
    element_adj: np.ndarray
    generator_tag: str
    seed: int

    @classmethod
    def from_pairs(cls, params, weights, vertices, elements, generator_tag, seed, n=None, m=None):
        n = params.n if n is None else n
        m = params.m if m is None else m
        vertices = np.asarray(vertices, dtype=np.int64)
        elements = np.asarray(elements, dtype=np.int64)
        order = np.lexsort((elements, vertices))
        v_sorted, e_by_v = vertices[order], elements[order]
        order = np.lexsort((vertices, elements))
        e_sorted, v_by_e = elements[order], vertices[order]
        vertex_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(v_sorted, minlength=n), out=vertex_ptr[1:])
        element_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(e_sorted, minlength=m), out=element_ptr[1:])
        arrays = [vertex_ptr, e_by_v, element_ptr, v_by_e]
        for arr in arrays:
            arr.setflags(write=False)
        return cls(params, weights, *arrays, generator_tag, seed)

    @property
    def n(self):
        return self.vertex_ptr.size - 1

    @property
    def m(self):
        return self.element_ptr.size - 1

    @property
    def num_edges(self):
        return int(self.vertex_adj.size)

    def vertex_elements(self, i):
        return self.vertex_adj[self.vertex_ptr[i]:self.vertex_ptr[i + 1]]

    def element_vertices(self, j):
        return self.element_adj[self.element_ptr[j]:self.element_ptr[j + 1]]

    def vertex_degrees(self):
        """Number of elements joined by each vertex (``|N_i|``)."""
        return np.diff(self.vertex_ptr)

    def element_sizes(self):
        return np.diff(self.element_ptr)

    def edges(self):
        """(vertex, element) pairs in vertex-major order."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.vertex_degrees())
        return rows, self.vertex_adj

    def validate(self):
        """Raise ``AssertionError`` unless the two adjacency views agree."""
        n, m = self.n, self.m
        for ptr, adj, bound in ((self.vertex_ptr, self.vertex_adj, m), (self.element_ptr, self.element_adj, n)):
            assert ptr[0] == 0 and ptr[-1] == adj.size
            assert np.all(np.diff(ptr) >= 0)
            if adj.size:
                assert adj.min() >= 0 and adj.max() < bound
                rows = np.repeat(np.arange(ptr.size - 1), np.diff(ptr))
                same_row = rows[1:] == rows[:-1]
                assert np.all(adj[1:][same_row] > adj[:-1][same_row]), "rows not strictly sorted"
        v, e = self.edges()
        rows = np.repeat(np.arange(m, dtype=np.int64), self.element_sizes())
        key_v = np.sort(v * m + e)
        key_e = np.sort(self.element_adj * m + rows)
        assert np.array_equal(key_v, key_e), "adjacency views are not transposes"

    def same_edges(self, other):
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.vertex_ptr, other.vertex_ptr)
            and np.array_equal(self.vertex_adj, other.vertex_adj)
        )


# ---------------------------------------------------------------------------
# naive oracle
# ---------------------------------------------------------------------------

def generate_naive(params, weights, seed, budget=NAIVE_BUDGET):
    """One Bernoulli trial per pair, rows (vertices) outer, elements inner.

    Refuses when ``n * m`` exceeds ``budget``; use :func:`generate_thinned`.
    """
    weights.check(params)
    n, m = params.n, params.m
    if n * m > budget:
        raise BudgetExceeded(
            f"naive generation needs {n * m} pair evaluations (budget {budget}); use generate_thinned"
        )
    a, b = weights.vertex_weights, weights.element_weights
    rng = stream(seed, "bipartite", "naive")
    rows_per_chunk = max(1, _NAIVE_CHUNK // max(m, 1))
    vs, es = [], []
    for lo in range(0, n, rows_per_chunk):
        hi = min(n, lo + rows_per_chunk)
        p = np.minimum(params.scale * a[lo:hi, None] * b[None, :], 1.0)
        hit = rng.random(p.shape) < p
        r, col = np.nonzero(hit)
        vs.append(r + lo)
        es.append(col)
    v = np.concatenate(vs) if vs else np.empty(0, np.int64)
    e = np.concatenate(es) if es else np.empty(0, np.int64)
    return BipartiteGraph.from_pairs(params, weights, v, e, "naive", seed)


# ---------------------------------------------------------------------------
# thinned sampler
# ---------------------------------------------------------------------------

def choose_orientation(params, weights):
    """Pick "vertex" or "element" major sweeping by expected work.

    Work is entity count plus expected candidate count; the cap of a row is
    set by the largest weight on the opposite side.
    """
    a, b = weights.vertex_weights, weights.element_weights
    n, m = a.size, b.size
    if n == 0 or m == 0:
        return "vertex"
    vcaps = np.minimum(params.scale * a * b.max(), 1.0)
    ecaps = np.minimum(params.scale * b * a.max(), 1.0)
    cost_v = n + m * vcaps.sum()
    cost_e = m + n * ecaps.sum()
    return "vertex" if cost_v <= cost_e else "element"


def _skip_candidates(rng, caps, width):
    """Candidate slots of a Bernoulli(cap) process over ``width`` slots per row.

    Gaps are geometric by inversion; each pass draws enough gaps to cover a
    row with high probability and rows that fall short continue from their
    last position. Surplus gaps past the row end are discarded.
    """
    rows_out, cols_out = [], []
    pos = np.full(caps.size, -1, dtype=np.int64)
    active = np.flatnonzero(caps > 0)
    log_q = np.log1p(-caps)
    while active.size:
        expect = (width - 1 - pos[active]) * caps[active]
        need = np.ceil(expect + 4.0 * np.sqrt(expect) + 4.0).astype(np.int64)
        rows = np.repeat(active, need)
        u = rng.random(rows.size)
        gaps = np.floor(np.log1p(-u) / log_q[rows]) + 1.0
        gaps = np.minimum(gaps, float(width + 1)).astype(np.int64)
        # positions = start + running sum of gaps within each row
        csum = np.cumsum(gaps)
        starts = np.cumsum(need) - need
        offsets = np.repeat(csum[starts] - gaps[starts], need)
        positions = np.repeat(pos[active], need) + csum - offsets
        inside = positions < width
        rows_out.append(rows[inside])
        cols_out.append(positions[inside])
        last = starts + need - 1
        unfinished = inside[last]
        pos[active[unfinished]] = positions[last[unfinished]]
        active = active[unfinished]
    if rows_out:
        return np.concatenate(rows_out), np.concatenate(cols_out)
    return np.empty(0, np.int64), np.empty(0, np.int64)


def _thin_block(params, row_w, col_w, col_max, lo, hi, orientation, seed, dense_cap):
    rng = stream(seed, "bipartite", orientation, lo // BLOCK)
    w = row_w[lo:hi]
    width = col_w.size
    caps = np.minimum(params.scale * w * col_max, 1.0)
    caps = np.where(caps > dense_cap, 1.0, caps)
    sparse = caps < 1.0
    rows_s, cols_s = _skip_candidates(rng, np.where(sparse, caps, 0.0), width)
    dense_rows = np.flatnonzero(~sparse)
    rows_d = np.repeat(dense_rows, width)
    cols_d = np.tile(np.arange(width, dtype=np.int64), dense_rows.size)
    rows = np.concatenate([rows_s, rows_d])
    cols = np.concatenate([cols_s, cols_d])
    p = np.minimum(params.scale * w[rows] * col_w[cols], 1.0)
    accept = rng.random(rows.size) * caps[rows] < p
    return rows[accept] + lo, cols[accept], int(np.count_nonzero(params.scale * w * col_max >= 1.0))


def generate_thinned(params, weights, seed, orientation=None, threads=1, dense_cap=DENSE_CAP):
    """Exact sampler by geometric skipping and thinning.

    Rows (vertices or elements, see :func:`choose_orientation`) are handled
    in blocks of ``BLOCK`` with one random stream per block, so the output
    depends on ``(params, weights, seed)`` only and not on ``threads``.
    Rows with a cap above ``dense_cap`` are swept over every slot, which is
    thinning with the cap raised to 1.
    """
    weights.check(params)
    if orientation is None:
        orientation = choose_orientation(params, weights)
    a, b = weights.vertex_weights, weights.element_weights
    if orientation == "vertex":
        row_w, col_w = a, b
    elif orientation == "element":
        row_w, col_w = b, a
    else:
        raise ValueError(f"orientation must be 'vertex' or 'element', got {orientation!r}")
    nrows = row_w.size
    if nrows == 0 or col_w.size == 0:
        return BipartiteGraph.from_pairs(params, weights, [], [], "thinned", seed)
    col_max = float(col_w.max())
    bounds = [(lo, min(nrows, lo + BLOCK)) for lo in range(0, nrows, BLOCK)]

    def work(bound):
        return _thin_block(params, row_w, col_w, col_max, bound[0], bound[1], orientation, seed, dense_cap)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(bd) for bd in bounds]
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    clamped = sum(p[2] for p in parts)
    if nrows >= 16 and clamped > 0.1 * nrows:
        warnings.warn(
            f"{clamped} of {nrows} {orientation} rows have cap 1; heavy-tailed weights on the"
            " other side make thinning no cheaper than the naive sweep",
            PerformanceWarning,
            stacklevel=2,
        )
    if orientation == "vertex":
        v, e = rows, cols
    else:
        v, e = cols, rows
    return BipartiteGraph.from_pairs(params, weights, v, e, "thinned", seed)


def generate(params, weights, seed, generator="auto", threads=1):
    """Dispatch on ``generator`` in {"naive", "thinned", "auto"}.

    ``auto`` uses the naive oracle only when ``n * m <= NAIVE_BUDGET``.
    """
    if generator == "auto":
        generator = "naive" if params.n * params.m <= NAIVE_BUDGET else "thinned"
    if generator == "naive":
        return generate_naive(params, weights, seed)
    if generator == "thinned":
        return generate_thinned(params, weights, seed, threads=threads)
    raise ValueError(f"unknown generator {generator!r}")


# ---------------------------------------------------------------------------
# edge list text format
# ---------------------------------------------------------------------------

def _header(bip):
    p = bip.params
    return (
        f"# rig-bipartite n={p.n} m={p.m} alpha={p.alpha!r} beta={p.beta!r} c={p.c!r}"
        f" seed={bip.seed} gen={bip.generator_tag}"
    )


def write_edge_list(bip, fh):
    """Write one ``i j`` line per edge (0-based) after a provenance header."""
    fh.write(_header(bip) + "\n")
    v, e = bip.edges()
    for i, j in zip(v.tolist(), e.tolist()):
        fh.write(f"{i} {j}\n")


def read_edge_list(fh):
    """Parse :func:`write_edge_list` output into (header fields, vertices, elements)."""
    header = fh.readline().split()
    if header[:2] != ["#", "rig-bipartite"]:
        raise ValueError("missing '# rig-bipartite' header")
    fields = dict(item.split("=", 1) for item in header[2:])
    pairs = [line.split() for line in fh if line.strip()]
    data = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    return fields, data[:, 0], data[:, 1]
