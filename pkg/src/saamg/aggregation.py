"""Greedy root-node aggregation and the tentative prolongator."""
from dataclasses import dataclass

import numpy as np

from ._jit import dispatch, njit
from .sparse import SparseMatrix

UNASSIGNED = -1


@dataclass
class Aggregation:
    """Partition of fine vertices into aggregates.

    ``vertex_to_aggregate[i]`` is the aggregate of vertex ``i`` and
    ``roots[k]`` the root vertex of aggregate ``k``.
    """

    vertex_to_aggregate: np.ndarray
    roots: np.ndarray

    @property
    def num_aggregates(self):
        return int(self.roots.size)

    @property
    def n_fine(self):
        return int(self.vertex_to_aggregate.size)

    def members(self, k):
        return np.flatnonzero(self.vertex_to_aggregate == k)

    def sizes(self):
        return np.bincount(self.vertex_to_aggregate, minlength=self.num_aggregates)

    def to_csv(self, path):
        """Debug dump: ``vertex,aggregate,is_root`` per fine vertex."""
        is_root = np.zeros(self.n_fine, dtype=int)
        is_root[self.roots] = 1
        with open(path, "w") as fh:
            fh.write("vertex,aggregate,is_root\n")
            for v, (a, r) in enumerate(zip(self.vertex_to_aggregate, is_root)):
                fh.write(f"{v},{a},{r}\n")


def _aggregate_impl(row_offsets, col_indices, values, mask):
    n = row_offsets.shape[0] - 1
    agg = np.full(n, -1, dtype=np.int64)
    roots = np.empty(n, dtype=np.int64)
    nagg = 0

    # phase 1: roots whose whole strong neighbourhood is still free
    for i in range(n):
        if agg[i] != -1:
            continue
        has_strong = False
        free = True
        for p in range(row_offsets[i], row_offsets[i + 1]):
            j = col_indices[p]
            if j == i or not mask[p]:
                continue
            has_strong = True
            if agg[j] != -1:
                free = False
                break
        if not (has_strong and free):
            continue
        agg[i] = nagg
        for p in range(row_offsets[i], row_offsets[i + 1]):
            j = col_indices[p]
            if j != i and mask[p]:
                agg[j] = nagg
        roots[nagg] = i
        nagg += 1

    # phase 2: attach leftovers through their largest strong connection
    # into a phase-1 aggregate; ties go to the lowest aggregate id
    after_phase1 = agg.copy()
    for i in range(n):
        if after_phase1[i] != -1:
            continue
        best = -1
        best_mag = -1.0
        for p in range(row_offsets[i], row_offsets[i + 1]):
            j = col_indices[p]
            if j == i or not mask[p]:
                continue
            a = after_phase1[j]
            if a == -1:
                continue
            mag = abs(values[p])
            if mag > best_mag or (mag == best_mag and a < best):
                best_mag = mag
                best = a
        if best != -1:
            agg[i] = best

    # phase 3: whatever is left becomes a singleton
    for i in range(n):
        if agg[i] == -1:
            agg[i] = nagg
            roots[nagg] = i
            nagg += 1
    return agg, roots[:nagg].copy()


_aggregate_kernel = dispatch(njit(_aggregate_impl), _aggregate_impl)


def aggregate(A, mask):
    """Aggregate the vertices of ``A`` over the strong graph given by ``mask``.

    Phase 1 scans vertices in ascending order and makes ``i`` a root when
    ``i`` and all its strong neighbours are unaggregated (vertices without
    any strong neighbour are skipped). Phase 2 attaches each leftover
    vertex to the phase-1 aggregate reached via its largest-magnitude
    strong connection in ``A``. Phase 3 turns remaining vertices into
    singletons.
    """
    if A.nrows != A.ncols:
        raise ValueError("aggregation requires a square matrix")
    mask = np.asarray(mask, dtype=np.bool_)
    if mask.shape != (A.nnz,):
        raise ValueError("strength mask is not aligned with the matrix pattern")
    agg, roots = _aggregate_kernel(A.row_offsets, A.col_indices, A.values, mask)
    return Aggregation(agg, roots)


def tentative_prolongator(agg, n_fine=None):
    """Piecewise-constant injection of the constant vector over aggregates."""
    v2a = np.asarray(agg.vertex_to_aggregate)
    n = v2a.size if n_fine is None else int(n_fine)
    if v2a.size != n:
        raise ValueError(f"aggregation covers {v2a.size} vertices, expected {n}")
    if np.any(v2a < 0) or np.any(v2a >= agg.num_aggregates):
        raise ValueError("aggregation leaves a vertex unassigned")
    return SparseMatrix(n, agg.num_aggregates, np.arange(n + 1), v2a, np.ones(n))
