"""Filtered matrices, diagonal approximations and post-aggregation pruning."""
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ._jit import dispatch, njit
from .sparse import (
    SparseMatrix,
    abs_row_sums,
    add,
    diagonal,
    diagonal_positions,
    drop_entries,
    row_sums,
    transpose_positions,
)


class LumpStatus(IntEnum):
    """How the alternative lumping treated a row."""

    UNTOUCHED = 0  # nothing removed
    DIAGONAL = 1  # positive (or zero) removed sum lumped to the diagonal
    POSITIVES = 2  # absorbed by scaling kept positive off-diagonals
    SPLIT = 3  # diagonal + kept negatives, growth bound satisfied
    POSITIVES_FLIPPED = 4  # no kept negatives, zeroed positives took the rest
    SKIPPED = 5  # fallback: weak entries dropped without compensation
    BEST_EFFORT = 6  # growth bound infeasible, least-growth split used


@dataclass
class FilteredMatrix:
    """A filtered operator plus the rows where lumping was abandoned."""

    matrix: SparseMatrix
    skipped_rows: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    status: np.ndarray = None


@dataclass
class DiagonalApprox:
    values: np.ndarray
    kind: str  # "standard", "one_norm" or "one_norm_safeguarded"


def _require_diagonal(A):
    if A.nrows != A.ncols:
        raise ValueError("filtering requires a square matrix")
    dpos = diagonal_positions(A)
    if np.any(dpos < 0):
        raise ValueError(f"row {int(np.argmax(dpos < 0))} has no stored diagonal")
    return dpos


def _check_mask(A, mask):
    mask = np.asarray(mask, dtype=np.bool_)
    if mask.shape != (A.nnz,):
        raise ValueError("strength mask is not aligned with the matrix pattern")
    return mask


def filter_standard(A, mask):
    """Drop weak off-diagonals and add them to the diagonal."""
    mask = _check_mask(A, mask)
    is_diag = A.row_indices == A.col_indices
    weak = ~mask & ~is_diag
    lump = np.bincount(A.row_indices[weak], weights=A.values[weak], minlength=A.nrows)
    kept = drop_entries(A, mask | is_diag)
    dpos = diagonal_positions(kept)
    if np.all(dpos >= 0):
        vals = kept.values.copy()
        vals[dpos] += lump
        return FilteredMatrix(kept.with_values(vals))
    return FilteredMatrix(add(kept, SparseMatrix.diag(lump)))


# ----------------------------------------------------------- alternative lump

def lump_split(a_ii, kappa_minus, r_hat, growth):
    """Most negative diagonal share ``d`` in ``[r_hat, 0]`` meeting the bound.

    After lumping, the diagonal is ``a_ii + d`` and the kept negatives carry
    ``r_hat - d``. Feasible ``d`` keep the diagonal positive and the
    off-diagonal/diagonal ratio at most ``growth``. Returns ``(d, feasible)``;
    if infeasible, ``d`` is the endpoint with the smaller ratio.
    """
    n0 = -kappa_minus - r_hat
    c0 = n0 - growth * a_ii
    c1 = 1.0 - growth
    lo = r_hat
    hi = 0.0
    feasible = True
    if c1 > 0.0:
        hi = min(hi, -c0 / c1)
    elif c1 < 0.0:
        lo = max(lo, -c0 / c1)
    elif c0 > 0.0:
        feasible = False
    if lo > hi or a_ii + lo <= 0.0:
        feasible = False
    if feasible:
        return lo, True
    # least growth among the admissible endpoints
    best = 0.0
    best_ratio = n0 / a_ii
    if a_ii + r_hat > 0.0:
        ratio = (n0 + r_hat) / (a_ii + r_hat)
        if ratio <= best_ratio:
            best = r_hat
    return best, False


def boundary_lump(a_ii, kappa_minus, r_hat, growth):
    """Closed-form diagonal share where the ratio equals ``growth`` exactly.

    Signed counterpart of the ``r*`` expression: the diagonal becomes
    ``a_ii + d`` with ``d = (r_hat + kappa_minus + growth a_ii) / (1 - growth)``.
    """
    return (r_hat + kappa_minus + growth * a_ii) / (1.0 - growth)


def _build_offlmp(lump_split):
    def _offlmp_impl(row_offsets, col_indices, values, mask, tau):
        n = row_offsets.shape[0] - 1
        out = values.copy()
        keep = mask.copy()
        status = np.zeros(n, dtype=np.int64)
        for i in range(n):
            s = row_offsets[i]
            e = row_offsets[i + 1]
            dpos = -1
            a_ii = 0.0
            r = 0.0
            kp = 0.0
            km = 0.0
            offabs = 0.0
            nremoved = 0
            for p in range(s, e):
                j = col_indices[p]
                v = values[p]
                if j == i:
                    dpos = p
                    a_ii = v
                    keep[p] = True
                    continue
                offabs += abs(v)
                if not mask[p]:
                    r += v
                    nremoved += 1
                elif v > 0.0:
                    kp += v
                elif v < 0.0:
                    km += v
            if nremoved == 0:
                continue
            if r >= 0.0:
                out[dpos] = a_ii + r
                status[i] = 1
                continue
            if -r <= kp:
                scale = 1.0 + r / kp
                for p in range(s, e):
                    if col_indices[p] != i and mask[p] and values[p] > 0.0:
                        out[p] = values[p] * scale
                status[i] = 2
                continue
            r_hat = r + kp
            if a_ii != 0.0:
                growth = tau * offabs / abs(a_ii)
            else:
                growth = np.inf
            if km < 0.0:
                if a_ii <= 0.0:
                    status[i] = 5
                    continue
                d, feasible = lump_split(a_ii, km, r_hat, growth)
                delta = (r_hat - d) / km
                for p in range(s, e):
                    if col_indices[p] == i or not mask[p]:
                        continue
                    if values[p] > 0.0:
                        keep[p] = False
                    elif values[p] < 0.0:
                        out[p] = values[p] * (1.0 + delta)
                out[dpos] = a_ii + d
                status[i] = 3 if feasible else 6
            else:
                if kp > 0.0 and a_ii > 0.0 and -r_hat <= growth * a_ii:
                    scale = 1.0 + r / kp
                    for p in range(s, e):
                        if col_indices[p] != i and mask[p] and values[p] > 0.0:
                            out[p] = values[p] * scale
                    status[i] = 4
                else:
                    status[i] = 5
        return out, keep, status

    return _offlmp_impl


_offlmp_py = _build_offlmp(lump_split)
_offlmp_jit = njit(_build_offlmp(njit(lump_split, cache=False)), cache=False)
_offlmp_kernel = dispatch(_offlmp_jit, _offlmp_py)


def filter_offlmp(A, mask, tau=1.1):
    """Filter with the sign-aware lumping that limits diagonal-dominance loss.

    Removed weak entries are redistributed to the kept positive
    off-diagonals first, then to the diagonal, then to the kept negatives,
    so that the off-diagonal/diagonal ratio of each row grows by at most
    ``tau``. Rows where no compensation is possible keep their strong
    entries unchanged and are listed in ``skipped_rows``.
    """
    if tau < 1.0:
        raise ValueError(f"tau must be >= 1, got {tau}")
    mask = _check_mask(A, mask)
    _require_diagonal(A)
    vals, keep, status = _offlmp_kernel(
        A.row_offsets, A.col_indices, A.values, mask, float(tau)
    )
    matrix = drop_entries(A.with_values(vals), keep)
    skipped = np.flatnonzero(status == LumpStatus.SKIPPED)
    return FilteredMatrix(matrix, skipped, status)


def diagonal_dominance(A):
    """Per-row sum of |off-diagonals| over |diagonal| (inf for zero diagonal)."""
    d = diagonal(A)
    off = abs_row_sums(A) - np.abs(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = off / np.abs(d)
    ratio[d == 0.0] = np.inf
    return ratio


# ------------------------------------------------------------------ diagonals

def diag_standard(Abar):
    return DiagonalApprox(diagonal(Abar), "standard")


def diag_one_norm(Abar):
    return DiagonalApprox(abs_row_sums(Abar), "one_norm")


def safeguard(d, Abar):
    """Raise 1-norm diagonal entries so root basis values stay >= 1/3.

    Zero entries become 1; rows with positive row sum ``s`` and
    ``d < 2 s`` get ``2 s``. Applied to every row.
    """
    if d.kind != "one_norm":
        raise ValueError(f"safeguard expects a one_norm diagonal, got {d.kind}")
    s = row_sums(Abar)
    out = d.values.copy()
    out[out == 0.0] = 1.0
    boost = (s > 0.0) & (out < 2.0 * s)
    out[boost] = 2.0 * s[boost]
    return DiagonalApprox(out, "one_norm_safeguarded")


# -------------------------------------------------------------------- sprsfy

@njit
def _sprsfy_mark(a_off, a_col, a_mask, v2a, roots, b_off, b_col, m_off, members):
    nagg = roots.shape[0]
    drop = np.zeros(b_col.shape[0], dtype=np.bool_)
    cand_stamp = np.full(nagg, -1, dtype=np.int64)
    strong_stamp = np.full(nagg, -1, dtype=np.int64)
    count = np.zeros(nagg, dtype=np.int64)
    where = np.full(nagg, -1, dtype=np.int64)
    touched = np.empty(nagg, dtype=np.int64)
    for k in range(nagg):
        root = roots[k]
        # aggregates holding a strong neighbour of the root
        for p in range(a_off[root], a_off[root + 1]):
            j = a_col[p]
            if j != root and a_mask[p]:
                strong_stamp[v2a[j]] = k
        ncand = 0
        for p in range(a_off[root], a_off[root + 1]):
            j = a_col[p]
            if j == root or a_mask[p]:
                continue
            c = v2a[j]
            if c == k or strong_stamp[c] == k or cand_stamp[c] == k:
                continue
            cand_stamp[c] = k
            count[c] = 0
            touched[ncand] = c
            ncand += 1
        if ncand == 0:
            continue
        for t in range(m_off[k], m_off[k + 1]):
            v = members[t]
            if v == root:
                continue
            for q in range(b_off[v], b_off[v + 1]):
                u = b_col[q]
                if u == v:
                    continue
                c = v2a[u]
                if cand_stamp[c] == k:
                    count[c] += 1
                    where[c] = q
        for t in range(ncand):
            c = touched[t]
            if count[c] == 1:
                drop[where[c]] = True
    return drop


def _sprsfy_mark_numpy(a_off, a_col, a_mask, v2a, roots, b_off, b_col, m_off, members):
    return _sprsfy_mark.py_func(a_off, a_col, a_mask, v2a, roots, b_off, b_col, m_off, members)


_sprsfy_kernel = dispatch(_sprsfy_mark, _sprsfy_mark_numpy)


def sprsfy(A, Abar, mask, agg):
    """Prune lone strong links into aggregates the root sees only weakly.

    For each aggregate, the candidate aggregates are those reached from the
    root through weak connections of ``A`` with no strong connection to the
    root. If the non-root members hold exactly one strong link into a
    candidate, that link is dropped from the filtered matrix and folded
    into the diagonal; the transposed entry is dropped too.
    """
    mask = _check_mask(A, mask)
    B = Abar.matrix
    dpos = _require_diagonal(B)
    v2a = np.asarray(agg.vertex_to_aggregate, dtype=np.int64)
    order = np.argsort(v2a, kind="stable")
    m_off = np.zeros(agg.num_aggregates + 1, dtype=np.int64)
    np.cumsum(np.bincount(v2a, minlength=agg.num_aggregates), out=m_off[1:])
    drop = _sprsfy_kernel(
        A.row_offsets, A.col_indices, mask, v2a,
        np.asarray(agg.roots, dtype=np.int64),
        B.row_offsets, B.col_indices, m_off, order.astype(np.int64),
    )
    if not drop.any():
        return FilteredMatrix(B, Abar.skipped_rows, Abar.status)
    tpos = transpose_positions(B)
    mirrored = tpos[drop]
    drop[mirrored[mirrored >= 0]] = True
    vals = B.values.copy()
    np.add.at(vals, dpos[B.row_indices[drop]], B.values[drop])
    pruned = drop_entries(B.with_values(vals), ~drop)
    return FilteredMatrix(pruned, Abar.skipped_rows, Abar.status)
