"""CSR kernels in two flavours: numba loops and vectorized numpy.

The public wrappers in :mod:`saamg.sparse.csr` pick one through
:func:`saamg._jit.dispatch`. Both flavours keep every entry the symbolic
product produces, including exact numerical zeros.
"""
import numpy as np

from .._jit import dispatch, njit


# --------------------------------------------------------------------- spmv

@njit
def _spmv_loop(row_offsets, col_indices, values, x):
    n = row_offsets.shape[0] - 1
    y = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for p in range(row_offsets[i], row_offsets[i + 1]):
            acc += values[p] * x[col_indices[p]]
        y[i] = acc
    return y


def _spmv_numpy(row_offsets, col_indices, values, x):
    n = row_offsets.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(row_offsets))
    return np.bincount(rows, weights=values * x[col_indices], minlength=n)


spmv_kernel = dispatch(_spmv_loop, _spmv_numpy)


# --------------------------------------------------------------------- spmm

@njit
def _spmm_loop(a_off, a_col, a_val, b_off, b_col, b_val, ncols):
    nrows = a_off.shape[0] - 1
    marker = np.full(ncols, -1, dtype=np.int64)
    counts = np.zeros(nrows + 1, dtype=np.int64)
    # symbolic pass
    for i in range(nrows):
        c = 0
        for p in range(a_off[i], a_off[i + 1]):
            k = a_col[p]
            for q in range(b_off[k], b_off[k + 1]):
                j = b_col[q]
                if marker[j] != i:
                    marker[j] = i
                    c += 1
        counts[i + 1] = c
    offsets = np.cumsum(counts)
    nnz = offsets[nrows]
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    acc = np.zeros(ncols)
    marker[:] = -1
    # numeric pass
    for i in range(nrows):
        start = offsets[i]
        c = start
        for p in range(a_off[i], a_off[i + 1]):
            k = a_col[p]
            a = a_val[p]
            for q in range(b_off[k], b_off[k + 1]):
                j = b_col[q]
                if marker[j] != i:
                    marker[j] = i
                    cols[c] = j
                    acc[j] = a * b_val[q]
                    c += 1
                else:
                    acc[j] += a * b_val[q]
        row_cols = np.sort(cols[start:c])
        for t in range(c - start):
            j = row_cols[t]
            cols[start + t] = j
            vals[start + t] = acc[j]
    return offsets, cols, vals


def _spmm_numpy(a_off, a_col, a_val, b_off, b_col, b_val, ncols):
    nrows = a_off.shape[0] - 1
    a_rows = np.repeat(np.arange(nrows), np.diff(a_off))
    b_len = np.diff(b_off)
    counts = b_len[a_col]
    total = int(counts.sum())
    # index of every (A entry, B entry) pair
    owner = np.repeat(np.arange(a_col.shape[0]), counts)
    first = np.cumsum(counts) - counts
    q = b_off[a_col][owner] + (np.arange(total) - first[owner])
    rows = a_rows[owner]
    cols = b_col[q]
    prods = a_val[owner] * b_val[q]
    return coalesce(rows, cols, prods, nrows, ncols)


spmm_kernel = dispatch(_spmm_loop, _spmm_numpy)


# ----------------------------------------------------------------- helpers

def coalesce(rows, cols, vals, nrows, ncols):
    """Sort COO triplets into CSR order and sum duplicates.

    Returns ``(row_offsets, col_indices, values)``.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    keys = rows * np.int64(max(ncols, 1)) + cols
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    vals = vals[order]
    if keys.size:
        starts = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
        summed = np.add.reduceat(vals, starts)
        keys = keys[starts]
    else:
        summed = vals
    out_rows = keys // max(ncols, 1)
    out_cols = keys - out_rows * max(ncols, 1)
    offsets = np.zeros(nrows + 1, dtype=np.int64)
    np.cumsum(np.bincount(out_rows, minlength=nrows), out=offsets[1:])
    return offsets, out_cols, summed


def expand_rows(row_offsets):
    """Row index of every stored entry."""
    n = row_offsets.shape[0] - 1
    return np.repeat(np.arange(n, dtype=np.int64), np.diff(row_offsets))
