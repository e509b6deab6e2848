"""Compressed sparse row matrices and the products built on them."""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._kernels import coalesce, expand_rows


@dataclass(eq=False)
class SparseMatrix:
    """Real CSR matrix.

    Column indices are strictly increasing within each row. Explicit zeros
    are legal and take part in every pattern-based decision (strength,
    dropping, operator complexity). Instances are treated as immutable:
    no function in this package writes into the arrays of its inputs.
    """

    nrows: int
    ncols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray
    _rows: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.nrows = int(self.nrows)
        self.ncols = int(self.ncols)
        self.row_offsets = np.ascontiguousarray(self.row_offsets, dtype=np.int64)
        self.col_indices = np.ascontiguousarray(self.col_indices, dtype=np.int64)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.row_offsets.shape != (self.nrows + 1,):
            raise ValueError("row_offsets must have length nrows + 1")
        if self.col_indices.shape != self.values.shape:
            raise ValueError("col_indices and values differ in length")
        if self.row_offsets[0] != 0 or self.row_offsets[-1] != self.col_indices.size:
            raise ValueError("row_offsets must start at 0 and end at nnz")

    # ------------------------------------------------------------ builders
    @classmethod
    def from_coo(cls, rows, cols, vals, shape):
        """Assemble from triplets; duplicate entries are summed."""
        nrows, ncols = shape
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= nrows):
            raise ValueError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= ncols):
            raise ValueError("column index out of range")
        off, ci, v = coalesce(rows, cols, vals, nrows, ncols)
        return cls(nrows, ncols, off, ci, v)

    @classmethod
    def from_dense(cls, dense, keep_zeros=False):
        dense = np.atleast_2d(np.asarray(dense, dtype=np.float64))
        if keep_zeros:
            rows, cols = np.indices(dense.shape)
            rows, cols = rows.ravel(), cols.ravel()
        else:
            rows, cols = np.nonzero(dense)
        return cls.from_coo(rows, cols, dense[rows, cols], dense.shape)

    @classmethod
    def identity(cls, n):
        idx = np.arange(n)
        return cls(n, n, np.arange(n + 1), idx, np.ones(n))

    @classmethod
    def diag(cls, d):
        d = np.asarray(d, dtype=np.float64)
        n = d.size
        return cls(n, n, np.arange(n + 1), np.arange(n), d.copy())

    @classmethod
    def from_scipy(cls, m):
        m = m.tocsr()
        m.sum_duplicates()
        m.sort_indices()
        return cls(m.shape[0], m.shape[1], m.indptr, m.indices, m.data)

    # ------------------------------------------------------------- queries
    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return int(self.col_indices.size)

    @property
    def row_indices(self):
        """Row index of each stored entry (cached)."""
        if self._rows is None:
            self._rows = expand_rows(self.row_offsets)
        return self._rows

    @property
    def T(self):
        return transpose(self)

    def row(self, i):
        s, e = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[s:e], self.values[s:e]

    def row_nnz(self):
        return np.diff(self.row_offsets)

    def diagonal(self):
        return diagonal(self)

    def row_sums(self):
        return row_sums(self)

    def to_dense(self):
        out = np.zeros(self.shape)
        np.add.at(out, (self.row_indices, self.col_indices), self.values)
        return out

    def to_scipy(self):
        import scipy.sparse as sp

        return sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets), shape=self.shape
        )

    def with_values(self, values):
        """Same pattern, new values."""
        return SparseMatrix(
            self.nrows, self.ncols, self.row_offsets, self.col_indices, values
        )

    def check(self):
        """Raise ``ValueError`` if the CSR invariants do not hold."""
        if np.any(np.diff(self.row_offsets) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        if self.nnz:
            if self.col_indices.min() < 0 or self.col_indices.max() >= self.ncols:
                raise ValueError("column index out of range")
            rows = self.row_indices
            same_row = rows[1:] == rows[:-1]
            if np.any(self.col_indices[1:][same_row] <= self.col_indices[:-1][same_row]):
                raise ValueError("column indices must be strictly increasing per row")
        return self

    def __matmul__(self, other):
        if isinstance(other, SparseMatrix):
            return spmm(self, other)
        return spmv(self, other)

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"


# ------------------------------------------------------------------ kernels

def spmv(A, x):
    """``y = A x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != A.ncols:
        raise ValueError(f"dimension mismatch: A is {A.shape}, x has shape {x.shape}")
    return _kernels.spmv_kernel(A.row_offsets, A.col_indices, A.values, x)


def spmm(A, B):
    """Sparse product ``A B``; every symbolically produced entry is stored."""
    if A.ncols != B.nrows:
        raise ValueError(f"dimension mismatch: {A.shape} times {B.shape}")
    off, cols, vals = _kernels.spmm_kernel(
        A.row_offsets, A.col_indices, A.values,
        B.row_offsets, B.col_indices, B.values, B.ncols,
    )
    return SparseMatrix(A.nrows, B.ncols, off, cols, vals)


def transpose(A):
    order = np.argsort(A.col_indices, kind="stable")
    counts = np.bincount(A.col_indices, minlength=A.ncols)
    off = np.zeros(A.ncols + 1, dtype=np.int64)
    np.cumsum(counts, out=off[1:])
    return SparseMatrix(A.ncols, A.nrows, off, A.row_indices[order], A.values[order])


def galerkin(P, A):
    """Coarse operator ``P^T A P``."""
    if A.nrows != A.ncols:
        raise ValueError("A must be square")
    if P.nrows != A.nrows:
        raise ValueError(f"dimension mismatch: P is {P.shape}, A is {A.shape}")
    return spmm(transpose(P), spmm(A, P))


def add(A, B, alpha=1.0, beta=1.0):
    """``alpha A + beta B`` on the union pattern (zeros are kept)."""
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    rows = np.concatenate((A.row_indices, B.row_indices))
    cols = np.concatenate((A.col_indices, B.col_indices))
    vals = np.concatenate((alpha * A.values, beta * B.values))
    off, c, v = coalesce(rows, cols, vals, A.nrows, A.ncols)
    return SparseMatrix(A.nrows, A.ncols, off, c, v)


def scale_rows(A, d):
    """``diag(d) A``."""
    return A.with_values(A.values * np.asarray(d, dtype=np.float64)[A.row_indices])


def diagonal_positions(A):
    """Index into ``A.values`` of each row's diagonal entry, -1 if unstored."""
    pos = np.full(A.nrows, -1, dtype=np.int64)
    rows = A.row_indices
    hit = np.flatnonzero(rows == A.col_indices)
    pos[rows[hit]] = hit
    return pos


def diagonal(A):
    """Stored diagonal; rows without a stored diagonal give 0."""
    n = min(A.nrows, A.ncols)
    out = np.zeros(n)
    rows = A.row_indices
    hit = rows == A.col_indices
    out[rows[hit]] = A.values[hit]
    return out


def row_sums(A):
    return np.bincount(A.row_indices, weights=A.values, minlength=A.nrows)


def abs_row_sums(A):
    return np.bincount(A.row_indices, weights=np.abs(A.values), minlength=A.nrows)


def transpose_positions(A):
    """For each stored (i, j), the position of (j, i) in ``A.values`` or -1.

    Relies on CSR order: the flattened keys ``i * ncols + j`` are sorted.
    """
    if A.nnz == 0:
        return np.empty(0, dtype=np.int64)
    n = max(A.ncols, 1)
    keys = A.row_indices * n + A.col_indices
    tkeys = A.col_indices * n + A.row_indices
    pos = np.minimum(np.searchsorted(keys, tkeys), A.nnz - 1)
    return np.where(keys[pos] == tkeys, pos, -1)


def drop_entries(A, keep):
    """Sub-matrix keeping the stored entries flagged in the boolean ``keep``."""
    keep = np.asarray(keep, dtype=bool)
    counts = np.bincount(A.row_indices[keep], minlength=A.nrows)
    off = np.zeros(A.nrows + 1, dtype=np.int64)
    np.cumsum(counts, out=off[1:])
    return SparseMatrix(A.nrows, A.ncols, off, A.col_indices[keep], A.values[keep])


def kron(A, B):
    """Kronecker product ``A (x) B``."""
    ra, ca, va = A.row_indices, A.col_indices, A.values
    rb, cb, vb = B.row_indices, B.col_indices, B.values
    rows = (ra[:, None] * B.nrows + rb[None, :]).ravel()
    cols = (ca[:, None] * B.ncols + cb[None, :]).ravel()
    vals = (va[:, None] * vb[None, :]).ravel()
    return SparseMatrix.from_coo(rows, cols, vals, (A.nrows * B.nrows, A.ncols * B.ncols))


def submatrix(A, rows, cols):
    """``A[rows][:, cols]`` for sorted index arrays, keeping stored zeros."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    colmap = np.full(A.ncols, -1, dtype=np.int64)
    colmap[cols] = np.arange(cols.size)
    rowmap = np.full(A.nrows, -1, dtype=np.int64)
    rowmap[rows] = np.arange(rows.size)
    new_r = rowmap[A.row_indices]
    new_c = colmap[A.col_indices]
    keep = (new_r >= 0) & (new_c >= 0)
    return SparseMatrix.from_coo(new_r[keep], new_c[keep], A.values[keep], (rows.size, cols.size))
