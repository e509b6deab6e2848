"""Strong/weak classification of matrix connections."""
import numpy as np

from .sparse import SparseMatrix, diagonal, transpose_positions


def classic_strength(A, theta, symmetrize=True):
    """Boolean mask over ``A``'s stored entries, True where strong.

    Off-diagonal ``(i, j)`` is strong iff ``|a_ij| >= theta * sqrt(a_ii a_jj)``.
    Pairs whose diagonal product is not positive are weak. Diagonal entries
    are always flagged strong. With ``symmetrize`` an entry stays strong only
    if its stored transpose passes as well.
    """
    if A.nrows != A.ncols:
        raise ValueError("strength requires a square matrix")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    d = diagonal(A)
    rows, cols = A.row_indices, A.col_indices
    prod = d[rows] * d[cols]
    is_diag = rows == cols
    strong = (prod > 0.0) & (np.abs(A.values) >= theta * np.sqrt(np.maximum(prod, 0.0)))
    strong |= is_diag
    if symmetrize:
        tpos = transpose_positions(A)
        has_t = tpos >= 0
        strong[has_t] &= strong[tpos[has_t]]
    return strong


def strong_neighbors(A, mask, i):
    """Strong off-diagonal neighbours of vertex ``i``."""
    s, e = A.row_offsets[i], A.row_offsets[i + 1]
    cols = A.col_indices[s:e]
    return cols[mask[s:e] & (cols != i)]


def distance_laplacian(A, coords):
    """Auxiliary matrix on ``A``'s pattern with ``-1/distance`` off-diagonals.

    The diagonal makes each row sum to zero. ``A`` must store every
    diagonal entry, so that strength computed on the result aligns
    entry-for-entry with ``A``.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    if coords.shape[0] != A.nrows:
        raise ValueError(f"need {A.nrows} coordinates, got {coords.shape[0]}")
    rows, cols = A.row_indices, A.col_indices
    off = rows != cols
    if np.count_nonzero(~off) != A.nrows:
        raise ValueError("distance Laplacian needs a stored diagonal in every row")
    dist = np.sqrt(np.sum((coords[rows[off]] - coords[cols[off]]) ** 2, axis=1))
    if np.any(dist == 0.0):
        i = rows[off][np.argmax(dist == 0.0)]
        raise ValueError(f"coincident coordinates on a stored off-diagonal in row {i}")
    vals = np.zeros(A.nnz)
    vals[off] = -1.0 / dist
    sums = np.bincount(rows[off], weights=vals[off], minlength=A.nrows)
    vals[~off] = -sums[rows[~off]]
    return SparseMatrix(A.nrows, A.ncols, A.row_offsets, A.col_indices, vals)
