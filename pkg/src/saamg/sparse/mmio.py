"""MatrixMarket coordinate I/O (real, general or symmetric)."""
import numpy as np

from .csr import SparseMatrix


class MatrixMarketError(ValueError):
    pass


def read_matrix_market(path):
    """Read a real coordinate MatrixMarket file.

    Symmetric storage is expanded to the full pattern and duplicate entries
    are summed. Indices in the file are 1-based.
    """
    with open(path, "r") as fh:
        header = fh.readline()
        tokens = header.strip().split()
        if len(tokens) != 5 or tokens[0] != "%%MatrixMarket":
            raise MatrixMarketError(f"{path}: malformed header {header.strip()!r}")
        obj, fmt, field, symmetry = (t.lower() for t in tokens[1:])
        if obj != "matrix" or fmt != "coordinate":
            raise MatrixMarketError(f"{path}: only 'matrix coordinate' is supported")
        if field not in ("real", "integer"):
            raise MatrixMarketError(f"{path}: unsupported field {field!r}")
        if symmetry not in ("general", "symmetric"):
            raise MatrixMarketError(f"{path}: unsupported symmetry {symmetry!r}")

        line = fh.readline()
        while line and (line.startswith("%") or not line.strip()):
            line = fh.readline()
        try:
            nrows, ncols, nnz = (int(t) for t in line.split())
        except ValueError:
            raise MatrixMarketError(f"{path}: malformed size line {line.strip()!r}") from None

        body = [ln for ln in fh if ln.strip() and not ln.startswith("%")]

    if len(body) != nnz:
        raise MatrixMarketError(f"{path}: expected {nnz} entries, found {len(body)}")
    if nnz:
        try:
            data = np.array([ln.split() for ln in body], dtype=np.float64)
        except ValueError:
            raise MatrixMarketError(f"{path}: malformed entry line") from None
        if data.ndim != 2 or data.shape[1] != 3:
            raise MatrixMarketError(f"{path}: entries must have 3 columns")
    else:
        data = np.zeros((0, 3))

    rows = data[:, 0].astype(np.int64) - 1
    cols = data[:, 1].astype(np.int64) - 1
    vals = data[:, 2]
    if np.any((rows < 0) | (rows >= nrows) | (cols < 0) | (cols >= ncols)):
        raise MatrixMarketError(f"{path}: index out of range")
    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate((rows, cols[off])),
            np.concatenate((cols, rows[off])),
            np.concatenate((vals, vals[off])),
        )
    return SparseMatrix.from_coo(rows, cols, vals, (nrows, ncols))


def write_matrix_market(A, path, symmetric=False, comment=None):
    """Write ``A`` in coordinate format with round-trip exact values.

    With ``symmetric=True`` only the lower triangle is written; the caller
    is responsible for ``A`` actually being symmetric.
    """
    rows, cols, vals = A.row_indices, A.col_indices, A.values
    if symmetric:
        keep = rows >= cols
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    kind = "symmetric" if symmetric else "general"
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate real {kind}\n")
        if comment:
            for line in str(comment).splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{A.nrows} {A.ncols} {rows.size}\n")
        for i, j, v in zip(rows + 1, cols + 1, vals):
            fh.write(f"{i} {j} {float(v)!r}\n")
