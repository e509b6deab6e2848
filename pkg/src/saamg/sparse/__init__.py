from .csr import (
    SparseMatrix,
    abs_row_sums,
    add,
    diagonal,
    diagonal_positions,
    drop_entries,
    galerkin,
    kron,
    row_sums,
    scale_rows,
    spmm,
    spmv,
    submatrix,
    transpose,
    transpose_positions,
)
from .mmio import MatrixMarketError, read_matrix_market, write_matrix_market

__all__ = [
    "SparseMatrix",
    "MatrixMarketError",
    "abs_row_sums",
    "add",
    "diagonal",
    "diagonal_positions",
    "drop_entries",
    "galerkin",
    "kron",
    "read_matrix_market",
    "row_sums",
    "scale_rows",
    "spmm",
    "spmv",
    "submatrix",
    "transpose",
    "transpose_positions",
    "write_matrix_market",
]
