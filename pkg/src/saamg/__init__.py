"""Smoothed aggregation algebraic multigrid with prolongator variants."""
from ._jit import backend, backend_context, set_backend
from .errors import NegativeEigenvalueError, SetupError, ZeroDiagonalError
from .sparse import SparseMatrix

__version__ = "0.1.0"

__all__ = [
    "NegativeEigenvalueError",
    "SetupError",
    "SparseMatrix",
    "ZeroDiagonalError",
    "backend",
    "backend_context",
    "set_backend",
]
