"""Backend selection for the hot kernels.

Every loop-heavy kernel exists twice: a numba ``@njit`` version and a
numpy/interpreted fallback. The active backend is read from the
``SAAMG_DISABLE_NUMBA`` environment variable at import time and can be
switched at runtime with :func:`set_backend` (used by the tests and the
benchmark to exercise both paths in one process).
"""
import os
from contextlib import contextmanager

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False

_FALSY = ("", "0", "false", "no", "off")

_backend = "numpy"
if HAVE_NUMBA and os.environ.get("SAAMG_DISABLE_NUMBA", "").strip().lower() in _FALSY:
    _backend = "numba"


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return _backend


def use_numba():
    return _backend == "numba"


def set_backend(name):
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextmanager
def backend_context(name):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def njit(func, cache=True):
    """Compile ``func`` with numba, keeping the Python original reachable.

    Returns the compiled dispatcher (or ``func`` itself without numba). The
    interpreted version is available as ``.py_func`` in both cases.
    Closures over other jitted functions cannot be cached; pass
    ``cache=False`` for those.
    """
    if not HAVE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(cache=cache)(func)


def dispatch(jitted, fallback):
    """Return a callable choosing between ``jitted`` and ``fallback`` per call."""

    def call(*args):
        if _backend == "numba":
            return jitted(*args)
        return fallback(*args)

    call.__name__ = getattr(fallback, "__name__", "kernel")
    call.__doc__ = getattr(fallback, "__doc__", None)
    call.jitted = jitted
    call.fallback = fallback
    return call
