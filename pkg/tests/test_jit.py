import os
import subprocess
import sys

import numpy as np
import pytest

import saamg
from saamg import backend, backend_context, set_backend
from saamg.sparse import spmv

from .helpers import poisson2d


def test_backend_context_restores():
    before = backend()
    with backend_context("numpy"):
        assert backend() == "numpy"
    assert backend() == before


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        set_backend("cuda")


def test_env_flag_selects_numpy():
    code = "import saamg; print(saamg.backend())"
    env = dict(os.environ, SAAMG_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    env["SAAMG_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numba"


def test_backends_agree_on_spmv():
    A = poisson2d(9)
    x = np.random.default_rng(3).normal(size=A.ncols)
    with backend_context("numba"):
        a = spmv(A, x)
    with backend_context("numpy"):
        b = spmv(A, x)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-14)


def test_version():
    assert saamg.__version__ == "0.1.0"
