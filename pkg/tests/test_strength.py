import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saamg.sparse import SparseMatrix, row_sums, transpose_positions
from saamg.strength import classic_strength, distance_laplacian, strong_neighbors

from .helpers import poisson1d, poisson2d, random_symmetric


def _offdiag(A, mask):
    return mask[A.row_indices != A.col_indices]


def test_theta_zero_all_strong():
    A = poisson2d(5)
    assert classic_strength(A, 0.0).all()


def test_five_point_threshold():
    A = poisson2d(6)
    assert _offdiag(A, classic_strength(A, 0.25)).all()
    assert not _offdiag(A, classic_strength(A, 0.26)).any()


def test_diagonal_always_strong():
    A = poisson2d(4)
    mask = classic_strength(A, 1.0)
    assert mask[A.row_indices == A.col_indices].all()


def test_nonpositive_diagonal_product_is_weak():
    A = SparseMatrix.from_dense(np.array([[1.0, -5.0], [-5.0, -1.0]]))
    assert not _offdiag(A, classic_strength(A, 0.0)).any()


def test_symmetrization():
    # (0, 1) passes the test, (1, 0) does not
    A = SparseMatrix.from_dense(np.array([[1.0, -5.0], [-0.1, 1.0]]))
    raw = classic_strength(A, 0.5, symmetrize=False)
    sym = classic_strength(A, 0.5)
    assert raw.tolist() == [True, True, False, True]
    assert sym.tolist() == [True, False, False, True]


def test_strong_neighbors():
    A = poisson1d(5)
    mask = classic_strength(A, 0.0)
    assert strong_neighbors(A, mask, 2).tolist() == [1, 3]


def test_theta_out_of_range():
    with pytest.raises(ValueError):
        classic_strength(poisson1d(3), 1.5)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_monotone_in_theta(seed, t1, t2):
    lo, hi = sorted((t1, t2))
    A = random_symmetric(np.random.default_rng(seed), 12, spd=True)
    strong_hi = classic_strength(A, hi)
    strong_lo = classic_strength(A, lo)
    assert not np.any(strong_hi & ~strong_lo)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_mask_symmetric_on_symmetric_pattern(seed):
    A = random_symmetric(np.random.default_rng(seed), 15)
    mask = classic_strength(A, 0.1)
    tp = transpose_positions(A)
    np.testing.assert_array_equal(mask, mask[tp])


def test_distance_laplacian_unit_chain():
    A = poisson1d(5)
    L = distance_laplacian(A, np.arange(5.0))
    assert L.nnz == A.nnz
    np.testing.assert_allclose(L.to_dense()[2, 1:4], [-1.0, 2.0, -1.0])


def test_distance_laplacian_half_spacing():
    L = distance_laplacian(poisson1d(5), 0.5 * np.arange(5.0))
    np.testing.assert_allclose(L.to_dense()[2, 1:4], [-2.0, 4.0, -2.0])


def test_distance_laplacian_zero_row_sums_2d():
    n = 6
    A = poisson2d(n)
    rng = np.random.default_rng(0)
    X = np.stack(np.meshgrid(np.arange(n), np.arange(n), indexing="xy"), -1).reshape(-1, 2)
    X = X + 0.2 * rng.random(X.shape)
    L = distance_laplacian(A, X)
    scale = np.abs(L.to_dense()).sum(axis=1)
    assert np.all(np.abs(row_sums(L)) <= 1e-13 * scale)
    mask = classic_strength(L, 0.3)
    np.testing.assert_array_equal(mask, mask[transpose_positions(L)])


def test_distance_laplacian_coincident_points():
    with pytest.raises(ValueError):
        distance_laplacian(poisson1d(3), np.array([0.0, 0.0, 1.0]))


def test_distance_laplacian_missing_diagonal():
    A = SparseMatrix.from_dense(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        distance_laplacian(A, np.array([0.0, 1.0]))
