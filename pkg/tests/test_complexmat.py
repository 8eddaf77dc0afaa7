import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_unitary
from qubitio.complexmat import (
    as_cmatrix,
    hermitian_eigen,
    is_psd,
    is_unitary,
    jacobi_eigh,
    matmul,
    numerical_rank,
)
from qubitio.errors import ConstraintViolation


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 9), seed=st.integers(0, 2**32 - 1))
def test_jacobi_matches_lapack(n, seed):
    h = random_hermitian(np.random.default_rng(seed), n)
    w_j, v_j = jacobi_eigh(h)
    w_ref = np.linalg.eigvalsh(h)[::-1]
    assert np.allclose(w_j, w_ref, atol=1e-11 * max(1, abs(w_ref).max()))
    assert np.allclose(v_j.conj().T @ v_j, np.eye(n), atol=1e-12)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_reconstruction_9x9(method):
    rng = np.random.default_rng(9)
    for _ in range(20):
        h = random_hermitian(rng, 9)
        w, v = hermitian_eigen(h, method=method)
        assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - h)) <= 1e-10
        assert np.all(np.diff(w) <= 0)


def test_jacobi_diagonal_and_degenerate_inputs():
    w, v = jacobi_eigh(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(w, [3, 2, 1])
    w, _ = jacobi_eigh(np.zeros((4, 4)))
    assert np.allclose(w, 0)
    # tiny off-diagonal entries must not overflow
    h = np.diag([1.0, 1.0]) + 1e-300 * np.array([[0, 1], [1, 0]])
    w, _ = jacobi_eigh(h)
    assert np.all(np.isfinite(w))


def test_non_hermitian_rejected():
    with pytest.raises(ConstraintViolation):
        hermitian_eigen(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ConstraintViolation):
        jacobi_eigh(np.array([[0, 1j], [1j, 0]]))


def test_as_cmatrix_limits():
    with pytest.raises(ValueError):
        as_cmatrix(np.zeros((10, 10)))
    with pytest.raises(ValueError):
        as_cmatrix([1, 2, 3])
    with pytest.raises(ValueError):
        as_cmatrix([[np.nan]])
    with pytest.raises(ValueError):
        matmul(np.eye(2), np.eye(3))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), rank=st.integers(0, 4))
def test_rank_invariant_under_permutation_phase(seed, rank):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = x @ x.conj().T
    perm = np.eye(4)[rng.permutation(4)]
    u = perm @ np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 4)))
    assert numerical_rank(m) == rank
    assert numerical_rank(u @ m @ u.conj().T) == rank


def test_psd_and_unitary_checks(rng):
    u = random_unitary(rng, 3)
    assert is_unitary(u)
    assert not is_unitary(2 * u)
    assert not is_unitary(np.ones((2, 3)))
    assert is_psd(np.diag([1.0, 0.0]))
    assert not is_psd(np.diag([1.0, -1e-3]))
    assert numerical_rank(np.zeros((3, 3))) == 0
