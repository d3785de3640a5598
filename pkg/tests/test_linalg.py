import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mpgraph.exceptions import NotPositiveDefiniteError
from mpgraph.linalg import (
    as_symmetric,
    cholesky,
    invert_pd,
    log_det_pd,
    min_eigenvalue,
    sample_covariance,
)
from mpgraph.synth import chain_precision
from oracles import logdet_cofactor

CHAIN3 = chain_precision(3).precision


@st.composite
def pd_matrices(draw, max_m=8):
    m = draw(st.integers(1, max_m))
    B = draw(arrays(np.float64, (m, m), elements=st.floats(-2, 2, allow_nan=False)))
    shift = draw(st.floats(0.1, 3.0))
    return B @ B.T + shift * np.eye(m)


def test_cholesky_examples():
    assert np.allclose(cholesky([[4.0, 2.0], [2.0, 3.0]]), [[2.0, 0.0], [1.0, np.sqrt(2.0)]])
    assert np.array_equal(cholesky(np.eye(3)), np.eye(3))


@pytest.mark.parametrize("A", [[[1.0, 2.0], [2.0, 1.0]], [[0.0, 0.0], [0.0, 1.0]], [[-1.0]]])
def test_cholesky_rejects_indefinite(A):
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(A)


def test_log_det_examples():
    assert log_det_pd(np.diag([2.0, 3.0])) == pytest.approx(np.log(6.0), abs=1e-14)
    assert abs(log_det_pd(CHAIN3) - logdet_cofactor(CHAIN3)) <= 1e-10


def test_invert_examples():
    assert np.allclose(invert_pd(np.eye(4)), np.eye(4))
    assert np.allclose(invert_pd(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))
    inv = invert_pd(CHAIN3)
    assert np.max(np.abs(CHAIN3 @ inv - np.eye(3))) <= 1e-10
    assert np.array_equal(inv, inv.T)


def test_min_eigenvalue_examples():
    assert min_eigenvalue(np.diag([1.0, 2.0, 3.0])) == pytest.approx(1.0, abs=1e-6)
    assert min_eigenvalue([[0.0, 1.0], [1.0, 0.0]]) == pytest.approx(-1.0, abs=1e-6)
    # tridiagonal Toeplitz: 1.25 + 1.2 cos(k pi / 4), k = 1..3
    oracle = min(1.25 + 1.2 * np.cos(k * np.pi / 4) for k in (1, 2, 3))
    assert oracle == pytest.approx(1.25 - 0.6 * np.sqrt(2.0))
    assert min_eigenvalue(CHAIN3) == pytest.approx(oracle, abs=1e-6)


def test_as_symmetric_uses_lower_triangle():
    A = np.array([[1.0, 9.0], [2.0, 3.0]])
    assert np.array_equal(as_symmetric(A), [[1.0, 2.0], [2.0, 3.0]])
    with pytest.raises(ValueError):
        as_symmetric(np.ones((2, 3)))


def test_sample_covariance_uses_n_denominator():
    X = np.array([[1.0, 2.0], [3.0, 6.0]])
    S = sample_covariance(X)
    assert np.allclose(S, [[1.0, 2.0], [2.0, 4.0]])
    assert np.allclose(sample_covariance(X, center=False), X.T @ X / 2)


@given(pd_matrices())
def test_cholesky_reconstructs(A):
    L = cholesky(A)
    assert np.max(np.abs(L @ L.T - A)) <= 1e-10 * np.max(np.abs(A))
    assert np.allclose(np.triu(L, 1), 0.0)


@given(pd_matrices())
def test_invert_is_involution(A):
    assert np.allclose(invert_pd(invert_pd(A)), A, rtol=0, atol=1e-8 * max(1.0, np.max(np.abs(A))))


@given(pd_matrices())
def test_log_det_of_inverse(A):
    assert abs(log_det_pd(invert_pd(A)) + log_det_pd(A)) <= 1e-8


@given(pd_matrices(), st.integers(0, 2**32 - 1))
def test_min_eigenvalue_bounds_rayleigh_quotient(A, seed):
    lam = min_eigenvalue(A)
    V = np.random.default_rng(seed).standard_normal((100, A.shape[0]))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    rq = np.einsum("ij,jk,ik->i", V, A, V)
    assert np.all(rq >= lam - 1e-6)
