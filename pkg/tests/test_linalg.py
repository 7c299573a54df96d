import numpy as np
import pytest
from hypothesis import given, strategies as st

from xnlg.linalg import (
    LinalgError,
    check_hermitian,
    herm_eig,
    jacobi_eigh,
    max_eig,
    op_norm,
    partial_trace,
    psd_sqrt,
    random_hermitian,
    random_projector,
    random_unitary,
    tensor,
)

seeds = st.integers(0, 2**32 - 1)


def test_identity_spectrum():
    w, U = herm_eig(np.eye(3))
    assert np.allclose(w, 1.0)
    assert np.allclose(U.conj().T @ U, np.eye(3))


def test_pauli_x_spectrum():
    w, _ = herm_eig(np.array([[0, 1], [1, 0]]))
    assert np.allclose(w, [-1.0, 1.0], atol=1e-14)


@given(st.integers(1, 9), seeds)
def test_jacobi_matches_lapack(n, seed):
    H = random_hermitian(n, np.random.default_rng(seed))
    w, U = jacobi_eigh(H)
    assert np.allclose(w, np.linalg.eigvalsh(H), atol=1e-11)
    assert np.allclose(U.conj().T @ U, np.eye(n), atol=1e-11)
    assert np.allclose((U * w) @ U.conj().T, H, atol=1e-11)


def test_jacobi_batched(rng):
    H = np.stack([random_hermitian(4, rng) for _ in range(50)])
    w, U = jacobi_eigh(H)
    for k in range(50):
        assert np.allclose(w[k], np.linalg.eigvalsh(H[k]), atol=1e-11)
        assert np.allclose(np.einsum("ij,j,kj->ik", U[k], w[k], U[k].conj()), H[k], atol=1e-11)


def test_degenerate_and_diagonal():
    w, U = jacobi_eigh(np.diag([2.0, 2.0, -1.0]))
    assert np.allclose(w, [-1, 2, 2])
    P = random_projector(5, 2, np.random.default_rng(0))
    w, _ = jacobi_eigh(P)
    assert np.allclose(w, [0, 0, 0, 1, 1], atol=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(LinalgError):
        check_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(LinalgError):
        check_hermitian(np.ones((2, 3)))
    with pytest.raises(LinalgError):
        herm_eig(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_unknown_method():
    with pytest.raises(ValueError):
        herm_eig(np.eye(2), method="qr")


@given(st.integers(1, 6), seeds)
def test_max_eig_vector(n, seed):
    H = random_hermitian(n, np.random.default_rng(seed))
    lam, v = max_eig(H)
    assert np.isclose(lam, np.linalg.eigvalsh(H)[-1], atol=1e-11)
    assert np.allclose(H @ v, lam * v, atol=1e-10)


@given(st.integers(1, 6), seeds)
def test_op_norm_matches_svd(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert np.isclose(op_norm(M), np.linalg.norm(M, 2))
    H = random_hermitian(n, rng)
    assert np.isclose(op_norm(H), np.max(np.abs(np.linalg.eigvalsh(H))))


@given(st.integers(1, 6), seeds)
def test_psd_sqrt_squares_back(n, seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    P = G @ G.conj().T
    S = psd_sqrt(P)
    assert np.allclose(S @ S, P, atol=1e-9 * max(1, np.abs(P).max()))
    assert np.linalg.eigvalsh(S)[0] > -1e-10


def test_psd_sqrt_clamps_roundoff_and_rejects_negative():
    P = np.diag([1.0, -1e-12])
    assert np.allclose(psd_sqrt(P), np.diag([1.0, 0.0]))
    with pytest.raises(LinalgError):
        psd_sqrt(np.diag([1.0, -1e-3]))


def test_tensor_and_partial_trace(rng):
    A = random_hermitian(2, rng)
    B = random_hermitian(3, rng)
    C = random_hermitian(2, rng)
    M = tensor([A, B, C])
    assert M.shape == (12, 12)
    assert np.allclose(partial_trace(M, [2, 3, 2], [1]), np.trace(A) * np.trace(C) * B)
    assert np.allclose(partial_trace(M, [2, 3, 2], [0, 2]), np.trace(B) * np.kron(A, C))
    assert np.isclose(partial_trace(M, [2, 3, 2], [])[0, 0], np.trace(M))
    with pytest.raises(LinalgError):
        partial_trace(M, [2, 2], [0])


def test_random_unitary_and_projector(rng):
    U = random_unitary(4, rng)
    assert np.allclose(U.conj().T @ U, np.eye(4))
    P = random_projector(4, 3, rng)
    assert np.allclose(P @ P, P)
    assert np.isclose(np.trace(P).real, 3)
