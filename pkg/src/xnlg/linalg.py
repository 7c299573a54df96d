"""Dense complex and Hermitian matrix kernels.

Everything here works on plain ``numpy`` arrays.  The eigensolver is a
cyclic Jacobi iteration with complex (phase-corrected) rotations, vectorised
over an optional leading batch axis so that many small eigenproblems can be
diagonalised together.  ``method="lapack"`` routes to ``numpy.linalg.eigh``
for the larger matrices that appear inside the solvers.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

HERM_TOL = 1e-12
PSD_CLAMP = -1e-10

__all__ = [
    "LinalgError",
    "check_hermitian",
    "herm_eig",
    "jacobi_eigh",
    "op_norm",
    "max_eig",
    "psd_sqrt",
    "tensor",
    "partial_trace",
    "hs_inner",
    "random_hermitian",
    "random_unitary",
    "random_projector",
]


class LinalgError(ValueError):
    """Raised for malformed or non-Hermitian inputs."""


def _scale(H: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0


def check_hermitian(H, tol: float = HERM_TOL) -> np.ndarray:
    """Return ``H`` as a complex array after checking it is square and Hermitian.

    The tolerance is absolute for unit-scale matrices and relative to the
    largest entry otherwise.  A leading batch axis is allowed.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim < 2 or H.shape[-1] != H.shape[-2]:
        raise LinalgError(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise LinalgError("matrix has non-finite entries")
    dev = np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2)))) if H.size else 0.0
    if dev > tol * _scale(H):
        raise LinalgError(f"matrix is not Hermitian (deviation {dev:.3g})")
    return H


def jacobi_eigh(H: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Cyclic Jacobi diagonalisation of a (batch of) Hermitian matrices.

    Parameters
    ----------
    H : ndarray, shape (..., n, n)
        Hermitian input; not modified.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        ``tol * max(1, ||H||_max)`` for every matrix in the batch.
    max_sweeps : int
        Hard cap on the number of full cyclic sweeps.

    Returns
    -------
    w : ndarray, shape (..., n)
        Eigenvalues in ascending order.
    U : ndarray, shape (..., n, n)
        Unitary matrix whose columns are the matching eigenvectors.
    """
    A = np.array(H, dtype=complex, copy=True)
    batch_shape = A.shape[:-2]
    n = A.shape[-1]
    A = A.reshape((-1, n, n))
    nb = A.shape[0]
    U = np.broadcast_to(np.eye(n, dtype=complex), (nb, n, n)).copy()
    scale = np.maximum(1.0, np.max(np.abs(A), axis=(1, 2))) if nb else np.ones(0)
    offmask = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(A[:, offmask]) ** 2, axis=1)) if n > 1 else np.zeros(nb)
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[:, p, q]
                r = np.abs(apq)
                active = r > 1e-300
                if not np.any(active):
                    continue
                phase = np.where(active, apq / np.where(active, r, 1.0), 1.0)
                app = A[:, p, p].real
                aqq = A[:, q, q].real
                theta = 0.5 * np.arctan2(2.0 * r, app - aqq)
                c = np.cos(theta)
                s = np.sin(theta)
                # G = diag(1, conj(phase)) @ [[c, -s], [s, c]]
                g_pp = c
                g_pq = -s
                g_qp = s * np.conj(phase)
                g_qq = c * np.conj(phase)
                # columns: A <- A G
                colp = A[:, :, p].copy()
                colq = A[:, :, q]
                A[:, :, p] = colp * g_pp[:, None] + colq * g_qp[:, None]
                A[:, :, q] = colp * g_pq[:, None] + colq * g_qq[:, None]
                # rows: A <- G^* A
                rowp = A[:, p, :].copy()
                rowq = A[:, q, :]
                A[:, p, :] = rowp * np.conj(g_pp)[:, None] + rowq * np.conj(g_qp)[:, None]
                A[:, q, :] = rowp * np.conj(g_pq)[:, None] + rowq * np.conj(g_qq)[:, None]
                A[:, p, q] = 0.0
                A[:, q, p] = 0.0
                up = U[:, :, p].copy()
                uq = U[:, :, q]
                U[:, :, p] = up * g_pp[:, None] + uq * g_qp[:, None]
                U[:, :, q] = up * g_pq[:, None] + uq * g_qq[:, None]

    w = np.real(np.diagonal(A, axis1=1, axis2=2))
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    U = np.take_along_axis(U, order[:, None, :], axis=2)
    return w.reshape(batch_shape + (n,)), U.reshape(batch_shape + (n, n))


def herm_eig(H, method: str = "jacobi"):
    """Eigen-decomposition of a Hermitian matrix (or a stack of them).

    Returns ascending real eigenvalues and orthonormal eigenvector columns.
    ``method`` is ``"jacobi"`` (default, self-contained) or ``"lapack"``.
    """
    H = check_hermitian(H)
    if method == "jacobi":
        return jacobi_eigh(H)
    if method == "lapack":
        return np.linalg.eigh(H)
    raise ValueError(f"unknown eigensolver method {method!r}")


def op_norm(M) -> float:
    """Spectral norm.  Hermitian input uses the eigenvalues, anything else the
    largest singular value."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise LinalgError(f"expected a matrix, got shape {M.shape}")
    if M.size == 0:
        return 0.0
    if M.shape[0] == M.shape[1] and np.allclose(M, M.conj().T, rtol=0, atol=HERM_TOL * _scale(M)):
        w = np.linalg.eigvalsh(M)
        return float(np.max(np.abs(w)))
    return float(np.linalg.svd(M, compute_uv=False)[0])


def max_eig(H, method: str = "jacobi"):
    """Largest eigenvalue of ``H`` and a unit eigenvector for it."""
    w, U = herm_eig(H, method=method)
    return float(w[-1]), U[:, -1]


def psd_sqrt(P, clamp: float = PSD_CLAMP) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues in ``[clamp, 0)`` are treated as round-off and set to zero;
    anything more negative raises :class:`LinalgError`.
    """
    P = check_hermitian(P)
    w, U = np.linalg.eigh(P)
    if w.size and w[0] < clamp * _scale(P):
        raise LinalgError(f"matrix is not positive semidefinite (eigenvalue {w[0]:.3g})")
    w = np.clip(w, 0.0, None)
    S = (U * np.sqrt(w)) @ U.conj().T
    return 0.5 * (S + S.conj().T)


def tensor(factors: Sequence) -> np.ndarray:
    """Kronecker product of ``factors`` in the order given."""
    if len(factors) == 0:
        raise LinalgError("tensor needs at least one factor")
    return reduce(np.kron, [np.asarray(f, dtype=complex) for f in factors])


def partial_trace(M, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor of ``M`` not listed in ``keep``.

    ``dims`` lists the factor dimensions; the kept factors stay in their
    original order.
    """
    M = np.asarray(M, dtype=complex)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims)) if dims else 1
    if M.shape != (total, total):
        raise LinalgError(f"dims {dims} inconsistent with matrix shape {M.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise LinalgError(f"keep indices {keep} out of range for {len(dims)} factors")
    nf = len(dims)
    T = M.reshape(dims + dims)
    # trace out from the highest index so remaining axis numbers stay valid
    for k in reversed(range(nf)):
        if k in keep:
            continue
        cur = T.ndim // 2
        T = np.trace(T, axis1=k, axis2=k + cur)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return T.reshape(d, d)


def hs_inner(M, N) -> complex:
    """Hilbert-Schmidt inner product Tr(M* N)."""
    M = np.asarray(M, dtype=complex)
    N = np.asarray(N, dtype=complex)
    if M.shape != N.shape:
        raise LinalgError(f"shape mismatch {M.shape} vs {N.shape}")
    return complex(np.vdot(M, N))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (G + G.conj().T) / 2


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_projector(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal projector of the given rank onto a Haar-random subspace."""
    Q = random_unitary(n, rng)[:, :rank]
    return Q @ Q.conj().T
