"""Small dense semidefinite programs over Hermitian matrices.

Problems have the form

    maximize    <C, Z>
    subject to  <A_i, Z> = b_i,   i = 1..p
                Z positive semidefinite (complex Hermitian, n x n)

with dual

    minimize    b'y
    subject to  sum_i y_i A_i - C  positive semidefinite.

The solver works on the real symmetric embedding of size 2n and runs a
primal-dual interior point method with the HKM search direction and a
Mehrotra predictor-corrector step, applied to the homogeneous self-dual
embedding so that infeasible problems end with a certificate rather than a
stall.  Constraints are stored as rows of a sparse matrix whose columns are
the row-major entries of ``A_i``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .linalg import LinalgError, check_hermitian

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 200
RANK_TOL = 1e-10

__all__ = [
    "Status",
    "SdpProblem",
    "SdpSolution",
    "real_embed",
    "real_compress",
    "solve",
    "lambda_max_problem",
    "restrict",
    "to_sdpa",
    "read_sdpa",
]


class Status(str, Enum):
    OPTIMAL = "Optimal"
    MAX_ITERATIONS = "MaxIterations"
    INFEASIBLE = "Infeasible"
    # dual infeasible: the maximisation is unbounded above
    UNBOUNDED = "Unbounded"


def real_embed(H) -> np.ndarray:
    """Real symmetric embedding ``[[Re H, -Im H], [Im H, Re H]]``."""
    H = np.asarray(H, dtype=complex)
    Re, Im = H.real, H.imag
    return np.block([[Re, -Im], [Im, Re]])


def real_compress(X: np.ndarray) -> np.ndarray:
    """Inverse of :func:`real_embed` after orthogonal projection onto the
    embedded subspace; maps PSD matrices to PSD matrices."""
    n = X.shape[0] // 2
    re = 0.5 * (X[:n, :n] + X[n:, n:])
    im = 0.5 * (X[n:, :n] - X[:n, n:])
    Z = re + 1j * im
    return 0.5 * (Z + Z.conj().T)


@dataclass(frozen=True, eq=False)
class SdpProblem:
    """maximize <C,Z> s.t. <A_i,Z> = b_i, Z >= 0.

    ``A`` is a sparse ``p x n*n`` complex matrix; row ``i`` is ``A_i``
    flattened row-major.  ``offset`` is a constant added to reported values.
    """

    C: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        C = check_hermitian(self.C, tol=1e-10)
        n = C.shape[0]
        A = sp.csr_matrix(self.A, dtype=complex)
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[1] != n * n:
            raise LinalgError(f"constraint rows have {A.shape[1]} columns, expected {n * n}")
        if A.shape[0] != b.shape[0]:
            raise LinalgError("constraint count and right-hand side length differ")
        if not np.all(np.isfinite(b)):
            raise LinalgError("right-hand side has non-finite entries")
        # Hermitian rows: A_i[r,c] = conj(A_i[c,r])
        perm = np.arange(n * n).reshape(n, n).T.ravel()
        if A.nnz and abs(A - A[:, perm].conj()).max() > 1e-10 * max(1.0, abs(A).max()):
            raise LinalgError("constraint matrices must be Hermitian")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_constraints(cls, C, constraints, offset: float = 0.0) -> "SdpProblem":
        """Build from a list of ``(A_i, b_i)`` pairs of dense matrices."""
        C = np.asarray(C, dtype=complex)
        n = C.shape[0]
        rows = [sp.csr_matrix(np.asarray(Ai, dtype=complex).reshape(1, n * n)) for Ai, _ in constraints]
        A = sp.vstack(rows, format="csr") if rows else sp.csr_matrix((0, n * n), dtype=complex)
        b = np.array([bi for _, bi in constraints], dtype=float)
        return cls(C, A, b, offset)

    @property
    def dim(self) -> int:
        return self.C.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.A.shape[0]

    def constraint(self, i: int) -> tuple[np.ndarray, float]:
        n = self.dim
        return self.A[i].toarray().reshape(n, n), float(self.b[i])

    @property
    def constraints(self) -> list[tuple[np.ndarray, float]]:
        return [self.constraint(i) for i in range(self.n_constraints)]

    def apply(self, Z: np.ndarray) -> np.ndarray:
        """Vector of <A_i, Z>."""
        return np.real(self.A.conj() @ np.asarray(Z, dtype=complex).ravel())

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """sum_i y_i A_i."""
        n = self.dim
        M = (self.A.T @ np.asarray(y, dtype=float)).reshape(n, n)
        return 0.5 * (M + M.conj().T)


@dataclass
class SdpSolution:
    Z: np.ndarray
    y: np.ndarray
    S: np.ndarray
    value: float
    dual_value: float
    status: Status
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    dropped_constraints: list[int] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def lambda_max_problem(C) -> SdpProblem:
    """maximize <C,Z> over density matrices Z; the optimum is lambda_max(C)."""
    C = np.asarray(C, dtype=complex)
    n = C.shape[0]
    return SdpProblem.from_constraints(C, [(np.eye(n), 1.0)])


# ---------------------------------------------------------------------------
# preprocessing


def _row_hash(A: sp.csr_matrix, b: np.ndarray, i: int) -> str:
    s, e = A.indptr[i], A.indptr[i + 1]
    idx = A.indices[s:e]
    order = np.argsort(idx, kind="stable")
    h = hashlib.sha1()
    h.update(idx[order].astype(np.int64).tobytes())
    h.update(np.round(A.data[s:e][order], 14).tobytes())
    return h.hexdigest()


def _herm_coords(A: sp.csr_matrix, n: int) -> np.ndarray:
    """Real coordinates of Hermitian rows w.r.t. an orthogonal basis of Herm(n)."""
    D = A.toarray().reshape(-1, n, n)
    iu = np.triu_indices(n, 1)
    diag = np.real(np.diagonal(D, axis1=1, axis2=2))
    up = D[:, iu[0], iu[1]]
    return np.hstack([diag, np.sqrt(2) * up.real, np.sqrt(2) * up.imag])


def _independent_rows(A: sp.csr_matrix, b: np.ndarray, n: int, tol: float):
    """Drop duplicate and linearly dependent constraint rows.

    Returns ``(kept indices, dropped indices, consistent)`` where
    ``consistent`` is False if some dropped row contradicts the kept ones.
    """
    p = A.shape[0]
    seen: dict[str, int] = {}
    kept = []
    dropped = []
    consistent = True
    bscale = max(1.0, float(np.max(np.abs(b)))) if p else 1.0
    for i in range(p):
        key = _row_hash(A, b, i)
        if key in seen:
            dropped.append(i)
            if abs(b[i] - b[seen[key]]) > tol * bscale:
                consistent = False
        else:
            seen[key] = i
            kept.append(i)
    if not kept:
        return kept, dropped, consistent
    Ak = A[kept]
    # quick full-rank test on the Gram matrix before the dense QR
    G = (Ak.conj() @ Ak.T).real.toarray()
    dg = np.diag(G).copy()
    if np.all(dg > 0):
        Dh = 1.0 / np.sqrt(dg)
        try:
            L = np.linalg.cholesky(G * Dh[:, None] * Dh[None, :])
            if np.min(np.diag(L)) ** 2 > 1e3 * RANK_TOL:
                return kept, dropped, consistent
        except np.linalg.LinAlgError:
            pass
    B = _herm_coords(Ak, n).T  # columns = constraints
    norms = np.linalg.norm(B, axis=0)
    norms[norms == 0] = 1.0
    Bn = B / norms
    Q, R, piv = sla.qr(Bn, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > RANK_TOL * (d[0] if d.size else 1.0)))
    indep = np.sort(piv[:rank])
    dep = np.sort(piv[rank:])
    if dep.size:
        bk = np.asarray(b)[kept] / norms
        coef, *_ = np.linalg.lstsq(Bn[:, indep], Bn[:, dep], rcond=None)
        pred = coef.T @ bk[indep]
        if np.any(np.abs(pred - bk[dep]) > tol * max(1.0, float(np.max(np.abs(bk))))):
            consistent = False
    kept_arr = np.asarray(kept)
    dropped = sorted(dropped + list(kept_arr[dep]))
    return list(kept_arr[indep]), dropped, consistent


def _embed_rows(A: sp.csr_matrix, n: int) -> sp.csr_matrix:
    """Rows of ``real_embed(A_i) / 2`` flattened over the 2n x 2n grid."""
    coo = A.tocoo()
    r, c = np.divmod(coo.col, n)
    v = coo.data
    N = 2 * n
    rows = np.concatenate([coo.row] * 4)
    rr = np.concatenate([r, r + n, r, r + n])
    cc = np.concatenate([c, c + n, c + n, c])
    vals = 0.5 * np.concatenate([v.real, v.real, -v.imag, v.imag])
    keep = vals != 0
    out = sp.csr_matrix((vals[keep], (rows[keep], rr[keep] * N + cc[keep])), shape=(A.shape[0], N * N))
    out.sum_duplicates()
    return out


# ---------------------------------------------------------------------------
# interior point core


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    W = sla.solve_triangular(L, dX, lower=True)
    W = sla.solve_triangular(L, W.T, lower=True).T
    lam = np.linalg.eigvalsh(0.5 * (W + W.T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _schur(Ar: sp.csr_matrix, X: np.ndarray, Sinv: np.ndarray, chunk: int = 256) -> np.ndarray:
    """M_ij = <A_i, X A_j S^-1> for the sparse rows of ``Ar``."""
    p = Ar.shape[0]
    N = X.shape[0]
    M = np.empty((p, p))
    indptr, indices, data = Ar.indptr, Ar.indices, Ar.data
    for start in range(0, p, chunk):
        stop = min(p, start + chunk)
        Y = np.empty((stop - start, N * N))
        for j in range(start, stop):
            s, e = indptr[j], indptr[j + 1]
            rr, cc = np.divmod(indices[s:e], N)
            Y[j - start] = ((X[:, rr] * data[s:e]) @ Sinv[cc, :]).ravel()
        M[:, start:stop] = Ar @ Y.T
    return 0.5 * (M + M.T)


def _solve_spd(M: np.ndarray):
    scale = max(1.0, float(np.max(np.abs(np.diag(M))))) if M.size else 1.0
    reg = 0.0
    for _ in range(6):
        try:
            return sla.cho_factor(M + reg * np.eye(M.shape[0]), lower=True, check_finite=False)
        except (np.linalg.LinAlgError, sla.LinAlgError):
            reg = 1e-14 * scale if reg == 0 else reg * 100
    lu = sla.lu_factor(M + reg * np.eye(M.shape[0]))
    return ("lu", lu)


def _back(fac, rhs):
    if isinstance(fac, tuple) and len(fac) == 2 and isinstance(fac[0], str):
        return sla.lu_solve(fac[1], rhs)
    return sla.cho_solve(fac, rhs, check_finite=False)


def solve(p: SdpProblem, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> SdpSolution:
    """Solve ``p`` to absolute tolerance ``tol`` (relative for data above unit scale)."""
    n = p.dim
    kept, dropped, consistent = _independent_rows(p.A, p.b, n, tol)
    if not consistent:
        return _trivial(p, Status.INFEASIBLE, dropped)
    A_c = p.A[kept] if len(kept) != p.n_constraints else p.A
    b = p.b[kept]
    m = len(kept)
    N = 2 * n

    Ar = _embed_rows(A_c, n) if m else sp.csr_matrix((0, N * N))
    Cmin = -0.5 * real_embed(p.C)
    cvec = Cmin.ravel()

    def Aop(X):
        return Ar @ X.ravel()

    def Aadj(y):
        Y = (Ar.T @ y).reshape(N, N)
        return 0.5 * (Y + Y.T)

    data_scale = max(1.0, float(np.max(np.abs(p.C))) if p.C.size else 1.0,
                     float(np.max(np.abs(b))) if m else 1.0,
                     float(abs(A_c).max()) if A_c.nnz else 1.0)
    ftol = tol * data_scale

    X = np.eye(N)
    S = np.eye(N)
    y = np.zeros(m)
    tau = 1.0
    kappa = 1.0
    status = Status.MAX_ITERATIONS
    it = 0

    for it in range(1, max_iter + 1):
        rp = Aop(X) - b * tau
        rd = Cmin * tau - Aadj(y) - S
        pobj = float(cvec @ X.ravel())
        dobj = float(b @ y)
        rg = dobj - pobj - kappa

        # termination tests on the dehomogenised point
        xs, ys, ss = X / tau, y / tau, S / tau
        pres = float(np.max(np.abs(Aop(xs) - b))) if m else 0.0
        dres = float(np.max(np.abs(Cmin - Aadj(ys) - ss)))
        gap = abs(pobj - dobj) / tau
        if pres <= ftol and dres <= ftol and gap <= ftol:
            status = Status.OPTIMAL
            break
        if dobj > 0:
            if float(np.max(np.abs(Aadj(y) + S))) / dobj <= tol:
                status = Status.INFEASIBLE
                break
        if pobj < 0:
            if (float(np.max(np.abs(Aop(X)))) if m else 0.0) / (-pobj) <= tol:
                status = Status.UNBOUNDED
                break

        mu = (float(np.sum(X * S)) + tau * kappa) / (N + 1)
        try:
            Ls = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            break
        Lsi = sla.solve_triangular(Ls, np.eye(N), lower=True)
        Sinv = Lsi.T @ Lsi
        if m:
            M = _schur(Ar, X, Sinv)
            fac = _solve_spd(M)
        XCSi = X @ Cmin @ Sinv
        g = Aop(XCSi) + b
        q = g - b
        beta0 = float(np.sum(Cmin * XCSi.T))
        Xrd = X @ rd @ Sinv
        v = _back(fac, g) if m else np.zeros(0)
        # (b - q).v + beta0 + kappa/tau, regrouped as b'M^-1 b + kappa/tau plus a
        # nonnegative projection residual that cancels badly near the optimum
        if m:
            wq = _back(fac, q)
            denom = float(b @ _back(fac, b)) + kappa / tau + max(0.0, beta0 - float(q @ wq))
        else:
            denom = beta0 + kappa / tau

        def direction(sigma, eta, corr):
            Rc = sigma * mu * np.eye(N) - X @ S
            rt = sigma * mu - tau * kappa
            if corr is not None:
                dXa, dSa, dta, dka = corr
                Rc = Rc - dXa @ dSa
                rt = rt - dta * dka
            RcSi = Rc @ Sinv
            h = -eta * rp - Aop(RcSi) + eta * Aop(Xrd)
            hg = (-eta * rg + float(np.sum(Cmin * RcSi.T))
                  - eta * float(np.sum(Cmin * Xrd.T)) + rt / tau)
            if m:
                u = _back(fac, h)
                dtau = (hg - (b - q) @ u) / denom
                dy = u + v * dtau
            else:
                dtau = hg / denom
                dy = np.zeros(0)
            dS = Cmin * dtau - Aadj(dy) + eta * rd
            dX = RcSi - X @ dS @ Sinv
            dX = 0.5 * (dX + dX.T)
            dkappa = (rt - kappa * dtau) / tau
            return dX, dy, dS, dtau, dkappa

        def steplen(dX, dS, dtau, dkappa):
            a = min(_max_step(X, dX), _max_step(S, dS))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        dXa, dya, dSa, dta, dka = direction(0.0, 1.0, None)
        if not (np.all(np.isfinite(dXa)) and np.all(np.isfinite(dSa)) and np.isfinite(dta)):
            break
        aa = min(1.0, steplen(dXa, dSa, dta, dka))
        mu_aff = (float(np.sum((X + aa * dXa) * (S + aa * dSa)))
                  + (tau + aa * dta) * (kappa + aa * dka)) / (N + 1)
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))
        dX, dy, dS, dt, dk = direction(sigma, 1.0 - sigma, (dXa, dSa, dta, dka))
        if not (np.all(np.isfinite(dX)) and np.all(np.isfinite(dS)) and np.isfinite(dt)):
            break
        a = min(1.0, 0.98 * steplen(dX, dS, dt, dk))
        if not np.isfinite(a) or a <= 1e-12:
            break
        X = X + a * dX
        S = S + a * dS
        y = y + a * dy
        tau = tau + a * dt
        kappa = kappa + a * dk
        X = 0.5 * (X + X.T)
        S = 0.5 * (S + S.T)

    return _finish(p, kept, dropped, X, y, S, tau, status, it, tol)


def _trivial(p: SdpProblem, status: Status, dropped) -> SdpSolution:
    n = p.dim
    Z = np.zeros((n, n), dtype=complex)
    return SdpSolution(Z, np.zeros(p.n_constraints), np.zeros((n, n), dtype=complex),
                       float("nan"), float("nan"), status, float("inf"), float("inf"),
                       float("inf"), 0, list(dropped))


def _finish(p, kept, dropped, X, y, S, tau, status, it, tol) -> SdpSolution:
    scale = tau if status in (Status.OPTIMAL, Status.MAX_ITERATIONS) and tau > 0 else 1.0
    Z = real_compress(X / scale)
    S_c = 2.0 * real_compress(S / scale)
    yfull = np.zeros(p.n_constraints)
    yfull[kept] = -y / scale
    value = float(np.real(np.vdot(p.C, Z))) + p.offset
    dual_value = float(p.b @ yfull) + p.offset
    pres = float(np.max(np.abs(p.apply(Z) - p.b))) if p.n_constraints else 0.0
    dres = float(np.max(np.abs(p.adjoint(yfull) - p.C - S_c)))
    gap = abs(value - dual_value)
    if status is Status.INFEASIBLE or status is Status.UNBOUNDED:
        value = dual_value = float("nan")
    return SdpSolution(Z, yfull, S_c, value, dual_value, status, pres, dres, gap, it, list(dropped))


# ---------------------------------------------------------------------------
# restriction and interchange


def restrict(p: SdpProblem, J) -> SdpProblem:
    """Same problem on the principal submatrix indexed by ``J``.

    Valid when every dual slack ``sum y_i A_i - C`` vanishes on a subspace
    complementary to the coordinates ``J`` (so positivity of the submatrix is
    equivalent to positivity of the whole slack).
    """
    J = np.asarray(J, dtype=int)
    n = p.dim
    flat = (J[:, None] * n + J[None, :]).ravel()
    return SdpProblem(p.C[np.ix_(J, J)], p.A[:, flat], p.b, p.offset)


def _sdpa_num(v) -> str:
    v = float(v)
    return "0" if v == 0 else format(v, ".17g")


def to_sdpa(p: SdpProblem, comment: str | None = None) -> str:
    """SDPA sparse text of the real embedding of the dual program.

    SDPA form: minimise ``c'x`` subject to ``sum_i x_i F_i - F_0 >= 0`` with
    ``c = b``, ``F_i = real_embed(A_i)`` and ``F_0 = real_embed(C)``.  One
    block of size ``2n``.  Body lines are ``matrix block row col value``
    (1-based, upper triangle).
    """
    n = p.dim
    N = 2 * n
    out = []
    if comment:
        out += [f'"{line}' for line in comment.splitlines()]
    out.append(f"{p.n_constraints} = number of constraint matrices")
    out.append("1 = number of blocks")
    out.append(f"{N} = block sizes")
    out.append(" ".join(_sdpa_num(v) for v in p.b) if p.n_constraints else "0")

    def emit(k, M):
        r, c = np.nonzero(np.triu(M))
        for i, j in zip(r, c):
            out.append(f"{k} 1 {i + 1} {j + 1} {_sdpa_num(M[i, j])}")

    emit(0, real_embed(p.C))
    for i in range(p.n_constraints):
        emit(i + 1, real_embed(p.constraint(i)[0]))
    return "\n".join(out) + "\n"


def read_sdpa(text: str):
    """Parse single-block SDPA sparse text; returns ``(c, [F_0, F_1, ...])``."""
    lines = [ln for ln in text.splitlines() if ln.strip() and ln.lstrip()[0] not in '"*']
    head = [ln.split("=")[0].replace(",", " ").replace("{", " ").replace("}", " ") for ln in lines[:4]]
    mdim = int(head[0].split()[0])
    nblocks = int(head[1].split()[0])
    if nblocks != 1:
        raise ValueError("only single-block files are supported")
    N = abs(int(head[2].split()[0]))
    c = np.array([float(v) for v in head[3].split()[:mdim]])
    F = [np.zeros((N, N)) for _ in range(mdim + 1)]
    for ln in lines[4:]:
        k, blk, i, j, v = ln.split()
        i, j, v = int(i) - 1, int(j) - 1, float(v)
        F[int(k)][i, j] = v
        F[int(k)][j, i] = v
    return c, F
