"""Explicit quantum strategies, assemblages and the see-saw heuristic."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .games import DeterministicStrategy, ExtendedNonlocalGame, MonogamyGame, monogamy_to_extended, random_projective_measurement
from .linalg import psd_sqrt
from .sdp import SdpProblem, Status, solve

log = logging.getLogger(__name__)

STRATEGY_TOL = 1e-10
MONOTONE_SLACK = 1e-9

__all__ = [
    "StrategyError",
    "Strategy",
    "Assemblage",
    "assemblage",
    "expected_payoff",
    "expected_payoff_direct",
    "embed_deterministic",
    "random_strategy",
    "SeesawConfig",
    "SeesawResult",
    "seesaw",
    "seesaw_rng",
]


class StrategyError(ValueError):
    """Malformed strategy or a dimension mismatch with the game."""


def _check_povms(P: np.ndarray, name: str, tol: float):
    if P.ndim != 4 or P.shape[2] != P.shape[3]:
        raise StrategyError(f"{name} must have shape (questions, answers, d, d), got {P.shape}")
    d = P.shape[2]
    if np.max(np.abs(P - np.conj(np.swapaxes(P, -1, -2)))) > tol:
        raise StrategyError(f"{name} has non-Hermitian POVM elements")
    lo = np.linalg.eigvalsh(0.5 * (P + np.conj(np.swapaxes(P, -1, -2))))[..., 0]
    if np.min(lo) < -tol:
        raise StrategyError(f"{name} has a POVM element with eigenvalue {np.min(lo):.3g}")
    dev = np.max(np.abs(P.sum(axis=1) - np.eye(d)))
    if dev > tol:
        raise StrategyError(f"{name} POVMs do not sum to the identity (deviation {dev:.3g})")


@dataclass(frozen=True, eq=False)
class Strategy:
    """Shared state on R (x) A (x) B and one POVM per question for each player.

    ``alice`` has shape (nx, na, dA, dA) and ``bob`` shape (ny, nb, dB, dB).
    """

    rho: np.ndarray
    alice: np.ndarray
    bob: np.ndarray
    m: int

    def __post_init__(self):
        for name in ("rho", "alice", "bob"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))
        _check_povms(self.alice, "alice", STRATEGY_TOL)
        _check_povms(self.bob, "bob", STRATEGY_TOL)
        n = self.m * self.alice.shape[2] * self.bob.shape[2]
        if self.rho.shape != (n, n):
            raise StrategyError(f"rho must be {n}x{n} for m={self.m}, dA={self.dA}, dB={self.dB}")
        if np.max(np.abs(self.rho - self.rho.conj().T)) > STRATEGY_TOL:
            raise StrategyError("rho is not Hermitian")
        if abs(np.trace(self.rho).real - 1) > STRATEGY_TOL:
            raise StrategyError("rho does not have unit trace")
        if np.linalg.eigvalsh(self.rho)[0] < -STRATEGY_TOL:
            raise StrategyError("rho is not positive semidefinite")

    @property
    def dA(self) -> int:
        return self.alice.shape[2]

    @property
    def dB(self) -> int:
        return self.bob.shape[2]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.m, self.dA, self.dB

    @classmethod
    def from_vector(cls, psi, alice, bob, m: int) -> "Strategy":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), alice, bob, m)


@dataclass(frozen=True, eq=False)
class Assemblage:
    """K(a, b | x, y) stored as an array of shape (nx, ny, na, nb, m, m)."""

    K: np.ndarray

    def __getitem__(self, key):
        a, b, x, y = key
        return self.K[x, y, a, b]

    def referee_states(self) -> np.ndarray:
        """sum_{a,b} K(a,b|x,y) for every (x, y)."""
        return self.K.sum(axis=(2, 3))


def _tensor_view(s: Strategy):
    m, dA, dB = s.dims
    return s.rho.reshape(m, dA, dB, m, dA, dB)


def assemblage(s: Strategy) -> Assemblage:
    """Referee-side operators Tr_{AB}[(1 (x) A^x_a (x) B^y_b) rho]."""
    R = _tensor_view(s)
    # K[i,j] = sum_{p,q,r,u} A[q,p] B[u,r] rho[(i,p,r),(j,q,u)]
    K = np.einsum("xaqp,ybur,iprjqu->xyabij", s.alice, s.bob, R, optimize=True)
    return Assemblage(K)


def _as_extended(g):
    return monogamy_to_extended(g) if isinstance(g, MonogamyGame) else g


def _check_dims(g: ExtendedNonlocalGame, s: Strategy):
    if (g.m, g.nx, g.na, g.ny, g.nb) != (s.m, *s.alice.shape[:2], *s.bob.shape[:2]):
        raise StrategyError(
            f"strategy (m={s.m}, alice {s.alice.shape[:2]}, bob {s.bob.shape[:2]}) does not match the game "
            f"(m={g.m}, nx={g.nx}, na={g.na}, ny={g.ny}, nb={g.nb})")


def expected_payoff(g, s: Strategy) -> float:
    """sum pi(x,y) sum_{a,b} <V(a,b|x,y), K(a,b|x,y)>."""
    g = _as_extended(g)
    _check_dims(g, s)
    K = assemblage(s).K
    return float(np.real(np.einsum("xy,xyabij,xyabij->", g.pi, g.V.conj(), K)))


def expected_payoff_direct(g, s: Strategy) -> float:
    """Same quantity computed as sum pi <V (x) A (x) B, rho> without forming K."""
    g = _as_extended(g)
    _check_dims(g, s)
    m, dA, dB = s.dims
    T = np.zeros((m * dA * dB,) * 2, dtype=complex)
    for x in range(g.nx):
        for y in range(g.ny):
            if g.pi[x, y] == 0:
                continue
            for a in range(g.na):
                for b in range(g.nb):
                    T += g.pi[x, y] * np.kron(np.kron(g.V[x, y, a, b], s.alice[x, a]), s.bob[y, b])
    return float(np.real(np.vdot(T, s.rho)))


def game_operator(g: ExtendedNonlocalGame, alice: np.ndarray, bob: np.ndarray) -> np.ndarray:
    """T = sum pi(x,y) sum_{a,b} V(a,b|x,y) (x) A^x_a (x) B^y_b."""
    m = g.m
    dA = alice.shape[2]
    dB = bob.shape[2]
    T = np.einsum("xy,xyabij,xapq,ybrs->iprjqs", g.pi, g.V, alice, bob, optimize=True)
    T = T.reshape(m * dA * dB, m * dA * dB)
    return 0.5 * (T + T.conj().T)


def embed_deterministic(g, d: DeterministicStrategy) -> Strategy:
    """One-dimensional players answering f(x) and g(y) with the referee in
    the witness state."""
    g = _as_extended(g)
    alice = np.zeros((g.nx, g.na, 1, 1), dtype=complex)
    bob = np.zeros((g.ny, g.nb, 1, 1), dtype=complex)
    alice[np.arange(g.nx), np.asarray(d.f)] = 1.0
    bob[np.arange(g.ny), np.asarray(d.g)] = 1.0
    return Strategy.from_vector(d.referee_state, alice, bob, g.m)


def random_strategy(m: int, nx: int, na: int, ny: int, nb: int, dA: int, dB: int,
                    rng: np.random.Generator, projective: bool = True, pure: bool = True) -> Strategy:
    """Random strategy: projective or conjugated-projective POVMs and a
    Haar-random pure state (or a random full-rank mixed state)."""
    def povms(n_q, n_a, d):
        out = np.stack([random_projective_measurement(d, n_a, rng) for _ in range(n_q)])
        if projective:
            return out
        # mix two projective measurements to get a generic POVM
        other = np.stack([random_projective_measurement(d, n_a, rng) for _ in range(n_q)])
        t = rng.uniform(0.2, 0.8)
        return t * out + (1 - t) * other

    n = m * dA * dB
    if pure:
        psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return Strategy.from_vector(psi, povms(nx, na, dA), povms(ny, nb, dB), m)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = G @ G.conj().T
    rho /= np.trace(rho).real
    return Strategy(0.5 * (rho + rho.conj().T), povms(nx, na, dA), povms(ny, nb, dB), m)


# ---------------------------------------------------------------------------
# see-saw


@dataclass(frozen=True)
class SeesawConfig:
    dA: int = 2
    dB: int = 2
    restarts: int = 20
    iters: int = 200
    seed: int = 0
    tol: float = 1e-7
    sdp_tol: float = 1e-9


@dataclass
class SeesawResult:
    lower_bound: float
    best: Strategy | None
    best_restart: int
    traces: list[list[float]]
    diagnostics: list[str] = field(default_factory=list)
    config: SeesawConfig | None = None

    def __iter__(self):
        yield self.lower_bound
        yield self.best


def seesaw_rng(seed: int, restart: int) -> np.random.Generator:
    """Philox stream keyed by (seed, restart) so restarts are independent."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), int(restart)]))


def _povm_problem_constraints(n_out: int, d: int):
    """Rows of sum_a Z_aa = I for a block-diagonal variable of size n_out*d,
    plus zeros on the off-diagonal blocks.  Returned as (A, b) for the
    Hermitian basis of the d x d identity equations."""
    import scipy.sparse as sp

    n = n_out * d
    rows, cols, vals, b = [], [], [], []
    r = 0
    for p in range(d):
        for q in range(p, d):
            if p == q:
                for a in range(n_out):
                    i = a * d + p
                    rows.append(r); cols.append(i * n + i); vals.append(1.0)
                b.append(1.0)
                r += 1
            else:
                # real part: (Z_pq + Z_qp)/2 summed over blocks = 0
                for a in range(n_out):
                    i, j = a * d + p, a * d + q
                    rows += [r, r]; cols += [i * n + j, j * n + i]; vals += [0.5, 0.5]
                b.append(0.0)
                r += 1
                for a in range(n_out):
                    i, j = a * d + p, a * d + q
                    rows += [r, r]; cols += [i * n + j, j * n + i]; vals += [0.5j, -0.5j]
                b.append(0.0)
                r += 1
    A = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(r, n * n))
    return A, np.array(b)


_POVM_CACHE: dict = {}


def optimal_povm(F: np.ndarray, sdp_tol: float = 1e-9):
    """Maximise sum_a <F_a, P_a> over POVMs {P_a}.

    Off-diagonal blocks of the SDP variable carry no objective or
    constraint, so the optimum may be taken block diagonal; the diagonal
    blocks are the POVM.  Returns (P, status).
    """
    n_out, d = F.shape[0], F.shape[1]
    F = 0.5 * (F + np.conj(np.swapaxes(F, -1, -2)))
    if d == 1:
        # one-dimensional: put all weight on the best outcome
        P = np.zeros_like(F)
        P[int(np.argmax(F[:, 0, 0].real)), 0, 0] = 1.0
        return P, Status.OPTIMAL
    key = (n_out, d)
    if key not in _POVM_CACHE:
        _POVM_CACHE[key] = _povm_problem_constraints(n_out, d)
    A, b = _POVM_CACHE[key]
    n = n_out * d
    C = np.zeros((n, n), dtype=complex)
    for a in range(n_out):
        C[a * d:(a + 1) * d, a * d:(a + 1) * d] = F[a]
    sol = solve(SdpProblem(C, A, b), tol=sdp_tol)
    Z = sol.Z
    P = np.stack([Z[a * d:(a + 1) * d, a * d:(a + 1) * d] for a in range(n_out)])
    P = 0.5 * (P + np.conj(np.swapaxes(P, -1, -2)))
    # project back onto the POVM set: clip negatives, renormalise by S^{-1/2}
    w, U = np.linalg.eigh(P)
    P = np.einsum("aij,aj,akj->aik", U, np.clip(w, 0, None), U.conj())
    S = P.sum(axis=0)
    Sih = np.linalg.inv(psd_sqrt(S))
    P = np.einsum("ij,ajk,kl->ail", Sih, P, Sih)
    P = 0.5 * (P + np.conj(np.swapaxes(P, -1, -2)))
    return P, sol.status


def _state_update(g, alice, bob):
    T = game_operator(g, alice, bob)
    w, U = np.linalg.eigh(T)
    psi = U[:, -1]
    return psi, float(w[-1])


def _alice_objective(g, psi, bob, m, dA, dB):
    """F[x, a] on C^dA with sum_a <F[x,a], A^x_a> = payoff for fixed psi, bob."""
    Psi = psi.reshape(m, dA, dB)
    # F[x,a]_{qp} = sum pi V_{ij} B_{rs} conj(psi[i,p,r]) psi[j,q,s], acting as <F, A> = sum F^*_{pq}A_{pq}
    # payoff = sum pi conj(psi_{ipr}) V_ij A_pq B_rs psi_{jqs}
    G = np.einsum("xy,xyabij,ybrs,ipr,jqs->xapq", g.pi, g.V, bob, Psi.conj(), Psi, optimize=True)
    # payoff = sum G[x,a,p,q] A[x,a,p,q] = <G^T ... >; as Hermitian F with <F,A>=Tr(F^* A): F = conj(G)
    return np.conj(G)


def _bob_objective(g, psi, alice, m, dA, dB):
    Psi = psi.reshape(m, dA, dB)
    G = np.einsum("xy,xyabij,xapq,ipr,jqs->ybrs", g.pi, g.V, alice, Psi.conj(), Psi, optimize=True)
    return np.conj(G)


def _payoff_pure(g, psi, alice, bob):
    T = game_operator(g, alice, bob)
    return float(np.real(np.vdot(psi, T @ psi)))


def seesaw(g, dA: int = 2, dB: int = 2, restarts: int = 20, iters: int = 200, seed: int = 0,
           tol: float = 1e-7, init: Strategy | None = None, sdp_tol: float = 1e-9) -> SeesawResult:
    """Alternating optimisation over state, Alice's and Bob's measurements.

    Each restart starts from random projective measurements (or from
    ``init`` for restart 0) and cycles state / Alice / Bob updates until the
    pay-off improves by less than ``tol``.  A measurement update is kept only
    if it does not lower the pay-off, so each trace is nondecreasing.  The
    reported lower bound is the re-evaluated pay-off of the best strategy.
    """
    g = _as_extended(g)
    if dA < 1 or dB < 1:
        raise StrategyError("dimensions must be at least 1")
    if restarts < 1:
        raise StrategyError("at least one restart is needed")
    cfg = SeesawConfig(dA, dB, restarts, iters, seed, tol, sdp_tol)
    m = g.m
    best_val = -np.inf
    best = None
    best_r = -1
    traces: list[list[float]] = []
    diags: list[str] = []
    for r in range(restarts):
        if r == 0 and init is not None:
            _check_dims(g, init)
            alice, bob = init.alice.copy(), init.bob.copy()
            w, U = np.linalg.eigh(init.rho)
            psi = U[:, -1]
            dA_r, dB_r = init.dA, init.dB
            if iters == 0:
                # evaluate the supplied strategy unchanged
                val = expected_payoff(g, init)
                traces.append([val])
                if val > best_val:
                    best_val, best, best_r = val, init, r
                continue
        else:
            rng = seesaw_rng(seed, r)
            alice = np.stack([random_projective_measurement(dA, g.na, rng) for _ in range(g.nx)])
            bob = np.stack([random_projective_measurement(dB, g.nb, rng) for _ in range(g.ny)])
            dA_r, dB_r = dA, dB
            psi = None
        try:
            trace, psi, alice, bob = _seesaw_run(g, psi, alice, bob, m, dA_r, dB_r, iters, tol, sdp_tol, diags, r)
        except (np.linalg.LinAlgError, ValueError) as exc:
            diags.append(f"restart {r}: aborted ({exc})")
            log.warning("seesaw restart %d aborted: %s", r, exc)
            traces.append([])
            continue
        traces.append(trace)
        s = Strategy.from_vector(psi, alice, bob, m)
        val = expected_payoff(g, s)
        if val > best_val + 1e-12:
            best_val, best, best_r = val, s, r
    return SeesawResult(float(best_val), best, best_r, traces, diags, cfg)


def _seesaw_run(g, psi, alice, bob, m, dA, dB, iters, tol, sdp_tol, diags, r):
    psi, val = _state_update(g, alice, bob)
    trace = [val]
    for it in range(iters):
        start = val
        # Alice
        F = _alice_objective(g, psi, bob, m, dA, dB)
        new = alice.copy()
        for x in range(g.nx):
            P, st = optimal_povm(F[x], sdp_tol)
            if st is not Status.OPTIMAL:
                diags.append(f"restart {r} iter {it}: alice x={x} POVM solve {st.value}")
            new[x] = P
        cand = _payoff_pure(g, psi, new, bob)
        if cand >= val - MONOTONE_SLACK * 0.1:
            alice, val = new, max(val, cand)
        # Bob
        F = _bob_objective(g, psi, alice, m, dA, dB)
        new = bob.copy()
        for y in range(g.ny):
            P, st = optimal_povm(F[y], sdp_tol)
            if st is not Status.OPTIMAL:
                diags.append(f"restart {r} iter {it}: bob y={y} POVM solve {st.value}")
            new[y] = P
        cand = _payoff_pure(g, psi, alice, new)
        if cand >= val - MONOTONE_SLACK * 0.1:
            bob, val = new, max(val, cand)
        # state
        psi_new, cand = _state_update(g, alice, bob)
        if cand >= val:
            psi, val = psi_new, cand
        trace.append(val)
        if val - start < tol:
            break
    return trace, psi, alice, bob
