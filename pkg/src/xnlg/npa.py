"""Moment-matrix hierarchy for extended nonlocal games.

Words are strings over the disjoint union of Alice letters ``(x, a)`` and
Bob letters ``(y, b)``.  Two words are identified when one can be turned into
the other by duplicating/collapsing a letter or by swapping adjacent letters
of different parties; a word containing two adjacent letters of the same
question with different answers represents zero.  The pair (reduced Alice
subsequence, reduced Bob subsequence) is a complete invariant for the
identification, so a :class:`Word` stores exactly that.

The level-``k`` relaxation is a block matrix with ``m x m`` blocks, each
indexed by the canonical words of length at most ``k``; block ``(i, j)`` at
``(s, t)`` holds ``phi_ij(reverse(s) t)``.  Completeness sums are eliminated
by writing each ``phi_ij`` in terms of its values on *free* words (words with
no letter carrying the last answer of its question), so the SDP variables are
the free-word values and the resulting moment matrix is affine in them.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .games import BudgetExceeded, enumeration_budget, ExtendedNonlocalGame, MonogamyGame, monogamy_to_extended
from .sdp import DEFAULT_MAX_ITER, DEFAULT_TOL, SdpProblem, SdpSolution, Status, restrict, solve

DEFAULT_REAL_DIM_BUDGET = 1200

__all__ = [
    "Party",
    "Letter",
    "Word",
    "NULL",
    "EPSILON",
    "canonicalize",
    "reverse",
    "multiply",
    "enumerate_words",
    "AdmissibilityConstraint",
    "MomentProblem",
    "build_moment_problem",
    "NpaResult",
    "npa_upper_bound",
    "moment_matrix_from_strategy",
    "audit_moment_matrix",
    "reduced_problem",
]


class Party(IntEnum):
    ALICE = 0
    BOB = 1


class Letter(NamedTuple):
    party: Party
    question: int
    answer: int


class Word(NamedTuple):
    """Canonical word: reduced Alice part and reduced Bob part as (q, a) pairs."""

    alice: tuple[tuple[int, int], ...] = ()
    bob: tuple[tuple[int, int], ...] = ()

    def __len__(self) -> int:  # type: ignore[override]
        return len(self.alice) + len(self.bob)

    def letters(self) -> list[Letter]:
        return ([Letter(Party.ALICE, q, a) for q, a in self.alice]
                + [Letter(Party.BOB, q, a) for q, a in self.bob])

    def __repr__(self):
        if not self.alice and not self.bob:
            return "ε"
        A = "".join(f"A{q}{a}" for q, a in self.alice)
        B = "".join(f"B{q}{a}" for q, a in self.bob)
        return (A + " " + B).strip()


class _Null:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Null"

    def __reduce__(self):
        return (_Null, ())


NULL = _Null()
EPSILON = Word()


def _reduce(seq: Iterable[tuple[int, int]]):
    out: list[tuple[int, int]] = []
    for qa in seq:
        if out:
            top = out[-1]
            if top == qa:
                continue
            if top[0] == qa[0]:
                return None
        out.append(qa)
    return tuple(out)


def canonicalize(w: Sequence[Letter] | Word | _Null):
    """Normal form of a letter sequence, or :data:`NULL` if it represents zero."""
    if w is NULL:
        return NULL
    if isinstance(w, Word):
        w = w.letters()
    A = _reduce((l.question, l.answer) for l in w if l.party == Party.ALICE)
    if A is None:
        return NULL
    B = _reduce((l.question, l.answer) for l in w if l.party == Party.BOB)
    if B is None:
        return NULL
    return Word(A, B)


def reverse(w):
    if w is NULL:
        return NULL
    return Word(w.alice[::-1], w.bob[::-1])


def multiply(*words):
    """Canonical form of the concatenation of canonical words."""
    A: list = []
    B: list = []
    for w in words:
        if w is NULL:
            return NULL
        A.extend(w.alice)
        B.extend(w.bob)
    A = _reduce(A)
    if A is None:
        return NULL
    B = _reduce(B)
    if B is None:
        return NULL
    return Word(A, B)


def _party_words(n_q: int, n_a: int, max_len: int):
    """Reduced single-party words (no two adjacent letters share a question)."""
    out = [()]
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for q in range(n_q):
                if w and w[-1][0] == q:
                    continue
                for a in range(n_a):
                    nxt.append(w + ((q, a),))
        out.extend(nxt)
        frontier = nxt
    return out


def _word_key(w: Word):
    return (len(w), w.alice, w.bob)


def enumerate_words(k: int, nx: int, ny: int, na: int, nb: int, budget: int | None = None) -> list[Word]:
    """All non-null canonical words of length at most ``k``.

    Ordered by length, then lexicographically on (Alice part, Bob part).
    ``budget`` caps the number of words (default: the enumeration budget).
    """
    if k < 0:
        raise ValueError("level must be nonnegative")
    budget = enumeration_budget() if budget is None else budget
    # count first so a large alphabet fails fast
    def count(nq, na_, L):
        return 1 if L == 0 else nq * na_ * ((nq - 1) * na_) ** (L - 1)
    total = sum(count(nx, na, i) * count(ny, nb, j) for i in range(k + 1) for j in range(k + 1 - i))
    if total > budget:
        raise BudgetExceeded(f"{total} words of length <= {k} exceed the budget")
    Aw = _party_words(nx, na, k)
    Bw = _party_words(ny, nb, k)
    words = [Word(a, b) for a in Aw for b in Bw if len(a) + len(b) <= k]
    words.sort(key=_word_key)
    return words


def _budget(budget):
    if budget is not None:
        return budget
    env = os.environ.get("XNLG_BUDGET")
    return int(env) if env else DEFAULT_REAL_DIM_BUDGET


# ---------------------------------------------------------------------------
# completeness constraints and their elimination


@dataclass(frozen=True)
class AdmissibilityConstraint:
    """sum over ``terms`` of phi(w) = phi(rhs), for every block pair.

    ``terms`` are the canonical words ``u (z, c) v`` over all answers ``c``
    (null words dropped); ``rhs`` is the canonical form of ``u v``.
    """

    terms: tuple[Word, ...]
    rhs: Word


def admissibility_constraints(k: int, nx: int, ny: int, na: int, nb: int,
                              words_2k: Sequence[Word] | None = None) -> list[AdmissibilityConstraint]:
    """Completeness constraints for all ``u, v`` with ``|u| + |v| <= 2k - 1``."""
    if words_2k is None:
        words_2k = enumerate_words(2 * k, nx, ny, na, nb, budget=None)
    short = [w for w in words_2k if len(w) <= 2 * k - 1]
    seen = set()
    out = []
    for u in short:
        for v in short:
            if len(u) + len(v) > 2 * k - 1:
                continue
            rhs = multiply(u, v)
            if rhs is NULL:
                # every term is null as well
                continue
            for party, nq, n_ans in ((Party.ALICE, nx, na), (Party.BOB, ny, nb)):
                for z in range(nq):
                    terms = []
                    for c in range(n_ans):
                        if party == Party.ALICE:
                            w = _insert_alice(u, v, (z, c))
                        else:
                            w = _insert_bob(u, v, (z, c))
                        if w is not NULL:
                            terms.append(w)
                    key = (tuple(sorted(terms, key=_word_key)), rhs)
                    if key in seen:
                        continue
                    seen.add(key)
                    out.append(AdmissibilityConstraint(key[0], rhs))
    return out


def _insert_alice(u: Word, v: Word, qa):
    A = _reduce(u.alice + (qa,) + v.alice)
    if A is None:
        return NULL
    B = _reduce(u.bob + v.bob)
    if B is None:
        return NULL
    return Word(A, B)


def _insert_bob(u: Word, v: Word, qb):
    A = _reduce(u.alice + v.alice)
    if A is None:
        return NULL
    B = _reduce(u.bob + (qb,) + v.bob)
    if B is None:
        return NULL
    return Word(A, B)


def is_free(w: Word, na: int, nb: int) -> bool:
    return all(a != na - 1 for _, a in w.alice) and all(b != nb - 1 for _, b in w.bob)


class _Expander:
    """Writes a canonical word as an integer combination of free words by
    substituting (z, last) = identity - sum of the other answers."""

    def __init__(self, na: int, nb: int):
        self.na = na
        self.nb = nb
        self._memo: dict[Word, tuple[tuple[Word, int], ...]] = {}

    def expand(self, w: Word) -> tuple[tuple[Word, int], ...]:
        hit = self._memo.get(w)
        if hit is None:
            hit = self._memo[w] = self._expand(w)
        return hit

    def _expand(self, w: Word) -> tuple[tuple[Word, int], ...]:
        for i, (q, a) in enumerate(w.alice):
            if a == self.na - 1:
                pre = w.alice[:i]
                post = w.alice[i + 1:]
                return self._combine(
                    [(Word(pre, ()), Word(post, w.bob), None, 1)]
                    + [(Word(pre, ()), Word(post, w.bob), (q, c), -1) for c in range(self.na - 1)],
                    Party.ALICE)
        for i, (q, b) in enumerate(w.bob):
            if b == self.nb - 1:
                pre = w.bob[:i]
                post = w.bob[i + 1:]
                return self._combine(
                    [(Word(w.alice, pre), Word((), post), None, 1)]
                    + [(Word(w.alice, pre), Word((), post), (q, c), -1) for c in range(self.nb - 1)],
                    Party.BOB)
        return ((w, 1),)

    def _combine(self, parts, party):
        acc: dict[Word, int] = {}
        for u, v, qa, sign in parts:
            if qa is None:
                w = multiply(u, v)
            elif party == Party.ALICE:
                w = _insert_alice(u, v, qa)
            else:
                w = _insert_bob(u, v, qa)
            if w is NULL:
                continue
            for f, c in self.expand(w):
                acc[f] = acc.get(f, 0) + sign * c
        return tuple((f, c) for f, c in sorted(acc.items(), key=lambda t: _word_key(t[0])) if c != 0)


# ---------------------------------------------------------------------------
# moment problem


@dataclass(eq=False)
class MomentProblem:
    """Level-``k`` relaxation of an extended nonlocal game.

    The moment matrix is ``M(theta) = F0 + sum_k theta_k G_k`` (complex
    Hermitian, dimension ``m * len(words)``, block-major indexing).  The
    assembled :class:`SdpProblem` is the dual-form program whose slack is
    ``M(theta)``: maximise ``objective_offset + c . theta`` subject to
    ``M(theta) >= 0``.
    """

    game: ExtendedNonlocalGame
    level: int
    words: list[Word]
    free_words: list[Word]
    constraints: list[AdmissibilityConstraint]
    entry_words: np.ndarray  # object array (|W|, |W|) of Word / NULL
    params: list[tuple]
    F0: sp.csr_matrix
    G: sp.csr_matrix  # rows = parameters, columns = flattened n x n entries
    c: np.ndarray
    c0: float
    sdp: SdpProblem
    expander: _Expander = field(repr=False)

    @property
    def m(self) -> int:
        return self.game.m

    @property
    def dim(self) -> int:
        return self.m * len(self.words)

    def index(self, i: int, s: int) -> int:
        return i * len(self.words) + s

    def moment_matrix(self, theta: np.ndarray) -> np.ndarray:
        n = self.dim
        return (self.F0.toarray().ravel() + self.G.T @ np.asarray(theta, dtype=float)).reshape(n, n)

    def objective(self, M: np.ndarray) -> float:
        """sum pi(x,y) <V(a,b|x,y), M((x,a),(y,b))> for a full moment matrix."""
        K = self.assemblage(M)
        g = self.game
        return float(np.real(np.einsum("xy,xyabij,xyabij->", g.pi, g.V.conj(), K)))

    def assemblage(self, M: np.ndarray) -> np.ndarray:
        """Blocks ``M((x,a),(y,b))`` as an array of shape (nx, ny, na, nb, m, m)."""
        g = self.game
        W = len(self.words)
        pos = {w: i for i, w in enumerate(self.words)}
        K = np.zeros((g.nx, g.ny, g.na, g.nb, g.m, g.m), dtype=complex)
        Mb = np.asarray(M).reshape(g.m, W, g.m, W)
        for x, a in itertools.product(range(g.nx), range(g.na)):
            s = pos[Word(((x, a),), ())]
            for y, b in itertools.product(range(g.ny), range(g.nb)):
                t = pos[Word((), ((y, b),))]
                K[x, y, a, b] = Mb[:, s, :, t]
        return K


def _param_layout(m: int, free: list[Word]):
    """Real parameters: (kind, i, j, free-word index).

    kind "re"/"im" for blocks i < j; "d" for the real value of a palindromic
    free word, "dre"/"dim" for the representative of a non-palindromic pair
    on diagonal blocks.
    """
    fpos = {f: n for n, f in enumerate(free)}
    params = []
    index = {}
    for i in range(m):
        for n, f in enumerate(free):
            fr = reverse(f)
            if fr == f:
                index[("d", i, i, n)] = len(params)
                params.append(("d", i, i, n))
            elif _word_key(f) < _word_key(fr):
                index[("dre", i, i, n)] = len(params)
                params.append(("dre", i, i, n))
                index[("dim", i, i, n)] = len(params)
                params.append(("dim", i, i, n))
    for i in range(m):
        for j in range(i + 1, m):
            for n in range(len(free)):
                index[("re", i, j, n)] = len(params)
                params.append(("re", i, j, n))
                index[("im", i, j, n)] = len(params)
                params.append(("im", i, j, n))
    return params, index, fpos


def _entry_coeffs(i, j, w, expander, index, fpos):
    """Linear form (param -> complex coefficient) of phi_ij(w)."""
    out: dict[int, complex] = {}
    if w is NULL:
        return out
    if i < j:
        for f, c in expander.expand(w):
            n = fpos[f]
            out[index[("re", i, j, n)]] = out.get(index[("re", i, j, n)], 0) + c
            out[index[("im", i, j, n)]] = out.get(index[("im", i, j, n)], 0) + 1j * c
    elif i > j:
        # phi_ij(w) = conj(phi_ji(reverse(w)))
        for f, c in expander.expand(reverse(w)):
            n = fpos[f]
            out[index[("re", j, i, n)]] = out.get(index[("re", j, i, n)], 0) + c
            out[index[("im", j, i, n)]] = out.get(index[("im", j, i, n)], 0) - 1j * c
    else:
        for f, c in expander.expand(w):
            n = fpos[f]
            if ("d", i, i, n) in index:
                k = index[("d", i, i, n)]
                out[k] = out.get(k, 0) + c
            elif ("dre", i, i, n) in index:
                out[index[("dre", i, i, n)]] = out.get(index[("dre", i, i, n)], 0) + c
                out[index[("dim", i, i, n)]] = out.get(index[("dim", i, i, n)], 0) + 1j * c
            else:
                nr = fpos[reverse(f)]
                out[index[("dre", i, i, nr)]] = out.get(index[("dre", i, i, nr)], 0) + c
                out[index[("dim", i, i, nr)]] = out.get(index[("dim", i, i, nr)], 0) - 1j * c
    return {k: v for k, v in out.items() if v != 0}


def build_moment_problem(game, k: int, budget: int | None = None) -> MomentProblem:
    """Assemble the level-``k`` moment SDP for ``game``."""
    if isinstance(game, MonogamyGame):
        game = monogamy_to_extended(game)
    if k < 1:
        raise ValueError("level must be at least 1")
    m, nx, ny, na, nb = game.shape()
    budget = _budget(budget)
    words = enumerate_words(k, nx, ny, na, nb)
    if 2 * m * len(words) > budget:
        raise BudgetExceeded(f"moment matrix of real dimension {2 * m * len(words)} exceeds the budget of {budget}")
    W = len(words)
    words_2k = enumerate_words(2 * k, nx, ny, na, nb, budget=None)
    free = [w for w in words_2k if is_free(w, na, nb)]
    constraints = admissibility_constraints(k, nx, ny, na, nb, words_2k)
    expander = _Expander(na, nb)
    params, index, fpos = _param_layout(m, free)
    P = len(params)
    n = m * W

    entry_words = np.empty((W, W), dtype=object)
    for s, ws in enumerate(words):
        rs = reverse(ws)
        for t, wt in enumerate(words):
            entry_words[s, t] = multiply(rs, wt)

    rows, cols, vals = [], [], []
    for i in range(m):
        for j in range(m):
            cache: dict = {}
            for s in range(W):
                for t in range(W):
                    w = entry_words[s, t]
                    if w is NULL:
                        continue
                    if w not in cache:
                        cache[w] = _entry_coeffs(i, j, w, expander, index, fpos)
                    flat = (i * W + s) * n + (j * W + t)
                    for kk, v in cache[w].items():
                        rows.append(kk)
                        cols.append(flat)
                        vals.append(v)
    G = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(P, n * n))

    # normalisation sum_i phi_ii(eps) = 1; eliminate the last diagonal eps parameter
    eps = fpos[EPSILON]
    diag_eps = [index[("d", i, i, eps)] for i in range(m)]
    piv = diag_eps[-1]
    F0 = G[piv].copy()
    keep = [p for p in range(P) if p != piv]
    G = G.tolil()
    for p in diag_eps[:-1]:
        G[p] = G[p] - G[piv]
    G = G.tocsr()[keep]
    params = [params[p] for p in keep]

    # objective coefficients
    Cobj = _objective_matrix(game, words)
    cvec = np.real(G.conj() @ Cobj.ravel())
    c0 = float(np.real(F0.conj() @ Cobj.ravel())[0])
    # dual form: S = sum theta_k G_k - (-F0); maximise c.theta  <=> minimise (-c).theta
    sdp = SdpProblem(-F0.toarray().reshape(n, n), G, -cvec, offset=0.0)
    return MomentProblem(game, k, words, free, constraints, entry_words, params,
                         sp.csr_matrix(F0), G, cvec, c0, sdp, expander)


def _objective_matrix(game: ExtendedNonlocalGame, words: list[Word]) -> np.ndarray:
    """Hermitian C with <C, M> equal to the expected pay-off read off M."""
    m = game.m
    W = len(words)
    pos = {w: i for i, w in enumerate(words)}
    C = np.zeros((m, W, m, W), dtype=complex)
    for x, y, a, b in itertools.product(range(game.nx), range(game.ny), range(game.na), range(game.nb)):
        p = game.pi[x, y]
        if p == 0:
            continue
        s = pos[Word(((x, a),), ())]
        t = pos[Word((), ((y, b),))]
        C[:, s, :, t] += p * game.V[x, y, a, b]
    C = C.reshape(m * W, m * W)
    return 0.5 * (C + C.conj().T)


# ---------------------------------------------------------------------------
# solving


@dataclass
class NpaResult:
    bound: float
    pseudo: np.ndarray  # (nx, ny, na, nb, m, m)
    solution: SdpSolution
    moment_matrix: np.ndarray
    verified: bool
    reduced_dim: int

    def __iter__(self):
        yield self.bound
        yield self.pseudo
        yield self.solution


def _range_coordinates(mp: MomentProblem) -> np.ndarray:
    """Coordinates spanning a complement of the kernel shared by every
    feasible moment matrix (the completeness relations force it)."""
    n = mp.dim
    stack = sp.vstack([mp.G, mp.F0]).tocsr()
    H = np.zeros((n, n), dtype=complex)
    # sum_k G_k^* G_k via the flattened rows
    for r in range(stack.shape[0]):
        s, e = stack.indptr[r], stack.indptr[r + 1]
        if s == e:
            continue
        Gk = sp.csr_matrix((stack.data[s:e], np.divmod(stack.indices[s:e], n)), shape=(n, n))
        H += (Gk.conj().T @ Gk).toarray()
    w, U = np.linalg.eigh(0.5 * (H + H.conj().T))
    thr = 1e-9 * max(1.0, float(w[-1]))
    K = U[:, w <= thr]
    if K.shape[1] == 0:
        return np.arange(n)
    _, _, piv = sla.qr(K.conj().T, pivoting=True, mode="economic")
    drop = set(int(p) for p in piv[:K.shape[1]])
    return np.array([i for i in range(n) if i not in drop])


def reduced_problem(mp: MomentProblem) -> tuple[SdpProblem, np.ndarray]:
    """The SDP actually solved: ``mp.sdp`` restricted to the coordinates
    returned by the kernel-complement search, together with those coordinates."""
    J = _range_coordinates(mp)
    return restrict(mp.sdp, J), J


def npa_upper_bound(game, k: int = 1, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                    problem: MomentProblem | None = None) -> NpaResult:
    """Level-``k`` upper bound on the commuting measurement value.

    The reported bound is the larger of the primal and dual objective values
    at termination.  ``verified`` is False unless the solver reached optimality.
    """
    mp = problem if problem is not None else build_moment_problem(game, k)
    red, J = reduced_problem(mp)
    sol = solve(red, tol=tol, max_iter=max_iter)
    if sol.status in (Status.INFEASIBLE, Status.UNBOUNDED):
        raise RuntimeError(f"moment SDP reported {sol.status.value}")
    theta = sol.y
    M = mp.moment_matrix(theta)
    M = 0.5 * (M + M.conj().T)
    # value(primal) = <-F0, Z> and c.theta = -b.theta
    upper = mp.c0 - sol.value
    lower = mp.c0 - sol.dual_value
    bound = max(upper, lower)
    n = mp.dim
    Z = np.zeros((n, n), dtype=complex)
    Z[np.ix_(J, J)] = sol.Z
    full = SdpSolution(Z, sol.y, M, bound, min(upper, lower), sol.status, sol.primal_residual,
                       sol.dual_residual, sol.gap, sol.iterations, sol.dropped_constraints)
    return NpaResult(bound, mp.assemblage(M), full, M, sol.status is Status.OPTIMAL, len(J))


# ---------------------------------------------------------------------------
# moment matrices from explicit strategies


def moment_matrix_from_strategy(strategy, k: int, words: list[Word] | None = None,
                                proj_tol: float = 1e-10, pure_tol: float = 1e-9) -> np.ndarray:
    """Moment matrix of a pure-state projective strategy.

    With the state ``sum_j e_j (x) u_j`` and ``Pi_w`` the product of the
    projectors along ``w`` (Alice on the first tensor factor of the players'
    space, Bob on the second), entry ``((i, s), (j, t))`` is
    ``u_j^* Pi_{reverse(t)} Pi_s u_i``, the complex conjugate of the Gram
    entry ``u_i^* Pi_{reverse(s)} Pi_t u_j``.  The conjugate is the one whose
    ``((x,a),(y,b))`` blocks equal the strategy's assemblage
    ``Tr_AB[(1 (x) A (x) B) rho]``; both are feasible for the relaxation.
    """
    from .strategies import Strategy  # local import to avoid a cycle

    s: Strategy = strategy
    m, dA, dB = s.dims
    nx, na = s.alice.shape[:2]
    ny, nb = s.bob.shape[:2]
    for name, P in (("alice", s.alice), ("bob", s.bob)):
        if np.max(np.abs(P @ P - P)) > proj_tol:
            raise ValueError(f"{name} measurements are not projective")
    w, U = np.linalg.eigh(s.rho)
    if w[-1] < 1 - pure_tol or np.any(np.abs(w[:-1]) > pure_tol):
        raise ValueError("shared state is not pure; purify it by enlarging Bob's space first")
    psi = U[:, -1]
    uvecs = psi.reshape(m, dA * dB)
    if words is None:
        words = enumerate_words(k, nx, ny, na, nb, budget=None)
    IA = np.eye(dA)
    IB = np.eye(dB)
    opsA = {(x, a): np.kron(s.alice[x, a], IB) for x in range(nx) for a in range(na)}
    opsB = {(y, b): np.kron(IA, s.bob[y, b]) for y in range(ny) for b in range(nb)}

    def apply(word: Word, v):
        # Pi_w v for w = alice letters then bob letters, rightmost acts first
        for qb in reversed(word.bob):
            v = opsB[qb] @ v
        for qa in reversed(word.alice):
            v = opsA[qa] @ v
        return v

    vecs = np.zeros((m, len(words), dA * dB), dtype=complex)
    for i in range(m):
        for t, wt in enumerate(words):
            vecs[i, t] = apply(wt, uvecs[i])
    V = vecs.reshape(m * len(words), dA * dB)
    M = V @ V.conj().T
    return 0.5 * (M + M.conj().T)


@dataclass
class AuditReport:
    slot_deviation: float
    null_deviation: float
    admissibility_residual: float
    normalization_residual: float
    hermitian_deviation: float
    min_eigenvalue: float

    def max_residual(self) -> float:
        return max(self.slot_deviation, self.null_deviation, self.admissibility_residual,
                   self.normalization_residual, self.hermitian_deviation, max(0.0, -self.min_eigenvalue))

    def feasible(self, tol: float = 1e-9) -> bool:
        return self.max_residual() <= tol


def audit_moment_matrix(mp: MomentProblem, M: np.ndarray) -> AuditReport:
    """Check a full moment matrix against every constraint of ``mp`` directly
    (shared entries, null entries, completeness sums, normalisation, PSD)."""
    m = mp.m
    W = len(mp.words)
    Mb = np.asarray(M).reshape(m, W, m, W)
    groups: dict = {}
    null_dev = 0.0
    for s in range(W):
        for t in range(W):
            w = mp.entry_words[s, t]
            if w is NULL:
                null_dev = max(null_dev, float(np.max(np.abs(Mb[:, s, :, t]))))
            else:
                groups.setdefault(w, []).append((s, t))
    slot_dev = 0.0
    phi = {}
    for w, locs in groups.items():
        ref = Mb[:, locs[0][0], :, locs[0][1]]
        phi[w] = ref
        for s, t in locs[1:]:
            slot_dev = max(slot_dev, float(np.max(np.abs(Mb[:, s, :, t] - ref))))
    adm = 0.0
    for con in mp.constraints:
        if con.rhs not in phi or any(w not in phi for w in con.terms):
            continue
        lhs = sum((phi[w] for w in con.terms), np.zeros((m, m), dtype=complex))
        adm = max(adm, float(np.max(np.abs(lhs - phi[con.rhs]))))
    norm = abs(float(np.real(np.trace(phi[EPSILON]))) - 1.0)
    herm = float(np.max(np.abs(M - np.conj(M).T)))
    lo = float(np.linalg.eigvalsh(0.5 * (M + np.conj(M).T))[0])
    return AuditReport(slot_dev, null_dev, adm, norm, herm, lo)
