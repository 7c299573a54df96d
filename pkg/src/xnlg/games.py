"""Extended nonlocal games and monogamy-of-entanglement games.

Array layout used throughout the package:

* ``ExtendedNonlocalGame.V`` has shape ``(nx, ny, na, nb, m, m)`` so that
  ``V[x, y, a, b]`` is the referee observable for answers ``(a, b)`` to
  questions ``(x, y)``.
* ``MonogamyGame.R`` has shape ``(nx, na, m, m)`` with ``R[x, a]`` the
  referee's measurement operator for outcome ``a`` of question ``x``.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .linalg import herm_eig, op_norm, psd_sqrt, random_unitary, tensor

DEFAULT_BUDGET = 10**7
PROJ_TOL = 1e-10
COMPLETENESS_TOL = 1e-10

__all__ = [
    "BudgetExceeded",
    "GameError",
    "Violation",
    "ExtendedNonlocalGame",
    "MonogamyGame",
    "DeterministicStrategy",
    "enumeration_budget",
    "validate",
    "unentangled_value",
    "monogamy_to_extended",
    "monogamy_unentangled_value",
    "bb84_game",
    "mub_game",
    "chsh_game",
    "parallel_repetition",
    "overlap_constant",
    "tfkw_bound",
    "two_question_value",
    "random_projective_monogamy_game",
]


class GameError(ValueError):
    """A game violates the hypothesis of the requested operation."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured budget."""


def enumeration_budget(default: int = DEFAULT_BUDGET) -> int:
    env = os.environ.get("XNLG_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise GameError(f"XNLG_BUDGET must be an integer, got {env!r}") from None
    return default


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self):
        return f"{self.field}: {self.message}"


@dataclass(frozen=True, eq=False)
class ExtendedNonlocalGame:
    pi: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        V = np.asarray(self.V, dtype=complex)
        if pi.ndim != 2 or V.ndim != 6 or V.shape[:2] != pi.shape or V.shape[-1] != V.shape[-2]:
            raise GameError(f"inconsistent shapes pi{pi.shape} V{V.shape}")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "V", V)

    @classmethod
    def zeros(cls, m: int, nx: int, ny: int, na: int, nb: int) -> "ExtendedNonlocalGame":
        return cls(np.full((nx, ny), 1.0 / (nx * ny)), np.zeros((nx, ny, na, nb, m, m), dtype=complex))

    @property
    def m(self) -> int:
        return self.V.shape[-1]

    @property
    def nx(self) -> int:
        return self.V.shape[0]

    @property
    def ny(self) -> int:
        return self.V.shape[1]

    @property
    def na(self) -> int:
        return self.V.shape[2]

    @property
    def nb(self) -> int:
        return self.V.shape[3]

    def shape(self) -> tuple[int, int, int, int, int]:
        return (self.m, self.nx, self.ny, self.na, self.nb)


@dataclass(frozen=True, eq=False)
class MonogamyGame:
    pi: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        R = np.asarray(self.R, dtype=complex)
        if pi.ndim != 1 or R.ndim != 4 or R.shape[0] != pi.shape[0] or R.shape[-1] != R.shape[-2]:
            raise GameError(f"inconsistent shapes pi{pi.shape} R{R.shape}")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "R", R)

    @property
    def m(self) -> int:
        return self.R.shape[-1]

    @property
    def nx(self) -> int:
        return self.R.shape[0]

    @property
    def na(self) -> int:
        return self.R.shape[1]

    def is_uniform(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.pi - 1.0 / self.nx) <= tol))

    def is_projective(self, tol: float = PROJ_TOL) -> bool:
        R = self.R
        return bool(np.max(np.abs(R @ R - R)) <= tol)


@dataclass(frozen=True, eq=False)
class DeterministicStrategy:
    f: tuple[int, ...]
    g: tuple[int, ...]
    referee_state: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.asarray(self.referee_state, dtype=complex).ravel()
        nrm = np.linalg.norm(u)
        if abs(nrm - 1.0) > 1e-12:
            raise GameError(f"referee state not normalised (norm {nrm})")
        object.__setattr__(self, "f", tuple(int(a) for a in self.f))
        object.__setattr__(self, "g", tuple(int(b) for b in self.g))
        object.__setattr__(self, "referee_state", u)


def _prob_violations(pi: np.ndarray, name: str, out: list):
    if not np.all(np.isfinite(pi)):
        out.append(Violation(name, "distribution has non-finite entries"))
        return
    if np.any(pi < 0):
        out.append(Violation(name, "distribution has negative entries"))
    if abs(float(pi.sum()) - 1.0) > 1e-12:
        out.append(Violation(name, f"distribution sums to {float(pi.sum()):.15g}, not 1"))


def validate(game) -> list[Violation]:
    """Check every invariant of an extended or monogamy game.

    Returns the (possibly empty) list of violations rather than raising.
    """
    out: list[Violation] = []
    if isinstance(game, MonogamyGame):
        _prob_violations(game.pi, "pi", out)
        R = game.R
        if not np.all(np.isfinite(R)):
            out.append(Violation("R", "non-finite entries"))
            return out
        m = game.m
        for x in range(game.nx):
            for a in range(game.na):
                P = R[x, a]
                if np.max(np.abs(P - P.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(P))):
                    out.append(Violation(f"R[x={x},a={a}]", "observable is not Hermitian"))
                    continue
                lo = np.linalg.eigvalsh(P)[0]
                if lo < -1e-10:
                    out.append(Violation(f"R[x={x},a={a}]", f"not positive semidefinite (eigenvalue {lo:.3g})"))
            dev = np.max(np.abs(R[x].sum(axis=0) - np.eye(m)))
            if dev > COMPLETENESS_TOL:
                out.append(Violation(f"R[x={x}]", f"measurement for question x={x} does not sum to identity (deviation {dev:.3g})"))
        return out
    if isinstance(game, ExtendedNonlocalGame):
        _prob_violations(game.pi, "pi", out)
        V = game.V
        if not np.all(np.isfinite(V)):
            out.append(Violation("V", "observable has non-finite entries"))
            return out
        dev = np.abs(V - np.conj(np.swapaxes(V, -1, -2)))
        bad = np.argwhere(np.max(dev, axis=(-1, -2)) > 1e-12 * max(1.0, float(np.max(np.abs(V))) if V.size else 1.0))
        for x, y, a, b in bad:
            out.append(Violation(f"V[x={x},y={y},a={a},b={b}]", "observable is not Hermitian"))
        return out
    raise TypeError(f"not a game: {type(game).__name__}")


def _require_valid(game):
    v = validate(game)
    if v:
        raise GameError("; ".join(str(e) for e in v))


def _assignments(n_answers: int, n_questions: int) -> np.ndarray:
    """All maps Q -> A as rows, mixed-radix order with question 0 least significant."""
    total = n_answers**n_questions
    idx = np.arange(total)
    return np.stack([(idx // n_answers**q) % n_answers for q in range(n_questions)], axis=1)


def unentangled_value(game: ExtendedNonlocalGame, budget: int | None = None, chunk: int = 1 << 15):
    """Exact unentangled value by enumerating deterministic strategies.

    Returns ``(value, witness)``.  The value for a pair ``(f, g)`` is the
    largest eigenvalue of ``sum_{x,y} pi(x,y) V(f(x), g(y) | x, y)``; ties are
    resolved in favour of the first pair in enumeration order (``f`` outer,
    ``g`` inner, each a mixed-radix counter).
    """
    if isinstance(game, MonogamyGame):
        game = monogamy_to_extended(game)
    _require_valid(game)
    budget = enumeration_budget() if budget is None else budget
    nf = game.na**game.nx
    ng = game.nb**game.ny
    if nf * ng > budget:
        raise BudgetExceeded(f"{nf} x {ng} deterministic strategies exceed the budget of {budget}")
    F = _assignments(game.na, game.nx)
    G = _assignments(game.nb, game.ny)
    m = game.m
    pairs = [(x, y) for x in range(game.nx) for y in range(game.ny) if game.pi[x, y] != 0]

    best_val = -np.inf
    best = None
    fchunk = max(1, chunk // ng)
    for f0 in range(0, nf, fchunk):
        f1 = min(nf, f0 + fchunk)
        W = np.zeros((f1 - f0, ng, m, m), dtype=complex)
        for x, y in pairs:
            Vxy = game.V[x, y]
            W += game.pi[x, y] * Vxy[F[f0:f1, x][:, None], G[None, :, y]]
        w, U = herm_eig(W.reshape(-1, m, m))
        top = w[:, -1]
        k = int(np.argmax(top >= top.max() - 1e-13))
        # keep the first-found maximiser across chunks
        if top[k] > best_val + 1e-13:
            best_val = float(top[k])
            fi, gi = divmod(k, ng)
            best = (F[f0 + fi], G[gi], U[k, :, -1])
    u = best[2] / np.linalg.norm(best[2])
    return best_val, DeterministicStrategy(tuple(best[0]), tuple(best[1]), u)


def monogamy_to_extended(mg: MonogamyGame) -> ExtendedNonlocalGame:
    """V(a,a|x,x) = R(a|x), everything else zero; pi supported on the diagonal."""
    nx, na, m = mg.nx, mg.na, mg.m
    pi = np.zeros((nx, nx))
    V = np.zeros((nx, nx, na, na, m, m), dtype=complex)
    for x in range(nx):
        pi[x, x] = mg.pi[x]
        for a in range(na):
            V[x, x, a, a] = mg.R[x, a]
    return ExtendedNonlocalGame(pi, V)


def monogamy_unentangled_value(mg: MonogamyGame, budget: int | None = None) -> float:
    """max over f: X -> A of the spectral norm of sum_x pi(x) R(f(x)|x)."""
    budget = enumeration_budget() if budget is None else budget
    if mg.na**mg.nx > budget:
        raise BudgetExceeded(f"{mg.na ** mg.nx} answer maps exceed the budget of {budget}")
    best = 0.0
    for f in itertools.product(range(mg.na), repeat=mg.nx):
        W = sum(mg.pi[x] * mg.R[x, f[x]] for x in range(mg.nx))
        best = max(best, op_norm(W))
    return best


def bb84_game() -> MonogamyGame:
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    R = np.zeros((2, 2, 2, 2), dtype=complex)
    R[0, 0] = np.diag([1, 0])
    R[0, 1] = np.diag([0, 1])
    R[1, 0] = np.outer(plus, plus)
    R[1, 1] = np.outer(minus, minus)
    return MonogamyGame(np.array([0.5, 0.5]), R)


def mub_bases() -> np.ndarray:
    """Four mutually unbiased bases of C^3; entry ``[x, a]`` is a basis vector."""
    z = np.exp(2j * np.pi / 3)
    s = 1 / math.sqrt(3)
    B = np.array([
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[s, s, s], [s, s * z**2, s * z], [s, s * z, s * z**2]],
        [[s, s, s * z], [s, s * z**2, s * z**2], [s, s * z, s]],
        [[s, s, s * z**2], [s, s * z**2, s], [s, s * z, s * z]],
    ], dtype=complex)
    return B


def mub_game() -> MonogamyGame:
    B = mub_bases()
    R = np.einsum("xai,xaj->xaij", B, B.conj())
    return MonogamyGame(np.full(4, 0.25), R)


def chsh_game() -> ExtendedNonlocalGame:
    """CHSH as an extended game with a trivial (m = 1) referee."""
    V = np.zeros((2, 2, 2, 2, 1, 1), dtype=complex)
    for x, y, a, b in itertools.product(range(2), repeat=4):
        if (a ^ b) == (x & y):
            V[x, y, a, b, 0, 0] = 1.0
    return ExtendedNonlocalGame(np.full((2, 2), 0.25), V)


def parallel_repetition(mg: MonogamyGame, n: int, budget: int | None = None) -> MonogamyGame:
    """``mg`` played ``n`` times in parallel.

    Question tuples and answer tuples are indexed in lexicographic order
    (first round most significant), matching the Kronecker factor order of
    ``R(a1..an|x1..xn) = R(a1|x1) (x) ... (x) R(an|xn)``.
    """
    if n < 1:
        raise GameError("number of repetitions must be positive")
    budget = enumeration_budget() if budget is None else budget
    size = (mg.nx * mg.na) ** n
    if size > budget:
        raise BudgetExceeded(f"{size} question/answer tuples exceed the budget of {budget}")
    if n == 1:
        return mg
    xs = list(itertools.product(range(mg.nx), repeat=n))
    as_ = list(itertools.product(range(mg.na), repeat=n))
    m = mg.m**n
    pi = np.array([np.prod([mg.pi[x] for x in xt]) for xt in xs])
    R = np.zeros((len(xs), len(as_), m, m), dtype=complex)
    for i, xt in enumerate(xs):
        for j, at in enumerate(as_):
            R[i, j] = tensor([mg.R[x, a] for x, a in zip(xt, at)])
    return MonogamyGame(pi, R)


def overlap_constant(mg: MonogamyGame) -> float:
    """max over x != y and a, b of ||sqrt R(a|x) sqrt R(b|y)||^2."""
    if mg.nx < 2:
        raise GameError("overlap constant needs at least two questions")
    roots = [[psd_sqrt(mg.R[x, a]) for a in range(mg.na)] for x in range(mg.nx)]
    best = 0.0
    for x in range(mg.nx):
        for y in range(mg.nx):
            if x == y:
                continue
            for a in range(mg.na):
                for b in range(mg.na):
                    best = max(best, op_norm(roots[x][a] @ roots[y][b]) ** 2)
    return best


def tfkw_bound(mg: MonogamyGame, n: int = 1) -> float:
    """Parallel repetition upper bound (1/|X| + (|X|-1)/|X| sqrt(c))^n.

    The bound is only proved for a uniform question distribution, so other
    distributions are rejected.
    """
    if not mg.is_uniform():
        raise GameError("the parallel repetition bound requires the question distribution to be uniform over X")
    if n < 1:
        raise GameError("number of repetitions must be positive")
    k = mg.nx
    c = overlap_constant(mg)
    return (1.0 / k + (k - 1) / k * math.sqrt(c)) ** n


def two_question_value(mg: MonogamyGame) -> float:
    """Closed form 1/2 + 1/2 max_{a,b} ||R(a|0) R(b|1)|| for two uniform,
    projective questions.  Under these hypotheses it is both the unentangled
    and the quantum value."""
    if mg.nx != 2:
        raise GameError(f"closed form needs exactly two questions, got {mg.nx}")
    if not mg.is_uniform():
        raise GameError("closed form needs a uniform question distribution")
    if not mg.is_projective():
        raise GameError("closed form needs projective referee measurements")
    best = 0.0
    for a in range(mg.na):
        for b in range(mg.na):
            best = max(best, op_norm(mg.R[0, a] @ mg.R[1, b]))
    return 0.5 + 0.5 * best


def random_projective_measurement(d: int, n_out: int, rng: np.random.Generator) -> np.ndarray:
    """Projective measurement with ``n_out`` outcomes on C^d.

    Columns of a Haar-random unitary are dealt round-robin to the outcomes,
    so when ``d < n_out`` the trailing outcomes are the zero operator.
    """
    U = random_unitary(d, rng)
    P = np.zeros((n_out, d, d), dtype=complex)
    for j in range(d):
        u = U[:, j]
        P[j % n_out] += np.outer(u, u.conj())
    return P


def random_projective_monogamy_game(m: int, nx: int, na: int, rng: np.random.Generator,
                                    uniform: bool = True) -> MonogamyGame:
    R = np.stack([random_projective_measurement(m, na, rng) for _ in range(nx)])
    if uniform:
        pi = np.full(nx, 1.0 / nx)
    else:
        pi = rng.dirichlet(np.ones(nx))
    return MonogamyGame(pi, R)
