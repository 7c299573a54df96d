import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xnlg import games as G
from xnlg.games import (
    BudgetExceeded,
    ExtendedNonlocalGame,
    GameError,
    MonogamyGame,
    bb84_game,
    chsh_game,
    monogamy_to_extended,
    monogamy_unentangled_value,
    mub_bases,
    mub_game,
    overlap_constant,
    parallel_repetition,
    random_projective_monogamy_game,
    tfkw_bound,
    two_question_value,
    unentangled_value,
    validate,
)
from xnlg.linalg import op_norm, random_projector

COS2 = np.cos(np.pi / 8) ** 2
seeds = st.integers(0, 2**32 - 1)


def brute_force_value(g: ExtendedNonlocalGame) -> float:
    """Independent oracle: loop over every (f, g) with itertools and take λmax."""
    best = -np.inf
    for f in itertools.product(range(g.na), repeat=g.nx):
        for h in itertools.product(range(g.nb), repeat=g.ny):
            W = sum(g.pi[x, y] * g.V[x, y, f[x], h[y]] for x in range(g.nx) for y in range(g.ny))
            best = max(best, np.linalg.eigvalsh(W)[-1])
    return best


def test_bb84_structure():
    g = bb84_game()
    assert g.m == 2 and g.nx == 2 and g.na == 2
    assert np.allclose(g.R[1, 0], 0.5 * np.ones((2, 2)))
    assert np.allclose(g.R.sum(axis=1), np.eye(2))
    assert validate(g) == []


def test_mub_bases_orthonormal_and_unbiased():
    B = mub_bases()
    assert B.shape == (4, 3, 3)
    for x in range(4):
        assert np.allclose(B[x].conj() @ B[x].T, np.eye(3))
    overlaps = [abs(np.vdot(B[x, a], B[y, b])) ** 2
                for x in range(4) for y in range(x + 1, 4) for a in range(3) for b in range(3)]
    assert len(overlaps) == 54
    assert np.allclose(overlaps, 1 / 3)


def test_compiled_bb84_has_four_nonzero_entries():
    e = monogamy_to_extended(bb84_game())
    nz = [k for k in itertools.product(range(2), repeat=4) if np.any(e.V[k])]
    assert len(nz) == 4
    assert all(x == y and a == b for x, y, a, b in nz)
    assert np.allclose(e.pi, np.diag([0.5, 0.5]))


def test_validation_messages():
    g = bb84_game()
    bad_pi = MonogamyGame(np.array([0.45, 0.45]), g.R)
    v = validate(bad_pi)
    assert v and v[0].field == "pi" and "distribution" in v[0].message
    R = g.R.copy()
    R[1, 0] = 0.9 * R[1, 0]
    v = validate(MonogamyGame(g.pi, R))
    assert any(e.field == "R[x=1]" for e in v)
    e = monogamy_to_extended(g)
    V = e.V.copy()
    V[0, 0, 0, 0, 0, 1] = 1.0
    v = validate(ExtendedNonlocalGame(e.pi, V))
    assert any("observable" in x.message for x in v)
    assert validate(e) == []


def test_bad_shapes_rejected():
    with pytest.raises(GameError):
        ExtendedNonlocalGame(np.ones((2, 2)) / 4, np.zeros((2, 3, 2, 2, 1, 1)))
    with pytest.raises(GameError):
        MonogamyGame(np.ones(2) / 2, np.zeros((3, 2, 2, 2)))


def test_known_values():
    v, w = unentangled_value(bb84_game())
    assert abs(v - COS2) < 1e-12
    v, _ = unentangled_value(mub_game())
    assert abs(v - (3 + np.sqrt(5)) / 8) < 1e-12
    v, _ = unentangled_value(chsh_game())
    assert abs(v - 0.75) < 1e-12


def test_witness_attains_value():
    g = monogamy_to_extended(mub_game())
    v, w = unentangled_value(g)
    W = sum(g.pi[x, y] * g.V[x, y, w.f[x], w.g[y]] for x in range(g.nx) for y in range(g.ny))
    u = w.referee_state
    assert abs(np.vdot(u, W @ u).real - v) < 1e-12


@given(seeds)
def test_value_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    m, nx, ny, na, nb = 2, 2, 2, 2, 2
    pi = rng.random((nx, ny))
    pi /= pi.sum()
    V = rng.standard_normal((nx, ny, na, nb, m, m)) + 1j * rng.standard_normal((nx, ny, na, nb, m, m))
    V = 0.5 * (V + np.conj(np.swapaxes(V, -1, -2)))
    g = ExtendedNonlocalGame(pi, V)
    assert abs(unentangled_value(g)[0] - brute_force_value(g)) < 1e-10


@given(seeds)
def test_compilation_preserves_value(seed):
    mg = random_projective_monogamy_game(3, 3, 2, np.random.default_rng(seed), uniform=False)
    assert abs(unentangled_value(mg)[0] - monogamy_unentangled_value(mg)) < 1e-10


def test_single_answer_game_value_one():
    mg = MonogamyGame(np.array([1.0]), np.eye(2)[None, None])
    assert abs(unentangled_value(mg)[0] - 1.0) < 1e-12


def test_budget_refusal(monkeypatch):
    monkeypatch.setenv("XNLG_BUDGET", "10")
    with pytest.raises(BudgetExceeded):
        unentangled_value(mub_game())


def test_parallel_repetition_structure():
    g = bb84_game()
    assert np.allclose(parallel_repetition(g, 1).R, g.R)
    g2 = parallel_repetition(g, 2)
    assert (g2.m, g2.nx, g2.na) == (4, 4, 4)
    assert np.allclose(g2.R.sum(axis=1), np.eye(4))
    assert np.allclose(g2.pi, 0.25)
    # lexicographic: question (x1, x2) -> index 2 x1 + x2
    assert np.allclose(g2.R[1, 2], np.kron(g.R[0, 1], g.R[1, 0]))


def test_bb84_two_fold_value():
    v, _ = unentangled_value(parallel_repetition(bb84_game(), 2))
    assert abs(v - COS2**2) < 1e-8
    assert abs(v - tfkw_bound(bb84_game(), 2)) < 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_repetition_supermultiplicative(seed):
    mg = random_projective_monogamy_game(2, 2, 2, np.random.default_rng(seed))
    v1 = unentangled_value(mg)[0]
    v2 = unentangled_value(parallel_repetition(mg, 2))[0]
    assert v2 >= v1**2 - 1e-10


def test_overlap_constants():
    assert abs(overlap_constant(bb84_game()) - 0.5) < 1e-12
    assert abs(overlap_constant(mub_game()) - 1 / 3) < 1e-12
    g = bb84_game()
    same = MonogamyGame(g.pi, np.stack([g.R[0], g.R[0]]))
    assert abs(overlap_constant(same) - 1.0) < 1e-12
    with pytest.raises(GameError):
        overlap_constant(MonogamyGame(np.array([1.0]), g.R[:1]))


def test_tfkw_bound_values():
    assert abs(tfkw_bound(bb84_game()) - COS2) < 1e-12
    assert abs(tfkw_bound(mub_game()) - (0.25 + 0.75 * np.sqrt(1 / 3))) < 1e-12
    assert abs(tfkw_bound(mub_game()) - 0.6830) < 1e-4
    assert abs(tfkw_bound(mub_game(), 2) - tfkw_bound(mub_game()) ** 2) < 1e-12
    with pytest.raises(GameError, match="uniform"):
        tfkw_bound(MonogamyGame(np.array([0.3, 0.7]), bb84_game().R))


@given(seeds, st.sampled_from([2, 3, 4]), st.sampled_from([2, 3]))
def test_tfkw_bounds_unentangled_value(seed, m, na):
    mg = random_projective_monogamy_game(m, 3, na, np.random.default_rng(seed))
    assert tfkw_bound(mg) >= unentangled_value(mg)[0] - 1e-9


@given(seeds, st.sampled_from([2, 3, 4]), st.sampled_from([2, 3]))
def test_two_question_closed_form(seed, m, na):
    mg = random_projective_monogamy_game(m, 2, na, np.random.default_rng(seed))
    v = unentangled_value(mg)[0]
    assert abs(two_question_value(mg) - v) < 1e-8
    assert abs(tfkw_bound(mg) - v) < 1e-8


def test_two_question_hypotheses():
    g = bb84_game()
    assert abs(two_question_value(g) - COS2) < 1e-12
    assert abs(two_question_value(MonogamyGame(g.pi, np.stack([g.R[0], g.R[0]]))) - 1) < 1e-12
    with pytest.raises(GameError):
        two_question_value(mub_game())
    with pytest.raises(GameError):
        two_question_value(MonogamyGame(np.array([0.4, 0.6]), g.R))
    R = g.R.copy()
    R[0] = [[[0.7, 0], [0, 0.3]], [[0.3, 0], [0, 0.7]]]
    with pytest.raises(GameError):
        two_question_value(MonogamyGame(g.pi, R))


@given(seeds, st.integers(2, 8))
def test_projector_pair_norm_identity(seed, d):
    rng = np.random.default_rng(seed)
    r0, r1 = rng.integers(1, d + 1, size=2)
    P0 = random_projector(d, int(r0), rng)
    P1 = random_projector(d, int(r1), rng)
    assert abs(op_norm(P0 + P1) - 1 - op_norm(P0 @ P1)) <= 1e-9
