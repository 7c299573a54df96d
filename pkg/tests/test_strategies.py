import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xnlg.games import (
    ExtendedNonlocalGame,
    bb84_game,
    chsh_game,
    monogamy_to_extended,
    mub_game,
    random_projective_monogamy_game,
    two_question_value,
    unentangled_value,
)
from xnlg.linalg import partial_trace, random_hermitian
from xnlg.strategies import (
    Strategy,
    StrategyError,
    assemblage,
    embed_deterministic,
    expected_payoff,
    expected_payoff_direct,
    optimal_povm,
    random_strategy,
    seesaw,
    seesaw_rng,
)

COS2 = np.cos(np.pi / 8) ** 2
seeds = st.integers(0, 2**32 - 1)


def random_game(rng, m, nx, ny, na, nb):
    pi = rng.random((nx, ny))
    pi /= pi.sum()
    V = np.stack([[[[random_hermitian(m, rng) for _ in range(nb)] for _ in range(na)]
                   for _ in range(ny)] for _ in range(nx)])
    return ExtendedNonlocalGame(pi, V)


def test_strategy_validation(rng):
    s = random_strategy(2, 2, 2, 2, 2, 2, 2, rng)
    with pytest.raises(StrategyError):
        Strategy(s.rho * 2, s.alice, s.bob, 2)
    bad = s.alice.copy()
    bad[0, 0] *= 0.5
    with pytest.raises(StrategyError):
        Strategy(s.rho, bad, s.bob, 2)
    with pytest.raises(StrategyError):
        Strategy(s.rho, s.alice, s.bob, 3)


def test_product_strategy_factorizes(rng):
    m, dA, dB = 2, 2, 3
    def dens(n):
        G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        r = G @ G.conj().T
        return r / np.trace(r).real
    rR, rA, rB = dens(m), dens(dA), dens(dB)
    s = random_strategy(m, 2, 3, 2, 2, dA, dB, rng, projective=False)
    s = Strategy(np.kron(np.kron(rR, rA), rB), s.alice, s.bob, m)
    K = assemblage(s)
    for x, y, a, b in np.ndindex(2, 2, 3, 2):
        pa = np.trace(s.alice[x, a] @ rA)
        pb = np.trace(s.bob[y, b] @ rB)
        assert np.allclose(K[a, b, x, y], pa * pb * rR)


def test_trivial_povms_give_reduced_state(rng):
    s = random_strategy(3, 1, 1, 1, 1, 2, 2, rng, pure=False)
    K = assemblage(s).K
    assert np.allclose(K[0, 0, 0, 0], partial_trace(s.rho, [3, 2, 2], [0]))


@given(seeds, st.booleans(), st.booleans())
def test_assemblage_invariants(seed, projective, pure):
    rng = np.random.default_rng(seed)
    s = random_strategy(2, 2, 3, 3, 2, 2, 3, rng, projective=projective, pure=pure)
    K = assemblage(s)
    ref = K.referee_states()
    assert np.allclose(ref, ref[0, 0], atol=1e-9)
    assert abs(np.trace(ref[0, 0]).real - 1) < 1e-9
    assert np.linalg.eigvalsh(K.K).min() > -1e-9


@given(seeds)
@settings(max_examples=100)
def test_payoff_paths_agree(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng, 2, 2, 2, 2, 3)
    s = random_strategy(2, 2, 2, 2, 3, 2, 2, rng, projective=False, pure=False)
    assert abs(expected_payoff(g, s) - expected_payoff_direct(g, s)) < 1e-10


def test_zero_game_pays_zero(rng):
    g = ExtendedNonlocalGame.zeros(2, 2, 2, 2, 2)
    assert expected_payoff(g, random_strategy(2, 2, 2, 2, 2, 2, 2, rng)) == 0.0


def test_dimension_mismatch(rng):
    with pytest.raises(StrategyError):
        expected_payoff(bb84_game(), random_strategy(3, 2, 2, 2, 2, 1, 1, rng))


@pytest.mark.parametrize("game, value", [(bb84_game(), COS2), (chsh_game(), 0.75)])
def test_embedded_witness(game, value):
    v, w = unentangled_value(game)
    s = embed_deterministic(game, w)
    assert (s.dA, s.dB) == (1, 1)
    assert np.allclose(s.alice.sum(axis=1), 1)
    assert abs(expected_payoff(game, s) - value) < 1e-12


def test_optimal_povm_matches_eigenbasis(rng):
    # for two outcomes, the optimum projects onto the positive part of F0 - F1
    F = np.stack([random_hermitian(3, rng), random_hermitian(3, rng)])
    P, st_ = optimal_povm(F)
    w = np.linalg.eigvalsh(F[0] - F[1])
    best = np.trace(F[1]).real + w[w > 0].sum()
    got = sum(np.vdot(F[a], P[a]).real for a in range(2))
    assert abs(got - best) < 1e-7
    assert np.allclose(P.sum(axis=0), np.eye(3), atol=1e-10)


def test_seesaw_bb84():
    res = seesaw(bb84_game(), 2, 2, restarts=5, seed=1)
    assert COS2 - 1e-4 <= res.lower_bound <= COS2 + 1e-6
    assert abs(expected_payoff(bb84_game(), res.best) - res.lower_bound) < 1e-12


def test_seesaw_traces_monotone():
    res = seesaw(mub_game(), 2, 2, restarts=3, seed=3)
    for t in res.traces:
        assert np.all(np.diff(t) >= -1e-9)


def test_seesaw_deterministic():
    a = seesaw(bb84_game(), 2, 2, restarts=2, seed=7)
    b = seesaw(bb84_game(), 2, 2, restarts=2, seed=7)
    assert a.lower_bound == b.lower_bound
    assert a.traces == b.traces
    assert np.array_equal(seesaw_rng(7, 1).random(3), seesaw_rng(7, 1).random(3))
    assert not np.array_equal(seesaw_rng(7, 1).random(3), seesaw_rng(7, 2).random(3))


@pytest.mark.parametrize("game", [bb84_game(), mub_game(), chsh_game()])
def test_seesaw_passthrough(game):
    v, w = unentangled_value(game)
    res = seesaw(game, restarts=1, iters=0, init=embed_deterministic(game, w))
    assert abs(res.lower_bound - v) < 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_seesaw_respects_two_question_value(seed):
    rng = np.random.default_rng(100 + seed)
    m = int(rng.choice([2, 3, 4]))
    na = int(rng.choice([2, 3]))
    mg = random_projective_monogamy_game(m, 2, na, rng)
    res = seesaw(mg, 4, 4, restarts=2, seed=seed)
    assert res.lower_bound <= two_question_value(mg) + 1e-5


def test_seesaw_rejects_bad_dims():
    with pytest.raises(StrategyError):
        seesaw(bb84_game(), 0, 2)
