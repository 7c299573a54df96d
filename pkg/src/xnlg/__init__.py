"""Values and bounds for extended nonlocal games and monogamy-of-entanglement games."""

from .games import (
    DeterministicStrategy,
    ExtendedNonlocalGame,
    MonogamyGame,
    bb84_game,
    chsh_game,
    mub_game,
    overlap_constant,
    parallel_repetition,
    tfkw_bound,
    two_question_value,
    unentangled_value,
    validate,
)
from .npa import build_moment_problem, npa_upper_bound
from .strategies import Strategy, assemblage, embed_deterministic, expected_payoff, seesaw

__version__ = "0.1.0"

__all__ = [
    "DeterministicStrategy",
    "ExtendedNonlocalGame",
    "MonogamyGame",
    "Strategy",
    "assemblage",
    "bb84_game",
    "build_moment_problem",
    "chsh_game",
    "embed_deterministic",
    "expected_payoff",
    "mub_game",
    "npa_upper_bound",
    "overlap_constant",
    "parallel_repetition",
    "seesaw",
    "tfkw_bound",
    "two_question_value",
    "unentangled_value",
    "validate",
]
