"""Parallel repetition: exact unentangled value of G^n against the closed-form
upper bound, for BB84 and the qutrit four-basis game.

    python scripts/repetition_bounds.py --max-n 2
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from xnlg.games import (
    BudgetExceeded,
    bb84_game,
    mub_game,
    overlap_constant,
    parallel_repetition,
    tfkw_bound,
    unentangled_value,
)


@dataclass
class RepetitionConfig:
    max_n: int = 2


def run(cfg: RepetitionConfig):
    for name, g in (("bb84", bb84_game()), ("mub43", mub_game())):
        print(f"{name}: overlap constant c = {overlap_constant(g):.12f}")
        for n in range(1, cfg.max_n + 1):
            bound = tfkw_bound(g, n)
            try:
                v = f"{unentangled_value(parallel_repetition(g, n))[0]:.10f}"
            except BudgetExceeded:
                v = "(over budget)"
            print(f"  n={n}: unentangled {v:>14}   bound {bound:.10f}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--max-n", type=int, default=2)
    run(RepetitionConfig(p.parse_args().max_n))


if __name__ == "__main__":
    main()
