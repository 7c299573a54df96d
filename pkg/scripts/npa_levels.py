"""Table of moment-hierarchy upper bounds next to the unentangled value and a
see-saw lower bound for the built-in games.

    python scripts/npa_levels.py --levels 1 2
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

from xnlg.games import BudgetExceeded, bb84_game, chsh_game, mub_game, unentangled_value
from xnlg.npa import npa_upper_bound
from xnlg.strategies import seesaw

GAMES = {"chsh": chsh_game, "bb84": bb84_game, "mub43": mub_game}


@dataclass
class LevelsConfig:
    games: list[str] = field(default_factory=lambda: list(GAMES))
    levels: list[int] = field(default_factory=lambda: [1, 2])
    seesaw_dim: int = 3
    seesaw_restarts: int = 3
    seed: int = 0


def run(cfg: LevelsConfig):
    print(f"{'game':6} {'unentangled':>12} {'see-saw':>12} " + " ".join(f"{'level ' + str(k):>12}" for k in cfg.levels))
    for name in cfg.games:
        g = GAMES[name]()
        classical, _ = unentangled_value(g)
        lo = seesaw(g, cfg.seesaw_dim, cfg.seesaw_dim, restarts=cfg.seesaw_restarts, seed=cfg.seed).lower_bound
        cells = []
        for k in cfg.levels:
            t0 = time.perf_counter()
            try:
                r = npa_upper_bound(g, k)
                cells.append(f"{r.bound:12.8f}")
            except BudgetExceeded:
                cells.append(f"{'(budget)':>12}")
            print(f"  {name} level {k}: {time.perf_counter() - t0:.1f}s", flush=True)
        print(f"{name:6} {classical:12.8f} {lo:12.8f} " + " ".join(cells))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--games", nargs="+", choices=list(GAMES), default=list(GAMES))
    p.add_argument("--levels", type=int, nargs="+", default=[1, 2])
    p.add_argument("--seesaw-dim", type=int, default=3)
    p.add_argument("--seesaw-restarts", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    run(LevelsConfig(a.games, a.levels, a.seesaw_dim, a.seesaw_restarts, a.seed))


if __name__ == "__main__":
    main()
