"""See-saw lower bounds for the four-basis qutrit monogamy game over a sweep
of player dimensions.  Writes one JSON line per dimension and optionally the
best strategy found.

    python scripts/mub_seesaw_sweep.py --dims 3 6 9 --restarts 20 8 2
"""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from xnlg import io
from xnlg.games import mub_game, unentangled_value
from xnlg.strategies import seesaw


@dataclass
class SweepConfig:
    dims: list[int] = field(default_factory=lambda: [3, 6, 9])
    restarts: list[int] = field(default_factory=lambda: [20, 8, 2])
    iters: int = 200
    tol: float = 1e-7
    seed: int = 2024
    save_best: str | None = None


def run(cfg: SweepConfig) -> dict:
    g = mub_game()
    classical, _ = unentangled_value(g)
    best, best_s = -1.0, None
    rows = []
    for d, r in zip(cfg.dims, cfg.restarts):
        t0 = time.perf_counter()
        res = seesaw(g, d, d, restarts=r, iters=cfg.iters, seed=cfg.seed, tol=cfg.tol)
        row = {"dim": d, "restarts": r, "lower_bound": res.lower_bound,
               "advantage": res.lower_bound - classical, "best_restart": res.best_restart,
               "seconds": round(time.perf_counter() - t0, 2)}
        print(json.dumps(row))
        rows.append(row)
        if res.lower_bound > best:
            best, best_s = res.lower_bound, res.best
    if cfg.save_best and best_s is not None:
        Path(cfg.save_best).write_text(io.dump_strategy(best_s))
    return {"config": asdict(cfg), "unentangled": classical, "best": best, "rows": rows}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dims", type=int, nargs="+", default=SweepConfig().dims)
    p.add_argument("--restarts", type=int, nargs="+", default=SweepConfig().restarts)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--save-best")
    a = p.parse_args()
    if len(a.restarts) == 1:
        a.restarts = a.restarts * len(a.dims)
    if len(a.restarts) != len(a.dims):
        p.error("--restarts needs one value or one per dimension")
    out = run(SweepConfig(a.dims, a.restarts, a.iters, a.tol, a.seed, a.save_best))
    print(f"unentangled {out['unentangled']:.10f}  best see-saw {out['best']:.10f}")


if __name__ == "__main__":
    main()
