"""``xnlg`` command-line front end.

Exit codes: 0 success, 1 invalid input, 2 solver did not converge,
3 refused because of the enumeration / moment-matrix budget.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import games as G
from . import io
from .games import BudgetExceeded, GameError, MonogamyGame
from .sdp import DEFAULT_MAX_ITER, DEFAULT_TOL, Status

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NONCONVERGED = 2
EXIT_BUDGET = 3

BUILTINS = {
    "bb84": G.bb84_game,
    "mub43": G.mub_game,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; that code means non-convergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


@dataclass
class ResultRecord:
    method: str
    value: float
    status: str
    parameters: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False, separators=(",", ":"))

    def to_table(self) -> str:
        rows = [("method", self.method), ("value", f"{self.value:.10f}"), ("status", self.status)]
        rows += [(f"param.{k}", _fmt(v)) for k, v in self.parameters.items()]
        rows += [(f"diag.{k}", _fmt(v)) for k, v in self.diagnostics.items()]
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(w)}  {v}" for k, v in rows)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(u) for u in v)
    return str(v)


def load_source(src: str):
    """A game from a JSON path or ``builtin:<name>``."""
    if src.startswith("builtin:"):
        name = src.split(":", 1)[1]
        if name not in BUILTINS:
            raise UsageError(f"unknown builtin {name!r} (choose from {', '.join(BUILTINS)})")
        return BUILTINS[name]()
    return io.load(src).game


def _emit(rec: ResultRecord, as_json: bool):
    print(rec.to_json() if as_json else rec.to_table())


def cmd_validate(args) -> int:
    try:
        game = io.load(args.file, check=False).game
    except io.FormatError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    violations = G.validate(game)
    if violations:
        for v in violations:
            print(f"invalid: {v}", file=sys.stderr)
        return EXIT_INVALID
    kind = "monogamy" if isinstance(game, MonogamyGame) else "extended"
    print(f"ok: {kind} game, m={game.m}")
    return EXIT_OK


def cmd_builtin(args) -> int:
    game = BUILTINS[args.name]()
    if args.repeat > 1:
        game = G.parallel_repetition(game, args.repeat)
    text = io.dumps(game)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_value(args) -> int:
    game = load_source(args.source)
    t0 = time.perf_counter()
    params: dict = {"source": args.source}
    diag: dict = {}
    status = "Optimal"
    code = EXIT_OK
    if args.method == "unentangled":
        value, w = G.unentangled_value(game)
        diag["f"] = list(w.f)
        diag["g"] = list(w.g)
        method = "unentangled"
    elif args.method == "seesaw":
        from .strategies import seesaw

        params.update(dim_a=args.dim_a, dim_b=args.dim_b, restarts=args.restarts, iters=args.iters,
                      seed=args.seed, tol=args.tol if args.tol is not None else 1e-7)
        res = seesaw(game, args.dim_a, args.dim_b, restarts=args.restarts, iters=args.iters,
                     seed=args.seed, tol=params["tol"])
        value = res.lower_bound
        method = "seesaw"
        diag["best_restart"] = res.best_restart
        diag["iterations"] = [max(0, len(t) - 1) for t in res.traces]
        diag["aborted_restarts"] = sum(1 for t in res.traces if not t)
        if res.best is None:
            status = "Failed"
            code = EXIT_NONCONVERGED
            value = float("nan")
        elif args.save_strategy:
            Path(args.save_strategy).write_text(io.dump_strategy(res.best))
    elif args.method == "npa":
        from .npa import npa_upper_bound

        params.update(level=args.level, tol=args.tol if args.tol is not None else DEFAULT_TOL,
                      max_iter=args.max_iter)
        res = npa_upper_bound(game, args.level, tol=params["tol"], max_iter=args.max_iter)
        value = res.bound
        method = "npa"
        sol = res.solution
        status = sol.status.value
        diag.update(iterations=sol.iterations, primal_residual=sol.primal_residual,
                    dual_residual=sol.dual_residual, gap=sol.gap, moment_dim=res.moment_matrix.shape[0],
                    reduced_dim=res.reduced_dim)
        if sol.status is not Status.OPTIMAL:
            code = EXIT_NONCONVERGED
    elif args.method == "two-question":
        if not isinstance(game, MonogamyGame):
            raise UsageError("two-question needs a monogamy game")
        value = G.two_question_value(game)
        method = "two_question"
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(args.method)
    diag["wall_time"] = time.perf_counter() - t0
    _emit(ResultRecord(method, float(value), status, params, diag), args.json)
    return code


def cmd_bound(args) -> int:
    game = load_source(args.source)
    if not isinstance(game, MonogamyGame):
        raise UsageError("tfkw needs a monogamy game")
    t0 = time.perf_counter()
    value = G.tfkw_bound(game, args.n)
    rec = ResultRecord("tfkw", value, "Optimal", {"source": args.source, "n": args.n},
                       {"overlap_constant": G.overlap_constant(game), "wall_time": time.perf_counter() - t0})
    _emit(rec, args.json)
    return EXIT_OK


def cmd_export_sdp(args) -> int:
    from .npa import build_moment_problem, reduced_problem
    from .sdp import to_sdpa

    game = load_source(args.source)
    mp = build_moment_problem(game, args.level)
    if args.full:
        prob = mp.sdp
        note = "full moment matrix"
    else:
        prob, J = reduced_problem(mp)
        note = f"moment matrix restricted to {len(J)} of {mp.dim} coordinates"
    comment = (f"xnlg level-{args.level} moment SDP, {note}\n"
               f"objective: bound = {mp.c0!r} - (optimal value)")
    Path(args.out).write_text(to_sdpa(prob, comment=comment))
    print(f"wrote {args.out}: {prob.n_constraints} variables, block size {2 * prob.dim}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xnlg", description="Values and bounds for extended nonlocal games.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check a game file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("builtin", help="write a built-in monogamy game as JSON")
    s.add_argument("name", choices=sorted(BUILTINS))
    s.add_argument("--repeat", type=int, default=1, help="parallel repetition count")
    s.add_argument("--out", help="output path (default stdout)")
    s.set_defaults(func=cmd_builtin)

    s = sub.add_parser("value", help="compute a value or bound")
    s.add_argument("method", choices=["unentangled", "seesaw", "npa", "two-question"])
    s.add_argument("source", help="game JSON path or builtin:<name>")
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--dim-a", type=int, default=2)
    s.add_argument("--dim-b", type=int, default=2)
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--iters", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    s.add_argument("--save-strategy", help="write the best see-saw strategy here")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_value)

    s = sub.add_parser("bound", help="closed-form bounds")
    s.add_argument("kind", choices=["tfkw"])
    s.add_argument("source")
    s.add_argument("-n", type=int, default=1, help="number of parallel repetitions")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("export-sdp", help="write the moment SDP in SDPA sparse format")
    s.add_argument("source")
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--out", required=True)
    s.add_argument("--full", action="store_true", help="skip the kernel restriction")
    s.set_defaults(func=cmd_export_sdp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("repeat", "level", "dim_a", "dim_b", "restarts", "n"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            print(f"xnlg: error: --{name.replace('_', '-')} must be at least 1", file=sys.stderr)
            return EXIT_INVALID
    if getattr(args, "iters", 0) < 0:
        print("xnlg: error: --iters must be nonnegative", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"xnlg: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, GameError, ValueError) as exc:
        print(f"xnlg: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RuntimeError as exc:
        print(f"xnlg: solver failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
