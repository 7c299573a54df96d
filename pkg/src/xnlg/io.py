"""JSON files for games and strategies.

Games use schema ``"1"``:

* extended: ``{"schema", "type": "extended", "m", "nx", "ny", "na", "nb",
  "pi": [{"x", "y", "p"}], "V": [{"x", "y", "a", "b", "re", "im"}]}``;
  omitted ``pi`` or ``V`` entries are zero.
* monogamy: ``{"schema", "type": "monogamy", "m", "nx", "na", "pi": [p],
  "R": [{"x", "a", "re", "im"}]}``.

Matrices are row-major nested lists.  Numbers are written with 17
significant digits so that doubles survive a round trip exactly, and the
writer's layout is fixed, so ``dumps(loads(text)) == text`` for any text the
writer produced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .games import ExtendedNonlocalGame, GameError, MonogamyGame, Violation, validate
from .strategies import Strategy, StrategyError

SCHEMA = "1"

__all__ = [
    "SCHEMA",
    "FormatError",
    "GameFile",
    "dumps",
    "loads",
    "load",
    "save",
    "dump_strategy",
    "load_strategy",
]


class FormatError(GameError):
    """Unparseable file, or a structurally valid file whose game fails validation."""

    def __init__(self, message: str, violations: list[Violation] | None = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True, eq=False)
class GameFile:
    game: ExtendedNonlocalGame | MonogamyGame
    path: str | None
    schema: str


# ---------------------------------------------------------------------------
# writing


def _num(v: float) -> str:
    v = float(v)
    if not np.isfinite(v):
        raise FormatError(f"cannot serialise non-finite number {v}")
    if v == 0:
        return "0"
    return format(v, ".17g")


def _matrix(M: np.ndarray) -> str:
    return "[" + ",".join("[" + ",".join(_num(v) for v in row) + "]" for row in M) + "]"


def _obj(pairs: list[tuple[str, str]]) -> str:
    return "{" + ",".join(f'"{k}":{v}' for k, v in pairs) + "}"


def _doc(header: list[tuple[str, str]], arrays: list[tuple[str, list[str]]]) -> str:
    lines = ["{"]
    items = [f'  "{k}": {v}' for k, v in header]
    for name, rows in arrays:
        if rows:
            items.append(f'  "{name}": [\n' + ",\n".join("    " + r for r in rows) + "\n  ]")
        else:
            items.append(f'  "{name}": []')
    lines.append(",\n".join(items))
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps(game) -> str:
    """Canonical JSON text for an extended or monogamy game."""
    if isinstance(game, ExtendedNonlocalGame):
        m, nx, ny, na, nb = game.shape()
        pis = [_obj([("x", str(x)), ("y", str(y)), ("p", _num(game.pi[x, y]))])
               for x in range(nx) for y in range(ny) if game.pi[x, y] != 0]
        Vs = []
        for x in range(nx):
            for y in range(ny):
                for a in range(na):
                    for b in range(nb):
                        M = game.V[x, y, a, b]
                        if not np.any(M):
                            continue
                        Vs.append(_obj([("x", str(x)), ("y", str(y)), ("a", str(a)), ("b", str(b)),
                                        ("re", _matrix(M.real)), ("im", _matrix(M.imag))]))
        header = [("schema", f'"{SCHEMA}"'), ("type", '"extended"'), ("m", str(m)),
                  ("nx", str(nx)), ("ny", str(ny)), ("na", str(na)), ("nb", str(nb))]
        return _doc(header, [("pi", pis), ("V", Vs)])
    if isinstance(game, MonogamyGame):
        Rs = [_obj([("x", str(x)), ("a", str(a)), ("re", _matrix(game.R[x, a].real)),
                    ("im", _matrix(game.R[x, a].imag))])
              for x in range(game.nx) for a in range(game.na)]
        header = [("schema", f'"{SCHEMA}"'), ("type", '"monogamy"'), ("m", str(game.m)),
                  ("nx", str(game.nx)), ("na", str(game.na)),
                  ("pi", "[" + ",".join(_num(p) for p in game.pi) + "]")]
        return _doc(header, [("R", Rs)])
    raise TypeError(f"not a game: {type(game).__name__}")


def save(game, path) -> None:
    Path(path).write_text(dumps(game))


# ---------------------------------------------------------------------------
# reading


def _parse(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be a JSON object")
    return doc


def _int(doc: dict, key: str, where: str = "", minimum: int = 1) -> int:
    if key not in doc:
        raise FormatError(f"{where}missing field {key!r}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(f"{where}field {key!r} must be an integer")
    if v < minimum:
        raise FormatError(f"{where}field {key!r} must be at least {minimum}")
    return v


def _index(entry: dict, key: str, bound: int, where: str) -> int:
    v = _int(entry, key, where, minimum=0)
    if v >= bound:
        raise FormatError(f"{where}field {key!r}={v} out of range (< {bound})")
    return v


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise FormatError(f"{where}expected a number")
    return float(v)


def _read_matrix(entry: dict, m: int, where: str) -> np.ndarray:
    out = np.zeros((m, m), dtype=complex)
    for part, scale in (("re", 1.0), ("im", 1j)):
        if part not in entry:
            raise FormatError(f"{where}missing field {part!r}")
        M = entry[part]
        if not isinstance(M, list) or len(M) != m or any(not isinstance(r, list) or len(r) != m for r in M):
            raise FormatError(f"{where}field {part!r} must be a {m}x{m} nested list")
        out += scale * np.array([[_number(v, f"{where}{part}: ") for v in row] for row in M])
    return out


def _entries(doc: dict, key: str) -> list:
    if key not in doc:
        raise FormatError(f"missing field {key!r}")
    v = doc[key]
    if not isinstance(v, list):
        raise FormatError(f"field {key!r} must be an array")
    for n, e in enumerate(v):
        if not isinstance(e, dict):
            raise FormatError(f"{key}[{n}]: expected an object")
    return v


def _from_doc(doc: dict):
    schema = doc.get("schema")
    if schema != SCHEMA:
        raise FormatError(f"unsupported schema {schema!r} (expected {SCHEMA!r})")
    kind = doc.get("type")
    m = _int(doc, "m")
    if kind == "extended":
        nx, ny, na, nb = (_int(doc, k) for k in ("nx", "ny", "na", "nb"))
        pi = np.zeros((nx, ny))
        for n, e in enumerate(_entries(doc, "pi")):
            w = f"pi[{n}]: "
            x, y = _index(e, "x", nx, w), _index(e, "y", ny, w)
            if "p" not in e:
                raise FormatError(f"{w}missing field 'p'")
            pi[x, y] = _number(e["p"], w)
        V = np.zeros((nx, ny, na, nb, m, m), dtype=complex)
        for n, e in enumerate(_entries(doc, "V")):
            w = f"V[{n}]: "
            x, y = _index(e, "x", nx, w), _index(e, "y", ny, w)
            a, b = _index(e, "a", na, w), _index(e, "b", nb, w)
            V[x, y, a, b] = _read_matrix(e, m, w)
        return ExtendedNonlocalGame(pi, V)
    if kind == "monogamy":
        nx, na = _int(doc, "nx"), _int(doc, "na")
        raw = doc.get("pi")
        if not isinstance(raw, list) or len(raw) != nx:
            raise FormatError(f"field 'pi' must be an array of {nx} numbers")
        pi = np.array([_number(p, "pi: ") for p in raw])
        R = np.zeros((nx, na, m, m), dtype=complex)
        for n, e in enumerate(_entries(doc, "R")):
            w = f"R[{n}]: "
            x, a = _index(e, "x", nx, w), _index(e, "a", na, w)
            R[x, a] = _read_matrix(e, m, w)
        return MonogamyGame(pi, R)
    raise FormatError(f"unknown game type {kind!r}")


def loads(text: str, check: bool = True):
    """Parse game JSON; with ``check`` the game must also pass validation."""
    game = _from_doc(_parse(text))
    if check:
        v = validate(game)
        if v:
            raise FormatError("game fails validation: " + "; ".join(str(e) for e in v), v)
    return game


def load(path, check: bool = True) -> GameFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    return GameFile(loads(text, check=check), str(path), SCHEMA)


# ---------------------------------------------------------------------------
# strategies


def _ops(P: np.ndarray, qkey: str, akey: str) -> list[str]:
    return [_obj([(qkey, str(q)), (akey, str(a)), ("re", _matrix(P[q, a].real)), ("im", _matrix(P[q, a].imag))])
            for q in range(P.shape[0]) for a in range(P.shape[1])]


def dump_strategy(s: Strategy) -> str:
    header = [("schema", f'"{SCHEMA}"'), ("type", '"strategy"'), ("m", str(s.m)),
              ("dA", str(s.dA)), ("dB", str(s.dB)),
              ("nx", str(s.alice.shape[0])), ("na", str(s.alice.shape[1])),
              ("ny", str(s.bob.shape[0])), ("nb", str(s.bob.shape[1])),
              ("rho", _obj([("re", _matrix(s.rho.real)), ("im", _matrix(s.rho.imag))]))]
    return _doc(header, [("alice", _ops(s.alice, "x", "a")), ("bob", _ops(s.bob, "y", "b"))])


def load_strategy(text: str) -> Strategy:
    doc = _parse(text)
    if doc.get("schema") != SCHEMA or doc.get("type") != "strategy":
        raise FormatError("not a strategy file of schema '1'")
    m, dA, dB = _int(doc, "m"), _int(doc, "dA"), _int(doc, "dB")
    nx, na, ny, nb = (_int(doc, k) for k in ("nx", "na", "ny", "nb"))
    if not isinstance(doc.get("rho"), dict):
        raise FormatError("missing object field 'rho'")
    rho = _read_matrix(doc["rho"], m * dA * dB, "rho: ")
    tables = {}
    for key, qk, ak, nq, nans, d in (("alice", "x", "a", nx, na, dA), ("bob", "y", "b", ny, nb, dB)):
        P = np.zeros((nq, nans, d, d), dtype=complex)
        for n, e in enumerate(_entries(doc, key)):
            w = f"{key}[{n}]: "
            P[_index(e, qk, nq, w), _index(e, ak, nans, w)] = _read_matrix(e, d, w)
        tables[key] = P
    try:
        return Strategy(rho, tables["alice"], tables["bob"], m)
    except StrategyError as exc:
        raise FormatError(f"invalid strategy: {exc}") from None
