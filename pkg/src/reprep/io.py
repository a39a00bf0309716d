"""JSON formats: tpg-1 games, tpg-rep-1 repeated games, cg-1 constraint graphs.

Rationals serialize as ``{"num": p, "den": q}`` and JSONL lines are written
with sorted keys so reruns are byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InvalidGame, InvalidSpec
from .game import Game, Strategy
from .powering import ConstraintGraph
from .repetition import RepeatedGame, RepStrategy


def to_jsonable(obj):
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, Strategy):
        return {"psi_x": list(obj.psi_x), "psi_y": list(obj.psi_y)}
    if dataclasses.is_dataclass(obj):
        return to_jsonable(dataclasses.asdict(obj))
    return obj


def from_jsonable_fraction(d) -> Fraction:
    if isinstance(d, dict) and set(d) == {"num", "den"}:
        return Fraction(d["num"], d["den"])
    return Fraction(d)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))


def fmt(x) -> str:
    """Human-readable rational: ``p/q`` or ``p``."""
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


# ---------------------------------------------------------------- games


def game_to_dict(g: Game) -> dict:
    return {
        "format": "tpg-1",
        "alphabet_size": g.alphabet_size,
        "num_x": g.num_x,
        "num_y": g.num_y,
        "edges": [list(e) for e in g.edges],
        "constraints": [sorted([a, b] for a, b in c) for c in g.constraints],
    }


def game_from_dict(d: dict) -> Game:
    if d.get("format") != "tpg-1":
        raise InvalidGame(f"expected format tpg-1, got {d.get('format')!r}")
    try:
        return Game(
            int(d["num_x"]),
            int(d["num_y"]),
            int(d["alphabet_size"]),
            tuple(tuple(e) for e in d["edges"]),
            tuple(frozenset(tuple(p) for p in c) for c in d["constraints"]),
        )
    except KeyError as err:
        raise InvalidGame(f"missing field {err.args[0]}") from None


def strategy_to_dict(s: Strategy) -> dict:
    return {"psi_x": list(s.psi_x), "psi_y": list(s.psi_y)}


def strategy_from_dict(d: dict) -> Strategy:
    return Strategy(d["psi_x"], d["psi_y"])


def rep_to_dict(H: RepeatedGame) -> dict:
    return {"format": "tpg-rep-1", "base": game_to_dict(H.base), "k": H.k, "tuples": [list(t) for t in H.tuples]}


def rep_from_dict(d: dict, base_dir: Path | None = None) -> RepeatedGame:
    if d.get("format") != "tpg-rep-1":
        raise InvalidSpec(f"expected format tpg-rep-1, got {d.get('format')!r}")
    base = d["base"]
    if isinstance(base, str):
        p = Path(base)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        base = load_json(p)
    return RepeatedGame(game_from_dict(base), int(d["k"]), tuple(tuple(t) for t in d["tuples"]))


def _vkey(v) -> str:
    return ",".join(str(c) for c in v)


def rep_strategy_to_dict(psi: RepStrategy) -> dict:
    return {
        "k": psi.k,
        "psi_x": {_vkey(v): list(a) for v, a in sorted(psi.psi_x.items())},
        "psi_y": {_vkey(v): list(a) for v, a in sorted(psi.psi_y.items())},
    }


def rep_strategy_from_dict(d: dict) -> RepStrategy:
    def parse(m):
        return {tuple(int(c) for c in k.split(",")): tuple(v) for k, v in m.items()}

    return RepStrategy(int(d["k"]), parse(d["psi_x"]), parse(d["psi_y"]))


def cg_to_dict(g: ConstraintGraph) -> dict:
    return {
        "format": "cg-1",
        "alphabet_size": g.alphabet_size,
        "vertices": g.num_vertices,
        "edges": [list(e) for e in g.edges],
        "constraints": [sorted([a, b] for a, b in c) for c in g.constraints],
    }


def cg_from_dict(d: dict) -> ConstraintGraph:
    if d.get("format") != "cg-1":
        raise InvalidSpec(f"expected format cg-1, got {d.get('format')!r}")
    return ConstraintGraph(
        int(d["vertices"]),
        int(d["alphabet_size"]),
        tuple(tuple(e) for e in d["edges"]),
        tuple(frozenset(tuple(p) for p in c) for c in d["constraints"]),
    )


# ---------------------------------------------------------------- files


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def save_json(path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(to_jsonable(obj), fh, sort_keys=True, indent=1)
        fh.write("\n")


def write_jsonl(path, records) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for r in records:
            fh.write(dumps(r) + "\n")


def read_jsonl(path) -> list[dict]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
