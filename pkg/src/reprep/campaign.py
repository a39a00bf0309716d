"""Seeded, resumable JSONL experiment campaigns.

A config is a JSON object with ``kind``, ``trials``, ``seed`` and kind-specific
parameters. The output JSONL starts with a header line carrying the config
hash, then one record per trial in trial-index order. Wall-clock time goes
only into the ``.summary.json`` side file, so the JSONL is byte-identical
across reruns.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import ConfigInvalid
from .game import Game, value_exact, value_local_search
from .io import dumps, save_json, to_jsonable
from .randgame import RandomGameParams, sample_random_game, verify_random_game
from .rng import derive_rng, derive_seed

KINDS = ("random-game", "oracle-equivalence")


def config_hash(config: dict) -> str:
    canon = json.dumps(to_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _frac(cfg, key, default):
    try:
        return Fraction(str(cfg.get(key, default)))
    except (ValueError, ZeroDivisionError):
        raise ConfigInvalid(f"{key} must be a rational like 1/2") from None


def validate(config: dict) -> dict:
    if not isinstance(config, dict):
        raise ConfigInvalid("config must be a JSON object")
    kind = config.get("kind")
    if kind not in KINDS:
        raise ConfigInvalid(f"kind must be one of {KINDS}")
    for key in ("trials", "seed"):
        if not isinstance(config.get(key), int) or config[key] < 0:
            raise ConfigInvalid(f"{key} must be a non-negative integer")
    return config


def random_game_trial(config: dict, trial: int) -> dict:
    seed = derive_seed(config["seed"], "trial", trial)
    params = RandomGameParams(
        t=int(config.get("t", 6)),
        d=int(config.get("d", 3)),
        alphabet_size=int(config.get("alphabet_size", 2)),
        beta=_frac(config, "beta", "1/2"),
        eta=_frac(config, "eta", "1/4"),
        delta=_frac(config, "delta", "1/3"),
        seed=seed,
    )
    g = sample_random_game(params)
    rep = verify_random_game(g, params, mode=config.get("mode", "exact"), seed=seed)
    return {
        "type": "trial",
        "trial": trial,
        "seed": seed,
        "regular": rep.regular_pass,
        "parallel_count": rep.regular.parallel_count,
        "mixing": rep.mixing_pass,
        "value_ok": rep.value_pass,
        "fortified": rep.fortified_pass,
        "value": rep.value,
        "worst_deviation": None if rep.mixing is None else rep.mixing.worst_deviation,
        "worst_rectangle_value": rep.fortification.worst_value,
    }


def oracle_trial(config: dict, trial: int) -> dict:
    """Random small game; local search against the exact value."""
    seed = derive_seed(config["seed"], "trial", trial)
    rng = derive_rng(seed, "oracle-game")
    n = int(rng.integers(1, int(config.get("max_side", 4)) + 1))
    q = int(rng.integers(2, int(config.get("max_alphabet", 3)) + 1))
    density = float(config.get("edge_density", 0.7))
    edges, cons = [], []
    for x in range(n):
        for y in range(n):
            if rng.random() < density or (x == 0 and y == 0):
                edges.append((x, y))
                cons.append(frozenset((a, b) for a in range(q) for b in range(q) if rng.random() < 0.5))
    g = Game(n, n, q, tuple(edges), tuple(cons))
    exact = value_exact(g).value
    local = value_local_search(g, restarts=int(config.get("restarts", 64)), seed=seed).value
    return {
        "type": "trial",
        "trial": trial,
        "seed": seed,
        "n": n,
        "q": q,
        "edges": len(edges),
        "exact": exact,
        "local": local,
        "equal": exact == local,
        "exceeds": local > exact,
    }


RUNNERS = {"random-game": random_game_trial, "oracle-equivalence": oracle_trial}


def _run_one(args):
    config, trial = args
    return RUNNERS[config["kind"]](config, trial)


def summarize(config: dict, records: list[dict]) -> dict:
    n = len(records)

    def rate(key):
        return Fraction(sum(1 for r in records if r.get(key) is True), n) if n else None

    if config["kind"] == "random-game":
        keys = ("regular", "mixing", "value_ok", "fortified")
    else:
        keys = ("equal", "exceeds")
    return {"trials": n, "rates": {k: rate(k) for k in keys}}


@dataclass(frozen=True)
class RunRecord:
    config_hash: str
    records: list
    summary: dict
    wall_clock: float
    out: str | None


def run_campaign(config: dict, out: str | Path | None = None, workers: int | None = None) -> RunRecord:
    config = validate(dict(config))
    out = out or config.get("out")
    workers = int(workers or config.get("workers", 1))
    h = config_hash({k: v for k, v in config.items() if k not in ("out", "workers")})
    header = {"type": "header", "config_hash": h, "config": {k: v for k, v in config.items() if k not in ("out", "workers")}}
    done: list[dict] = []
    start = time.perf_counter()
    fh = None
    if out is not None:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.exists():
            lines = [json.loads(s) for s in path.read_text().splitlines() if s.strip()]
            if lines and lines[0].get("config_hash") == h:
                done = [r for r in lines[1:] if r.get("type") == "trial"]
                done = [r for i, r in enumerate(done) if r.get("trial") == i]
        fh = open(path, "w")
        fh.write(dumps(header) + "\n")
        for r in done:
            fh.write(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n")
        fh.flush()
    todo = [(config, t) for t in range(len(done), config["trials"])]
    new = []
    try:
        if workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(_run_one, todo)
                for r in results:
                    new.append(r)
                    if fh:
                        fh.write(dumps(r) + "\n")
                        fh.flush()
        else:
            for item in todo:
                r = _run_one(item)
                new.append(r)
                if fh:
                    fh.write(dumps(r) + "\n")
                    fh.flush()
    finally:
        if fh:
            fh.close()
    records = done + [json.loads(dumps(r)) for r in new]
    summary = summarize(config, records)
    wall = time.perf_counter() - start
    if out is not None:
        save_json(str(out) + ".summary.json", {"config_hash": h, "summary": summary, "wall_clock_s": wall})
    return RunRecord(h, records, summary, wall, None if out is None else str(out))
