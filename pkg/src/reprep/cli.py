"""Command-line front end.

Exit status: 0 completed with a passing verdict, 1 completed with a failing
or refuting verdict, 2 usage or input error, 3 a cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import caps
from .campaign import run_campaign
from .errors import CapExceeded, ConfigInvalid, NoGoodBucket, NotRobustEnough, ReprepError
from .fixtures import FIXTURES
from .fortify import fortification_check, mixing_check
from .game import value_exact, value_local_search
from .io import (
    cg_from_dict,
    cg_to_dict,
    dumps,
    game_from_dict,
    game_to_dict,
    load_json,
    rep_from_dict,
    rep_strategy_from_dict,
    rep_to_dict,
    save_json,
    strategy_from_dict,
)
from .nogo import (
    NOT_ROBUST,
    bound_table,
    extract_rectangle,
    identity_provider,
    json_provider,
    make_embedding,
    nogo_experiment,
    planted_provider,
    trivial_strategy,
    verify_trace,
)
from .powering import (
    compose,
    encode_strategy,
    power,
    project_superlabeling,
    randomness_accounting,
    repetition_code,
    search_superlabelings,
    superlabeling_from_labeling,
)
from .randgame import RandomGameParams, concentration_experiment, rectangle_pairs, sample_random_game
from .repetition import SchemeSpec, apply_scheme, uniform_marginals_check

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")


def rational(text: str) -> Fraction:
    if not _RATIONAL.match(text.strip()):
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational p/q (decimals are not accepted)")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError("zero denominator") from None


class UsageError(Exception):
    pass


def _emit(args, payload) -> None:
    if getattr(args, "out", None):
        path = Path(args.out)
        if path.suffix == ".jsonl":
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(dumps(payload) + "\n")
        else:
            save_json(path, payload)


def _table(rows) -> None:
    rows = [(str(a), str(b)) for a, b in rows]
    w = max((len(a) for a, _ in rows), default=0)
    for a, b in rows:
        print(f"  {a.ljust(w)}  {b}")


def _load_game(args):
    if getattr(args, "fixture", None):
        return FIXTURES[args.fixture]()
    if not getattr(args, "inp", None):
        raise UsageError("--in or --fixture is required")
    return game_from_dict(load_json(args.inp))


# ---------------------------------------------------------------- subcommands


def cmd_gen_random(args) -> int:
    params = RandomGameParams(args.t, args.d, args.alphabet, args.beta, args.eta, args.delta, args.seed)
    g = sample_random_game(params)
    if args.out:
        save_json(args.out, game_to_dict(g))
    else:
        print(json.dumps(game_to_dict(g)))
    print(f"random game t={args.t} d={args.d} |Sigma|={args.alphabet} beta={args.beta} seed={args.seed}: {g.size} edges",
          file=sys.stderr)
    return 0


def cmd_value(args) -> int:
    g = _load_game(args)
    if args.local_search:
        res = value_local_search(g, args.restarts, args.seed)
    else:
        res = value_exact(g)
    print(res.value)
    _emit(args, {"value": res.value, "method": res.method, "witness": res.witness})
    return 0


def cmd_fortify(args) -> int:
    g = _load_game(args)
    rep = fortification_check(g, args.delta, args.eps, mode=args.mode, seed=args.seed, samples=args.samples)
    _table([
        ("mode", rep.mode + (" (refute-only)" if rep.refute_only else "")),
        ("val(G)", rep.base_value),
        ("threshold val+eps", rep.threshold),
        ("worst rectangle", f"S={list(rep.worst_S or [])} T={list(rep.worst_T or [])}"),
        ("worst value", rep.worst_value),
        ("rectangles checked", rep.rectangles_checked),
        ("verdict", {True: "PASS", False: "FAIL", None: "not refuted"}[rep.passed]),
    ])
    if rep.witness is not None and rep.passed is False:
        print(f"  witness strategy psi_x={list(rep.witness.psi_x)} psi_y={list(rep.witness.psi_y)}")
    _emit(args, rep)
    return 1 if rep.passed is False else 0


def cmd_mix_check(args) -> int:
    g = _load_game(args)
    rep = mixing_check(g, args.delta, args.eta, mode=args.mode, seed=args.seed, samples=args.samples)
    _table([
        ("mode", rep.mode + (" (refute-only)" if rep.refute_only else "")),
        ("d", rep.d),
        ("worst deviation", rep.worst_deviation),
        ("worst rectangle", f"S={list(rep.worst_S or [])} T={list(rep.worst_T or [])}"),
        ("verdict", {True: "PASS", False: "FAIL", None: "not refuted"}[rep.passed]),
    ])
    _emit(args, rep)
    return 1 if rep.passed is False else 0


def _scheme(args) -> SchemeSpec:
    return SchemeSpec(args.scheme, z=args.z, seed=args.seed, identity_copies=args.identity_copies)


def cmd_repeat(args) -> int:
    g = _load_game(args)
    H = apply_scheme(g, _scheme(args), args.k)
    print(f"k={H.k} |H|={len(H)}")
    if args.out:
        save_json(args.out, rep_to_dict(H))
    return 0


def cmd_marginals(args) -> int:
    H = rep_from_dict(load_json(args.inp), Path(args.inp).parent)
    rep = uniform_marginals_check(H)
    _table([("z", rep.z), ("verdict", "PASS" if rep.passed else "FAIL"), ("offending (j, e, count)", list(rep.offending[:10]))])
    _emit(args, rep)
    return 0 if rep.passed else 1


def cmd_compose(args) -> int:
    g = _load_game(args)
    comp = compose(g, repetition_code(g.alphabet_size, args.reps))
    d = cg_to_dict(comp.graph)
    d["composition"] = {"gprime": game_to_dict(g), "reps": args.reps}
    _table([
        ("vertices", comp.graph.num_vertices),
        ("edges", comp.graph.size),
        ("gadget sizes", [len(gd.vertices) for gd in comp.gadgets]),
    ])
    if args.out:
        save_json(args.out, d)
    return 0


def _composition_from(d: dict):
    comp = d.get("composition")
    if comp is None:
        return None
    g = game_from_dict(comp["gprime"])
    return compose(g, repetition_code(g.alphabet_size, int(comp["reps"])))


def cmd_power(args) -> int:
    d = load_json(args.inp)
    graph = cg_from_dict(d)
    pw = power(graph, args.t)
    sizes = [len(c) for c in pw.clouds]
    _table([
        ("vertices", graph.num_vertices),
        ("t", args.t),
        ("cloud size min/max", f"{min(sizes)}/{max(sizes)}"),
        ("walks", pw.walk_count),
    ])
    comp = _composition_from(d)
    if comp is not None:
        acc = randomness_accounting(comp.gprime, comp, pw)
        _table([
            ("bits G'", f"{acc.bits_gprime:.3f}"),
            ("bits composed", f"{acc.bits_composed:.3f}"),
            ("bits powered", f"{acc.bits_powered:.3f}"),
            ("bits repetition", "n/a" if acc.bits_repetition is None else f"{acc.bits_repetition:.3f}"),
        ])
    if args.out:
        out = {"format": "powered-1", "base": d, "t": args.t}
        save_json(args.out, out)
    return 0


def cmd_project(args) -> int:
    g = _load_game(args)
    comp = compose(g, repetition_code(g.alphabet_size, args.reps))
    pw = power(comp.graph, 2)
    if args.strategy:
        labels = encode_strategy(comp, strategy_from_dict(load_json(args.strategy)))
    elif args.labels:
        labels = load_json(args.labels)
    else:
        labels = encode_strategy(comp, value_exact(g).witness)
    L = superlabeling_from_labeling(pw, labels)
    rep = project_superlabeling(pw, L, comp)
    rows = [
        ("decoded psi_x", list(rep.strategy.psi_x)),
        ("decoded psi_y", list(rep.strategy.psi_y)),
        ("gadget-satisfied fraction", rep.gadget_fraction),
        ("decoded strategy value", rep.decoded_value),
        ("fraction <= value", rep.inequality_holds),
    ]
    ok = rep.inequality_holds
    payload = {"projection": rep}
    if args.search:
        sr = search_superlabelings(comp, pw, args.search, seed=args.seed)
        rows += [("search candidates", sr.candidates), ("best fraction", sr.best_fraction), ("val(G')", sr.value_gprime)]
        ok = ok and sr.passed
        payload["search"] = sr
    _table(rows)
    _emit(args, payload)
    return 0 if ok else 1


def _provider(args):
    if args.emb == "identity":
        return identity_provider(args.i)
    if args.emb == "planted":
        rows = tuple(int(v) for v in args.rows.split(","))
        cols = tuple(int(v) for v in args.cols.split(","))
        return planted_provider(rows, cols, args.i)
    return json_provider(args.emb)


def cmd_nogo_extract(args) -> int:
    g = _load_game(args)
    H = rep_from_dict(load_json(args.rep), Path(args.rep).parent)
    psi = rep_strategy_from_dict(load_json(args.strategy)) if args.strategy else trivial_strategy(g, H, args.s)
    d = load_json(args.emb)
    emb = make_embedding(d["fX"], d["fY"], int(d["i"]), H)
    trace = extract_rectangle(g, H, psi, args.s, emb, args.eps)
    chk = verify_trace(trace)
    _table([
        ("bucket (i, j)", trace.bucket),
        ("labels", trace.labels),
        ("M_s", list(trace.M_s)),
        ("N_s", list(trace.N_s)),
        ("satisfied fraction", trace.satisfied_fraction),
        ("certificates re-verify", chk.passed),
        ("anomalies", list(trace.anomalies) or "none"),
    ])
    _emit(args, trace)
    return 0 if chk.passed else 1


def cmd_nogo_experiment(args) -> int:
    g = _load_game(args)
    gamma = args.gamma if args.gamma is not None else value_exact(g).value
    v = nogo_experiment(g, _scheme(args), args.k, args.s, gamma, args.eps, _provider(args))
    rows = [("branch", v.branch), ("val(G)", v.value), ("z", v.z), ("delta*", v.delta)]
    if v.robustness_fraction is not None:
        rows.append(("robustness fraction", v.robustness_fraction))
    if v.rectangle:
        rows += [("rectangle", f"S={v.rectangle['S']} T={v.rectangle['T']}"), ("rectangle fraction", v.rectangle["fraction"])]
    for r in v.reasons:
        rows.append(("reason", r))
    for a in v.anomalies:
        rows.append(("anomaly", a))
    _table(rows)
    _emit(args, v)
    return 0 if v.branch == NOT_ROBUST else 1


def cmd_bounds(args) -> int:
    b = bound_table(args.z, args.eps)
    print(f"z={b.z} eps={b.eps}" + (" (log clamp engaged)" if b.clamped else ""))
    _table(b.rows() + [("chain holds", b.chain_holds)])
    _emit(args, b)
    return 0 if b.chain_holds else 1


def cmd_concentration(args) -> int:
    Z = rectangle_pairs(range(args.rows), range(args.cols))
    rep = concentration_experiment(args.t, args.d, Z, args.rho, args.trials, args.seed)
    _table([
        ("mu", rep.mu),
        ("violations", f"{rep.violations}/{rep.trials}"),
        ("empirical rate", rep.empirical_violation_rate),
        ("degenerate", rep.degenerate),
    ])
    _emit(args, rep)
    return 0


def cmd_campaign(args) -> int:
    try:
        config = load_json(args.config)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigInvalid(str(err)) from None
    rec = run_campaign(config, out=args.out, workers=args.workers)
    print(f"config {rec.config_hash[:12]}  trials={rec.summary['trials']}")
    _table([(k, v) for k, v in rec.summary["rates"].items()])
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reprep", description=__doc__.splitlines()[0])
    for name in caps.names():
        p.add_argument(f"--cap-{name}", type=int, default=None, metavar="N")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, game=True):
        sp = sub.add_parser(name)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out")
        sp.add_argument("--seed", type=int, default=0)
        if game:
            sp.add_argument("--in", dest="inp")
            sp.add_argument("--fixture", choices=sorted(FIXTURES))
        return sp

    sp = add("gen-random", cmd_gen_random, game=False)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--alphabet", "--q", type=int, default=2)
    sp.add_argument("--beta", type=rational, default=Fraction(1, 2))
    sp.add_argument("--eta", type=rational, default=Fraction(1, 4))
    sp.add_argument("--delta", type=rational, default=Fraction(1, 3))

    sp = add("value", cmd_value)
    sp.add_argument("--local-search", action="store_true")
    sp.add_argument("--restarts", type=int, default=16)

    sp = add("fortify", cmd_fortify)
    sp.add_argument("--delta", type=rational, required=True)
    sp.add_argument("--eps", type=rational, required=True)
    sp.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    sp.add_argument("--samples", type=int, default=500)

    sp = add("mix-check", cmd_mix_check)
    sp.add_argument("--delta", type=rational, required=True)
    sp.add_argument("--eta", "--eps", dest="eta", type=rational, required=True)
    sp.add_argument("--mode", choices=["auto", "exhaustive", "sampled"], default="auto")
    sp.add_argument("--samples", type=int, default=2000)

    def scheme_args(sp):
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--scheme", choices=["full-product", "permutation-union"], default="full-product")
        sp.add_argument("--z", type=int, default=1)
        sp.add_argument("--identity-copies", type=int, default=0)

    sp = add("repeat", cmd_repeat)
    scheme_args(sp)

    sp = add("marginals", cmd_marginals, game=False)
    sp.add_argument("--in", dest="inp", required=True)

    sp = add("compose", cmd_compose)
    sp.add_argument("--reps", type=int, default=2, help="repetition-code factor (code length for |Sigma|=2)")

    sp = add("power", cmd_power, game=False)
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--t", type=int, default=2)

    sp = add("project", cmd_project)
    sp.add_argument("--reps", type=int, default=2)
    sp.add_argument("--strategy", help="G' strategy JSON to encode")
    sp.add_argument("--labels", help="JSON list: one Sigma0 label per composed vertex")
    sp.add_argument("--search", type=int, default=0, help="also search this many super-labelings")

    sp = add("nogo-extract", cmd_nogo_extract)
    sp.add_argument("--rep", required=True, help="tpg-rep-1 file")
    sp.add_argument("--emb", required=True, help='JSON {"fX": ..., "fY": ..., "i": i}')
    sp.add_argument("--strategy", help="repeated strategy JSON (default: trivial strategy at s)")
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--eps", type=rational, required=True)

    sp = add("nogo-experiment", cmd_nogo_experiment)
    scheme_args(sp)
    sp.add_argument("--s", type=int, default=1)
    sp.add_argument("--i", type=int, default=2)
    sp.add_argument("--gamma", type=rational, default=None)
    sp.add_argument("--eps", type=rational, required=True)
    sp.add_argument("--emb", default="identity", help="identity | planted | path to JSON")
    sp.add_argument("--rows", default="0,1")
    sp.add_argument("--cols", default="0,1")

    sp = add("bounds", cmd_bounds, game=False)
    sp.add_argument("--z", type=rational, required=True)
    sp.add_argument("--eps", type=rational, required=True)

    sp = add("concentration", cmd_concentration, game=False)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--rows", type=int, required=True, help="Z is the top-left rows x cols block")
    sp.add_argument("--cols", type=int, required=True)
    sp.add_argument("--rho", type=rational, required=True)
    sp.add_argument("--trials", type=int, default=1000)

    sp = add("campaign", cmd_campaign, game=False)
    sp.add_argument("--config", required=True)
    sp.add_argument("--workers", type=int, default=None)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    caps.reset_caps()
    for name in caps.names():
        v = getattr(args, f"cap_{name}")
        if v is not None:
            caps.set_cap(name, v)
    try:
        return args.fn(args)
    except CapExceeded as err:
        print(f"error[{err.code}]: {err}", file=sys.stderr)
        return 3
    except (NotRobustEnough, NoGoodBucket) as err:
        print(f"refuted[{err.code}]: {err}", file=sys.stderr)
        return 1
    except ReprepError as err:
        print(f"error[{err.code}]: {err}", file=sys.stderr)
        return 2
    except UsageError as err:
        print(f"usage: {err}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as err:
        print(f"error[io]: {err}", file=sys.stderr)
        return 2
    finally:
        caps.reset_caps()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
