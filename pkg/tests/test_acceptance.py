"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Every criterion is a function of the master seed that returns
``(passed, detail, records)``; the records go to a JSONL file so the
determinism criterion can rerun everything and compare bytes.
"""

import time
from fractions import Fraction
from pathlib import Path

import pytest

from reprep.campaign import run_campaign
from reprep.fixtures import all_full, chsh, plant8
from reprep.fortify import delta_star, fortification_check, theorem_hypotheses
from reprep.game import Game, Strategy, rect_subgame, value_exact
from reprep.io import dumps
from reprep.nogo import (
    FORTIFICATION_VIOLATED,
    NOT_ROBUST,
    bound_table,
    extract_rectangle,
    identity_provider,
    make_embedding,
    nogo_experiment,
    planted_provider,
    trivial_strategy,
    verify_trace,
)
from reprep.powering import (
    compose,
    encode_strategy,
    power,
    project_superlabeling,
    repetition_code,
    search_superlabelings,
    superlabeling_from_labeling,
)
from reprep.randgame import (
    RandomGameParams,
    concentration_experiment,
    rectangle_pairs,
    sample_random_game,
    verify_random_game,
)
from reprep.repetition import (
    RepeatedGame,
    SchemeSpec,
    full_power,
    permutation_union,
    uniform_marginals_check,
)
from reprep.rng import derive_rng, derive_seed

MASTER_SEED = 20260101


def small_game(rng, max_side, max_q, max_edges, multi=False):
    nx = int(rng.integers(1, max_side + 1))
    ny = int(rng.integers(1, max_side + 1))
    q = int(rng.integers(2, max_q + 1))
    pairs = [(x, y) for x in range(nx) for y in range(ny)]
    m = int(rng.integers(1, min(max_edges, len(pairs) if not multi else max_edges) + 1))
    if multi:
        edges = [pairs[int(rng.integers(0, len(pairs)))] for _ in range(m)]
    else:
        edges = [pairs[i] for i in sorted(rng.choice(len(pairs), size=m, replace=False))]
    cons = [frozenset((a, b) for a in range(q) for b in range(q) if rng.random() < 0.5) for _ in edges]
    return Game(nx, ny, q, tuple(edges), tuple(cons))


# ---------------------------------------------------------------- criteria


def criterion_1(seed, out_dir):
    cfg = {"kind": "oracle-equivalence", "trials": 50, "seed": derive_seed(seed, "c1"),
           "max_side": 4, "max_alphabet": 3, "restarts": 64}
    rec = run_campaign(cfg, out=out_dir / "c1_campaign.jsonl")
    equal = sum(r["equal"] for r in rec.records)
    exceeds = sum(r["exceeds"] for r in rec.records)
    ok = equal >= 45 and exceeds == 0 and len(rec.records) == 50
    return ok, f"local==exact in {equal}/50, exceeds in {exceeds}", rec.records


def criterion_2(seed, out_dir):
    rng = derive_rng(seed, "c2")
    records = []
    ok = True
    cases = []
    for m in range(2, 9):
        for k in (1, 2, 3):
            cases.append(("full-product", m, k, None))
    for z in (1, 2, 3, 4):
        for m in (2, 5, 8):
            cases.append(("permutation-union", m, 3, z))
    for scheme, m, k, z in cases:
        g = Game(1, 1, 2, ((0, 0),) * m, (frozenset(),) * m)
        H = full_power(g, k) if scheme == "full-product" else permutation_union(g, k, z, int(rng.integers(0, 2**31)))
        rep = uniform_marginals_check(H)
        expect = Fraction(len(H), m)
        exact = rep.passed and all(c == expect for row in rep.counts for c in row)
        broken = 0
        for t in range(len(H)):
            tup = list(H.tuples[t])
            j = t % k
            tup[j] = (tup[j] + 1) % m
            mutated = RepeatedGame(g, k, H.tuples[:t] + (tuple(tup),) + H.tuples[t + 1:])
            broken += not uniform_marginals_check(mutated).passed
        case_ok = exact and broken == len(H)
        ok &= case_ok
        records.append({"scheme": scheme, "m": m, "k": k, "z": rep.z, "tuples": len(H),
                        "exact": exact, "mutations_failing": broken, "ok": case_ok})
    return ok, f"{len(cases)} schemes exact; every single-tuple mutation fails", records


def criterion_3(seed, out_dir):
    delta, eps = Fraction(1, 2), Fraction(1, 10)
    records = []
    ok = True
    fails = 0
    for trial in range(100):
        g = small_game(derive_rng(seed, "c3", trial), 4, 2, 10, multi=True)
        rep = fortification_check(g, delta, eps)
        rec = {"trial": trial, "passed": rep.passed, "worst": rep.worst_value}
        if rep.passed is False:
            fails += 1
            sub = rect_subgame(g, rep.worst_S, rep.worst_T)
            again = value_exact(sub).value
            rec["recheck"] = again
            ok &= again == rep.worst_value
        records.append(rec)
    c = fortification_check(chsh(), delta, eps)
    chsh_ok = (c.passed is False and c.worst_S == (0,) and c.worst_T == (0,)
               and c.worst_value == 1 and c.base_value == Fraction(3, 4))
    records.append({"chsh": True, "S": c.worst_S, "T": c.worst_T, "value": c.worst_value, "base": c.base_value})
    ok &= chsh_ok and fails > 0
    return ok, f"{fails} FAIL witnesses re-verified; CHSH S={{0}},T={{0}} value 1 vs 3/4", records


def criterion_4(seed, out_dir):
    b = bound_table(4, Fraction(1, 100))
    raw = b.unreduced()
    hyp = theorem_hypotheses(all_full(), 4, Fraction(1, 100), include_fortification=False)
    ok = (
        b.class_fraction == Fraction(94, 12800)
        and raw["class_fraction"] == "94/12800"
        and b.satisfied_bound == Fraction(9108, 10100)
        and raw["satisfied_bound"] == "9108/10100"
        and b.satisfied_bound > Fraction(89, 100)
        and b.chain_holds
        and hyp.delta == Fraction(1, 256)
        and delta_star(4) == (Fraction(1, 256), True)
    )
    records = [{"bounds": b.to_dict(), "unreduced": raw, "delta_star": hyp.delta}]
    return ok, f"|M| {raw['class_fraction']}, fraction {raw['satisfied_bound']} > 89/100, delta* {hyp.delta}", records


def criterion_5(seed, out_dir):
    eps = Fraction(1, 100)
    a = nogo_experiment(plant8(), SchemeSpec("full-product"), 2, 1, Fraction(1, 2), eps,
                        planted_provider((0, 1), (0, 1), 2))
    a_ok = (a.branch == FORTIFICATION_VIOLATED and a.rectangle["fraction"] == 1
            and len(a.trace.M_s) >= 2)
    params = RandomGameParams(6, 3, 2, Fraction(1, 2), eta=Fraction(1, 4), delta=Fraction(2, 3), seed=286)
    g = sample_random_game(params)
    hyp = verify_random_game(g, params)
    val = value_exact(g).value
    b = nogo_experiment(g, SchemeSpec("permutation-union", z=2, seed=0, identity_copies=1), 2, 1, val, eps,
                        identity_provider(2), hypotheses=hyp)
    b_ok = hyp.passed and b.branch == NOT_ROBUST and b.robustness_fraction == val
    records = [
        {"case": "plant8", "branch": a.branch, "fraction": a.rectangle["fraction"], "M_s": list(a.trace.M_s)},
        {"case": "random-286", "hypotheses_passed": hyp.passed, "branch": b.branch,
         "robustness_fraction": b.robustness_fraction, "value": val},
    ]
    detail = (f"PLANT-8 {a.branch} fraction {a.rectangle['fraction']} |M_s|={len(a.trace.M_s)}; "
              f"random game {b.branch} fraction {b.robustness_fraction} = val {val}")
    return a_ok and b_ok, detail, records


def extraction_corpus():
    eps = Fraction(1, 100)
    runs = []
    G = plant8()
    H = full_power(G, 2)
    for s in (1, 2):
        psi = trivial_strategy(G, H, s)
        emb = planted_provider((0, 1), (0, 1), 3 - s)(G, H, psi, frozenset({s}))
        runs.append(("plant8", s, G, H, psi, emb))
    for n in (2, 3, 4):
        G = all_full(n, n)
        for k in (2, 3):
            H = full_power(G, k)
            psi = trivial_strategy(G, H, 1)
            emb = make_embedding([(x,) * k for x in range(n)], [(y,) * k for y in range(n)], 2, H)
            runs.append((f"all-full-{n}-k{k}", 1, G, H, psi, emb))
    G = all_full(3, 3)
    H = permutation_union(G, 2, 3, seed=5, identity_copies=1)
    psi = trivial_strategy(G, H, 1)
    emb = make_embedding([(x, x) for x in range(3)], [(y, y) for y in range(3)], 2, H)
    runs.append(("all-full-perm-union", 1, G, H, psi, emb))
    for name, s, G, H, psi, emb in runs:
        yield name, G, extract_rectangle(G, H, psi, s, emb, eps)


def criterion_6(seed, out_dir):
    ok = True
    records = []
    for name, G, tr in extraction_corpus():
        chk = verify_trace(tr)
        pruned = len(tr.win_pruned) >= (1 - 3 * tr.eps) * G.size
        one_to_one = len(tr.M_s) == len(tr.M) and len(tr.N_s) == len(tr.N)
        run_ok = pruned and chk.bucket_close and chk.label_close and one_to_one and chk.passed
        ok &= run_ok
        records.append({"run": name, "W_pruned": len(tr.win_pruned), "E": G.size, "bucket": tr.bucket,
                        "labels": tr.labels, "M": len(tr.M), "M_s": len(tr.M_s), "ok": run_ok})
    return ok, f"{len(records)} extraction runs: bounds and certificates re-verify", records


def micro_game(rng):
    """A G' with at most 3 edges and value strictly below 1, so the bound has teeth."""
    while True:
        g = small_game(rng, 2, 2, 3)
        if value_exact(g).value < 1:
            return g


def criterion_7(seed, out_dir):
    ok = True
    records = []
    for p in range(10):
        gp = micro_game(derive_rng(seed, "c7", p))
        vprime = value_exact(gp).value
        comp = compose(gp, repetition_code(2, 2))
        pw = power(comp.graph, 2)
        sr = search_superlabelings(comp, pw, candidates=10_000, seed=derive_seed(seed, "c7-search", p),
                                   exact_value=vprime)
        complete = True
        for px in range(2 ** gp.num_x):
            for py in range(2 ** gp.num_y):
                s = Strategy([(px >> i) & 1 for i in range(gp.num_x)], [(py >> i) & 1 for i in range(gp.num_y)])
                L = superlabeling_from_labeling(pw, encode_strategy(comp, s))
                rep = project_superlabeling(pw, L, comp)
                won = [(s.psi_x[x], s.psi_y[y]) in c for (x, y), c in zip(gp.edges, gp.constraints)]
                complete &= rep.strategy == s and all(a == b for a, b in zip(rep.gadget_satisfied, won))
        p_ok = sr.passed and sr.best_fraction <= vprime and complete
        ok &= p_ok
        records.append({"pipeline": p, "edges": gp.size, "value": vprime, "vertices": comp.graph.num_vertices,
                        "walks": pw.walk_count, "search": sr.to_dict(), "complete": complete})
    best = max(r["search"]["best_fraction"] - r["value"] for r in records)
    return ok, f"10 pipelines x 10^4 candidates: max(best - val(G')) = {best}; round trips complete", records


def criterion_8(seed, out_dir):
    s = derive_seed(seed, "c8")
    q = concentration_experiment(16, 4, rectangle_pairs(range(8), range(8)), Fraction(1, 2), 1000, s)
    full = concentration_experiment(16, 4, rectangle_pairs(range(16), range(16)), Fraction(1, 2), 1000, s)
    ok = q.mu == Fraction(1, 4) and q.empirical_violation_rate <= Fraction(5, 100) and full.mu == 1 and full.violations == 0
    records = [q.to_dict(), full.to_dict()]
    return ok, f"mu=1/4 rate {q.empirical_violation_rate}; mu=1 violations {full.violations}", records


CRITERIA = {
    1: (criterion_1, 60),
    2: (criterion_2, 10),
    3: (criterion_3, 60),
    4: (criterion_4, None),
    5: (criterion_5, 120),
    6: (criterion_6, None),
    7: (criterion_7, 300),
    8: (criterion_8, 60),
}


def execute(n, out_dir):
    fn, _ = CRITERIA[n]
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    ok, detail, records = fn(MASTER_SEED, out_dir)
    elapsed = time.perf_counter() - start
    path = out_dir / f"criterion_{n}.jsonl"
    path.write_text("".join(dumps(r) + "\n" for r in records))
    return ok, detail, elapsed


@pytest.fixture(scope="module")
def first_run(tmp_path_factory):
    return {"dir": tmp_path_factory.mktemp("acceptance-a"), "done": set()}


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, first_run, capsys):
    ok, detail, elapsed = execute(n, first_run["dir"])
    first_run["done"].add(n)
    limit = CRITERIA[n][1]
    in_time = limit is None or elapsed < limit
    timing = f"({elapsed:.1f}s" + (f" < {limit}s)" if limit else ")")
    report(capsys, n, ok and in_time, f"{detail} {timing}")
    assert ok, detail
    assert in_time, f"took {elapsed:.1f}s, limit {limit}s"


def test_criterion_9_determinism(first_run, tmp_path_factory, capsys):
    a = first_run["dir"]
    for n in sorted(CRITERIA):
        if n not in first_run["done"]:
            execute(n, a)
    b = tmp_path_factory.mktemp("acceptance-b")
    for n in sorted(CRITERIA):
        execute(n, b)
    files = sorted(p.name for p in a.glob("*.jsonl"))
    same = [name for name in files if (a / name).read_bytes() == (b / name).read_bytes()]
    ok = len(files) == len(CRITERIA) + 1 and same == files
    report(capsys, 9, ok, f"{len(same)}/{len(files)} JSONL outputs byte-identical on rerun")
    assert ok, sorted(set(files) - set(same))
