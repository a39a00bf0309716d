"""Robust embeddings and the rectangle-extraction dichotomy.

Given a base game G, a repeated game H with uniform marginals, a repeated
strategy psi and an embedding of G into H, either the embedding is not
robust (few base edges land in the round-s winning set) or the extraction
pipeline below produces a rectangle of G that is nearly satisfied, which a
fortified G cannot have.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    CoordinateEmbeddingViolated,
    ImageNotInH,
    InvalidEmbedding,
    InvalidSpec,
    NoGoodBucket,
    NotRobustEnough,
)
from .fortify import (
    HypothesisReport,
    check_eps,
    log2_squared,
    parallel_count,
    recheck_rectangle,
    theorem_hypotheses,
)
from .game import Game, Strategy, rect_subgame, strategy_value, value_exact
from .repetition import (
    RepeatedGame,
    RepStrategy,
    SchemeSpec,
    apply_scheme,
    blowup,
    uniform_marginals_check,
    winning_set,
)

Vertex = tuple[int, ...]


# ---------------------------------------------------------------- embeddings


@dataclass(frozen=True)
class EmbeddingMap:
    fX: tuple[Vertex, ...]
    fY: tuple[Vertex, ...]
    i: int  # 1-based coordinate

    def image(self, x: int, y: int) -> tuple[Vertex, Vertex]:
        return self.fX[x], self.fY[y]

    def to_dict(self) -> dict:
        return {"fX": [list(v) for v in self.fX], "fY": [list(v) for v in self.fY], "i": self.i}


def _as_list(f, n: int, side: str) -> list[Vertex]:
    if isinstance(f, Mapping):
        try:
            f = [f[v] for v in range(n)]
        except KeyError as err:
            raise InvalidEmbedding(f"f{side} is not total: missing {err.args[0]}") from None
    f = [tuple(int(c) for c in v) for v in f]
    if len(f) != n:
        raise InvalidEmbedding(f"f{side} has {len(f)} entries, expected {n}")
    return f


def make_embedding(fX, fY, i: int, H: RepeatedGame) -> EmbeddingMap:
    G = H.base
    fx = _as_list(fX, G.num_x, "X")
    fy = _as_list(fY, G.num_y, "Y")
    if not 1 <= i <= H.k:
        raise InvalidEmbedding(f"coordinate {i} outside [1, {H.k}]")
    for side, f in (("X", fx), ("Y", fy)):
        for v, img in enumerate(f):
            if len(img) != H.k:
                raise InvalidEmbedding(f"f{side}({v}) has length {len(img)}, expected {H.k}")
            if img[i - 1] != v:
                raise CoordinateEmbeddingViolated(
                    f"f{side}({v}) = {img} has component {img[i - 1]} at coordinate {i}", side, v
                )
    for side, f, realized in (("X", fx, H.realized_x), ("Y", fy, H.realized_y)):
        for v, img in enumerate(f):
            if img not in realized:
                raise ImageNotInH(f"f{side}({v}) = {img} is not a vertex of H")
    return EmbeddingMap(tuple(fx), tuple(fy), i)


def trivial_strategy(G: Game, H: RepeatedGame, s: int) -> RepStrategy:
    """Round s plays an optimal base strategy; every other round answers 0."""
    if not 1 <= s <= H.k:
        raise InvalidSpec(f"round {s} outside [1, {H.k}]")
    best = value_exact(G).witness
    j = s - 1
    px = {v: tuple(best.psi_x[v[j]] if r == j else 0 for r in range(H.k)) for v in H.realized_x}
    py = {v: tuple(best.psi_y[v[j]] if r == j else 0 for r in range(H.k)) for v in H.realized_y}
    return RepStrategy(H.k, px, py)


def _winning_pairs(H: RepeatedGame, psi: RepStrategy, C) -> set[tuple[Vertex, Vertex]]:
    out = set()
    for t in winning_set(H, psi, C):
        out.add(H.questions(t))
    return out


def robustness_fraction(G: Game, H: RepeatedGame, psi: RepStrategy, C, emb: EmbeddingMap) -> Fraction:
    """Fraction of base edge entries whose image is a question pair of some
    tuple in the winning set of C. Images asked by no tuple count as losses."""
    if G.size == 0:
        raise InvalidSpec("base game has no edges")
    wins = _winning_pairs(H, psi, C)
    hits = sum(1 for x, y in G.edges if emb.image(x, y) in wins)
    return Fraction(hits, G.size)


# ---------------------------------------------------------------- extraction


def bucket_count(z) -> int:
    """Number of dyadic weight buckets: ceil(log2(2z)), at least 1."""
    two_z = 2 * Fraction(z)
    n = max(1, math.ceil(math.log2(two_z)))
    # guard float rounding at exact powers of two
    while Fraction(2) ** n < two_z:
        n += 1
    while n > 1 and Fraction(2) ** (n - 1) >= two_z:
        n -= 1
    return n


def bucket_of(w: int, n_buckets: int) -> int:
    """Bucket i holds weights in [2^i, 2^(i+1)); the top bucket is closed above."""
    return min(int(w).bit_length() - 1, n_buckets - 1)


@dataclass(frozen=True)
class ExtractionTrace:
    s: int
    i: int
    eps: Fraction
    z: Fraction
    num_edges: int
    # (x, y) domain pairs after dedup, with their images
    hat_pairs: tuple[tuple[int, int], ...]
    win_pairs: tuple[tuple[int, int], ...]
    hat_size: int  # |W-hat| with multiplicity (= |E|)
    win_size: int  # |W| with multiplicity
    weights_x: Mapping[int, int]
    weights_y: Mapping[int, int]
    bad_x: tuple[Vertex, ...]
    bad_y: tuple[Vertex, ...]
    hat_pruned: tuple[tuple[int, int], ...]
    win_pruned: tuple[tuple[int, int], ...]
    bucket_table: tuple[dict, ...]
    bucket: tuple[int, int]
    w_star: tuple[int, int]
    w_max: tuple[int, int]
    labels: tuple[int, int]
    label_table_size: int
    M: tuple[Vertex, ...]
    N: tuple[Vertex, ...]
    M_s: tuple[int, ...]
    N_s: tuple[int, ...]
    strategy: Strategy  # on rect_subgame(G, M_s, N_s)
    satisfied_pairs: int
    rectangle_edges: int
    satisfied_fraction: Fraction
    strategy_fraction: Fraction  # strategy_value of `strategy` on the rectangle
    anomalies: tuple[str, ...] = ()
    fX: tuple[Vertex, ...] = field(default=(), repr=False)
    fY: tuple[Vertex, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "i": self.i,
            "eps": self.eps,
            "z": self.z,
            "num_edges": self.num_edges,
            "hat_size": self.hat_size,
            "win_size": self.win_size,
            "hat_pairs": len(self.hat_pairs),
            "win_pairs": len(self.win_pairs),
            "hat_pruned": len(self.hat_pruned),
            "win_pruned": len(self.win_pruned),
            "bad_x": [list(v) for v in self.bad_x],
            "bad_y": [list(v) for v in self.bad_y],
            "weights_x": {str(k): v for k, v in sorted(self.weights_x.items())},
            "weights_y": {str(k): v for k, v in sorted(self.weights_y.items())},
            "bucket_table": list(self.bucket_table),
            "bucket": list(self.bucket),
            "w_star": list(self.w_star),
            "w_max": list(self.w_max),
            "labels": list(self.labels),
            "M": [list(v) for v in self.M],
            "N": [list(v) for v in self.N],
            "M_s": list(self.M_s),
            "N_s": list(self.N_s),
            "psi_x": list(self.strategy.psi_x),
            "psi_y": list(self.strategy.psi_y),
            "satisfied_pairs": self.satisfied_pairs,
            "rectangle_edges": self.rectangle_edges,
            "satisfied_fraction": self.satisfied_fraction,
            "strategy_fraction": self.strategy_fraction,
            "anomalies": list(self.anomalies),
        }


def _close(hat: int, win: int, factor: Fraction) -> bool:
    return hat - win <= factor * hat


def extract_rectangle(
    G: Game,
    H: RepeatedGame,
    psi: RepStrategy,
    s: int,
    emb: EmbeddingMap,
    eps,
) -> ExtractionTrace:
    eps = Fraction(eps)
    if not 1 <= s <= H.k:
        raise InvalidSpec(f"round {s} outside [1, {H.k}]")
    m = G.size
    if parallel_count(G) > eps * m:
        raise InvalidSpec("base game has more than eps|E| parallel edges")
    z = blowup(H)
    j = s - 1
    anomalies: list[str] = []

    # (1) W-hat and W, with multiplicity, then dedup by domain pair
    wins = _winning_pairs(H, psi, [s])
    in_w = [emb.image(x, y) in wins for x, y in G.edges]
    win_size = sum(in_w)
    if m - win_size > eps * m:
        frac = Fraction(win_size, m)
        raise NotRobustEnough(f"only {frac} of edges land in the round-{s} winning set", frac)
    hat_pairs: list[tuple[int, int]] = []
    win_pairs: list[tuple[int, int]] = []
    seen = set()
    image_owner: dict[tuple[Vertex, Vertex], tuple[int, int]] = {}
    for (x, y), w in zip(G.edges, in_w):
        if (x, y) in seen:
            continue
        seen.add((x, y))
        img = emb.image(x, y)
        if img in image_owner and image_owner[img] != (x, y):
            anomalies.append(f"image collision: {image_owner[img]} and {(x, y)} share image {img}")
        image_owner.setdefault(img, (x, y))
        hat_pairs.append((x, y))
        if w:
            win_pairs.append((x, y))

    # (2) round-s weights over the whole image, BAD pruning
    im_x = sorted(set(emb.fX))
    im_y = sorted(set(emb.fY))
    wx: dict[int, int] = {}
    wy: dict[int, int] = {}
    for v in im_x:
        wx[v[j]] = wx.get(v[j], 0) + 1
    for v in im_y:
        wy[v[j]] = wy.get(v[j], 0) + 1
    bad_x = {v for v in im_x if wx[v[j]] > 2 * z}
    bad_y = {v for v in im_y if wy[v[j]] > 2 * z}

    def alive(p):
        return emb.fX[p[0]] not in bad_x and emb.fY[p[1]] not in bad_y

    hat_pruned = [p for p in hat_pairs if alive(p)]
    win_pruned = [p for p in win_pairs if alive(p)]
    win_set = set(win_pruned)

    # (3) dyadic buckets
    nb = bucket_count(z)

    def bx(p):
        return bucket_of(wx[emb.fX[p[0]][j]], nb)

    def by(p):
        return bucket_of(wy[emb.fY[p[1]][j]], nb)

    hat_cnt = np.zeros((nb, nb), dtype=np.int64)
    win_cnt = np.zeros((nb, nb), dtype=np.int64)
    for p in hat_pruned:
        hat_cnt[bx(p), by(p)] += 1
        if p in win_set:
            win_cnt[bx(p), by(p)] += 1
    table = []
    best = None
    for a in range(nb):
        for b in range(nb):
            h, w = int(hat_cnt[a, b]), int(win_cnt[a, b])
            good = _close(h, w, 2 * eps)
            table.append({"i": a, "j": b, "hat": h, "win": w, "good": good})
            if good and h > 0 and (best is None or h > best[0]):
                best = (h, (a, b))
    if best is None:
        raise NoGoodBucket("no dyadic bucket pair is 2eps-close", table)
    bi, bj = best[1]

    # (4) wrap-around labels inside the chosen buckets
    cap_w = math.floor(2 * z)
    wstar_x, wstar_y = 2**bi, 2**bj
    wmax_x, wmax_y = min(2 * wstar_x, cap_w), min(2 * wstar_y, cap_w)
    pre_x: dict[int, list[Vertex]] = {}
    pre_y: dict[int, list[Vertex]] = {}
    for v in im_x:
        if v not in bad_x and bucket_of(wx[v[j]], nb) == bi:
            pre_x.setdefault(v[j], []).append(v)
    for v in im_y:
        if v not in bad_y and bucket_of(wy[v[j]], nb) == bj:
            pre_y.setdefault(v[j], []).append(v)
    for d in (pre_x, pre_y):
        for key in d:
            d[key].sort()

    def label_class(pre, ell):
        return [pre[key][(ell - 1) % len(pre[key])] for key in sorted(pre)]

    cand = [p for p in hat_pruned if bx(p) == bi and by(p) == bj]
    # label matrices: does image of p's x lie in M_l?
    pos_x = {v: idx for key in pre_x for idx, v in enumerate(pre_x[key])}
    pos_y = {v: idx for key in pre_y for idx, v in enumerate(pre_y[key])}
    Lx = np.zeros((len(cand), wmax_x), dtype=np.int64)
    Ly = np.zeros((len(cand), wmax_y), dtype=np.int64)
    for r, (x, y) in enumerate(cand):
        vx, vy = emb.fX[x], emb.fY[y]
        nx_, ny_ = len(pre_x[vx[j]]), len(pre_y[vy[j]])
        for ell in range(1, wmax_x + 1):
            Lx[r, ell - 1] = (ell - 1) % nx_ == pos_x[vx]
        for ell in range(1, wmax_y + 1):
            Ly[r, ell - 1] = (ell - 1) % ny_ == pos_y[vy]
    wmask = np.array([p in win_set for p in cand], dtype=np.int64)
    hat_lab = Lx.T @ Ly
    win_lab = (Lx * wmask[:, None]).T @ Ly
    pick = None
    for a in range(wmax_x):
        for b in range(wmax_y):
            h, w = int(hat_lab[a, b]), int(win_lab[a, b])
            if h > 0 and _close(h, w, 8 * eps) and (pick is None or h > pick[0]):
                pick = (h, (a + 1, b + 1))
    if pick is None:
        raise NoGoodBucket("no label-class pair is 8eps-close", table)
    lx, ly = pick[1]
    M = label_class(pre_x, lx)
    N = label_class(pre_y, ly)

    # (5) project to round s and read off the base strategy
    M_s = tuple(sorted(v[j] for v in M))
    N_s = tuple(sorted(v[j] for v in N))
    if len(set(M_s)) != len(M) or len(set(N_s)) != len(N):
        anomalies.append("selected class is not one-to-one at round s")
    Mset, Nset = set(M), set(N)
    sat_pairs = {
        (emb.fX[x][j], emb.fY[y][j]) for x, y in win_pruned if emb.fX[x] in Mset and emb.fY[y] in Nset
    }
    sub = rect_subgame(G, M_s, N_s)
    by_x = {v[j]: psi.answer_x(v)[j] for v in M}
    by_y = {v[j]: psi.answer_y(v)[j] for v in N}
    strat = Strategy([by_x[x] for x in M_s], [by_y[y] for y in N_s])
    frac = Fraction(len(sat_pairs), sub.size)
    return ExtractionTrace(
        s=s,
        i=emb.i,
        eps=eps,
        z=z,
        num_edges=m,
        hat_pairs=tuple(hat_pairs),
        win_pairs=tuple(win_pairs),
        hat_size=m,
        win_size=win_size,
        weights_x=wx,
        weights_y=wy,
        bad_x=tuple(sorted(bad_x)),
        bad_y=tuple(sorted(bad_y)),
        hat_pruned=tuple(hat_pruned),
        win_pruned=tuple(win_pruned),
        bucket_table=tuple(table),
        bucket=(bi, bj),
        w_star=(wstar_x, wstar_y),
        w_max=(wmax_x, wmax_y),
        labels=(lx, ly),
        label_table_size=wmax_x * wmax_y,
        M=tuple(M),
        N=tuple(N),
        M_s=M_s,
        N_s=N_s,
        strategy=strat,
        satisfied_pairs=len(sat_pairs),
        rectangle_edges=sub.size,
        satisfied_fraction=frac,
        strategy_fraction=strategy_value(sub, strat),
        anomalies=tuple(anomalies),
        fX=emb.fX,
        fY=emb.fY,
    )


@dataclass(frozen=True)
class TraceCheck:
    pruned_bound: bool  # |W'| >= (1 - 3 eps)|E|
    bucket_close: bool
    label_close: bool
    one_to_one: bool
    bad_rule: bool

    @property
    def passed(self) -> bool:
        return self.pruned_bound and self.bucket_close and self.label_close and self.one_to_one and self.bad_rule


def verify_trace(trace: ExtractionTrace) -> TraceCheck:
    """Recompute the closeness certificates from the stored multisets."""
    j = trace.s - 1
    fX, fY = trace.fX, trace.fY
    nb = bucket_count(trace.z)
    win = set(trace.win_pruned)

    def bucket_pair(p):
        return (
            bucket_of(trace.weights_x[fX[p[0]][j]], nb),
            bucket_of(trace.weights_y[fY[p[1]][j]], nb),
        )

    in_b = [p for p in trace.hat_pruned if bucket_pair(p) == trace.bucket]
    h, w = len(in_b), sum(p in win for p in in_b)
    bucket_close = h > 0 and _close(h, w, 2 * trace.eps)
    Mset, Nset = set(trace.M), set(trace.N)
    in_mn = [p for p in in_b if fX[p[0]] in Mset and fY[p[1]] in Nset]
    h2, w2 = len(in_mn), sum(p in win for p in in_mn)
    label_close = h2 > 0 and _close(h2, w2, 8 * trace.eps)
    one_to_one = len(trace.M_s) == len(trace.M) == len(set(v[j] for v in trace.M)) and len(trace.N_s) == len(
        trace.N
    ) == len(set(v[j] for v in trace.N))
    bad_x, bad_y = set(trace.bad_x), set(trace.bad_y)
    bad_rule = all((trace.weights_x[v[j]] > 2 * trace.z) == (v in bad_x) for v in set(fX)) and all(
        (trace.weights_y[v[j]] > 2 * trace.z) == (v in bad_y) for v in set(fY)
    )
    return TraceCheck(
        pruned_bound=len(trace.win_pruned) >= (1 - 3 * trace.eps) * trace.num_edges,
        bucket_close=bucket_close,
        label_close=label_close,
        one_to_one=one_to_one,
        bad_rule=bad_rule,
    )


# ---------------------------------------------------------------- providers

Provider = Callable[[Game, RepeatedGame, RepStrategy, frozenset], EmbeddingMap]


def identity_provider(i: int = 2) -> Provider:
    """Diagonal embedding x -> (x, ..., x)."""

    def provide(G, H, psi, C):
        fx = [(x,) * H.k for x in range(G.num_x)]
        fy = [(y,) * H.k for y in range(G.num_y)]
        return make_embedding(fx, fy, i, H)

    return provide


def planted_provider(rows: Sequence[int], cols: Sequence[int], i: int = 2) -> Provider:
    """Coordinate i carries the question; every other coordinate maps x into
    ``rows[x mod len(rows)]`` (cols likewise), i.e. into a planted rectangle."""

    def provide(G, H, psi, C):
        fx = [tuple(x if r == i - 1 else rows[x % len(rows)] for r in range(H.k)) for x in range(G.num_x)]
        fy = [tuple(y if r == i - 1 else cols[y % len(cols)] for r in range(H.k)) for y in range(G.num_y)]
        return make_embedding(fx, fy, i, H)

    return provide


def json_provider(path) -> Provider:
    """Read ``{"fX": [...], "fY": [...], "i": i}`` from a file."""

    def provide(G, H, psi, C):
        with open(path) as fh:
            d = json.load(fh)
        return make_embedding(d["fX"], d["fY"], int(d["i"]), H)

    return provide


# ---------------------------------------------------------------- experiment

NOT_ROBUST = "NOT_ROBUST"
FORTIFICATION_VIOLATED = "FORTIFICATION_VIOLATED"
HYPOTHESES_UNMET = "HYPOTHESES_UNMET"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class NoGoVerdict:
    branch: str
    value: Fraction
    gamma: Fraction
    eps: Fraction
    z: Fraction | None
    delta: Fraction | None
    marginals_passed: bool
    hypotheses: HypothesisReport | None
    robustness_fraction: Fraction | None = None
    rectangle: dict | None = None
    trace: ExtractionTrace | None = field(default=None, repr=False)
    embedding: EmbeddingMap | None = field(default=None, repr=False)
    reasons: tuple[str, ...] = ()
    anomalies: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "value": self.value,
            "gamma": self.gamma,
            "eps": self.eps,
            "z": self.z,
            "delta": self.delta,
            "marginals_passed": self.marginals_passed,
            "robustness_fraction": self.robustness_fraction,
            "rectangle": self.rectangle,
            "trace": None if self.trace is None else self.trace.to_dict(),
            "embedding": None if self.embedding is None else self.embedding.to_dict(),
            "hypotheses": None if self.hypotheses is None else self.hypotheses.to_dict(),
            "reasons": list(self.reasons),
            "anomalies": list(self.anomalies),
        }


def nogo_experiment(
    G: Game,
    scheme: SchemeSpec,
    k: int,
    s: int,
    gamma,
    eps,
    provider: Provider,
    hypotheses: HypothesisReport | None = None,
) -> NoGoVerdict:
    """Run the dichotomy once and record which branch occurred.

    The gate checks uniform marginals, the (gamma, eps) ranges and the
    regularity, mixing and value hypotheses. Fortification is not gated: it
    is what the extraction probes. ``hypotheses`` replaces the theorem-level
    bundle (e.g. a random-game report at desk-scale delta).
    """
    eps = check_eps(eps)
    gamma = Fraction(gamma)
    if k < 2:
        raise InvalidSpec("the experiment needs k >= 2 so some i differs from s")
    if not 1 <= s <= k:
        raise InvalidSpec(f"round {s} outside [1, {k}]")
    val = value_exact(G).value
    H = apply_scheme(G, scheme, k)
    marg = uniform_marginals_check(H)
    z = blowup(H)
    reasons = []
    if not marg.passed:
        reasons.append("uniform marginals fail")
    if gamma > val:
        reasons.append(f"gamma {gamma} exceeds val(G) {val}")
    if not eps < (1 - gamma) / 23:
        reasons.append(f"eps {eps} not below (1 - gamma)/23")
    if hypotheses is None and marg.passed and z >= 1:
        hypotheses = theorem_hypotheses(G, z, eps, include_fortification=False)
    if hypotheses is not None:
        if not hypotheses.regular_pass:
            reasons.append("regularity/parallel-edge hypothesis fails")
        if not hypotheses.mixing_pass:
            reasons.append("mixing hypothesis fails")
        if not hypotheses.value_pass:
            reasons.append("value hypothesis fails")
    if val > 1 - 20 * eps:
        if "value hypothesis fails" not in reasons:
            reasons.append("value hypothesis fails")
    delta = None if hypotheses is None else hypotheses.delta
    base = dict(value=val, gamma=gamma, eps=eps, z=z, delta=delta, marginals_passed=marg.passed, hypotheses=hypotheses)
    if reasons:
        return NoGoVerdict(HYPOTHESES_UNMET, reasons=tuple(reasons), **base)

    psi = trivial_strategy(G, H, s)
    C = frozenset({s})
    emb = provider(G, H, psi, C)
    if emb.i in C:
        raise InvalidEmbedding(f"provider returned i={emb.i} inside C")
    frac = robustness_fraction(G, H, psi, C, emb)
    if frac < 1 - eps:
        return NoGoVerdict(NOT_ROBUST, robustness_fraction=frac, embedding=emb, **base)

    try:
        trace = extract_rectangle(G, H, psi, s, emb, eps)
    except (NoGoodBucket, NotRobustEnough) as err:
        return NoGoVerdict(
            INCONCLUSIVE, robustness_fraction=frac, embedding=emb, anomalies=(f"{err.code}: {err}",), **base
        )
    anomalies = list(trace.anomalies)
    nx_min = delta * G.num_x
    ny_min = delta * G.num_y
    big = len(trace.M_s) >= nx_min and len(trace.N_s) >= ny_min
    if not big:
        anomalies.append("extracted rectangle is below the delta size threshold")
    recheck = recheck_rectangle(G, trace.M_s, trace.N_s)
    rect = {
        "S": list(trace.M_s),
        "T": list(trace.N_s),
        "psi_x": list(trace.strategy.psi_x),
        "psi_y": list(trace.strategy.psi_y),
        "fraction": trace.satisfied_fraction,
        "strategy_fraction": trace.strategy_fraction,
        "rechecked_value": recheck.value,
    }
    if trace.satisfied_fraction >= val + eps and big and recheck.value > val + eps:
        return NoGoVerdict(
            FORTIFICATION_VIOLATED, robustness_fraction=frac, rectangle=rect, trace=trace,
            embedding=emb, anomalies=tuple(anomalies), **base,
        )
    if trace.satisfied_fraction < val + eps:
        anomalies.append("extracted fraction below val(G) + eps")
    return NoGoVerdict(
        INCONCLUSIVE, robustness_fraction=frac, rectangle=rect, trace=trace,
        embedding=emb, anomalies=tuple(anomalies), **base,
    )


# ---------------------------------------------------------------- bounds


@dataclass(frozen=True)
class BoundTable:
    z: Fraction
    eps: Fraction
    log2_sq: Fraction
    log_exact: bool
    clamped: bool
    side_fraction: Fraction  # |S|/|X|, |T|/|Y| lower bound
    class_fraction: Fraction  # |M|/|X|, |N|/|Y| lower bound; also the admissible delta
    satisfied_bound: Fraction
    chain_bound: Fraction  # 1 - 11 eps
    chain_holds: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def unreduced(self) -> dict[str, str]:
        """The bounds written over eps's own denominator, as in a hand substitution."""
        n, D = self.eps.numerator, self.eps.denominator
        out = {}
        if self.log2_sq.denominator == 1:
            L = self.log2_sq.numerator
            z = self.z
            out["side_fraction"] = f"{(D - 6 * n) * z.denominator}/{D * 4 * L * z.denominator}"
            out["class_fraction"] = f"{(D - 6 * n) * z.denominator}/{D * 8 * z.numerator * L}"
        out["satisfied_bound"] = f"{(D - 8 * n) * (D - n)}/{D * (D + n)}"
        out["chain_bound"] = f"{D - 11 * n}/{D}"
        return out

    def rows(self) -> list[tuple[str, str]]:
        raw = self.unreduced()

        def show(key, v):
            return f"{v}  (= {raw[key]})" if key in raw and raw[key] != str(v) else str(v)

        return [
            ("log2^2 z (clamped at 1)", str(self.log2_sq)),
            ("|S|/|X|, |T|/|Y| >=", show("side_fraction", self.side_fraction)),
            ("|M|/|X|, |N|/|Y| >=", show("class_fraction", self.class_fraction)),
            ("delta <=", show("class_fraction", self.class_fraction)),
            ("satisfied fraction >=", show("satisfied_bound", self.satisfied_bound)),
            ("1 - 11 eps", show("chain_bound", self.chain_bound)),
        ]


def bound_table(z, eps) -> BoundTable:
    eps = check_eps(eps)
    z = Fraction(z)
    if z < 1:
        raise InvalidSpec("z must be >= 1")
    L, exact = log2_squared(z)
    sat = (1 - 8 * eps) * (1 - eps) / (1 + eps)
    chain = 1 - 11 * eps
    return BoundTable(
        z=z,
        eps=eps,
        log2_sq=L,
        log_exact=exact,
        clamped=z <= 2,
        side_fraction=(1 - 6 * eps) / (4 * L),
        class_fraction=(1 - 6 * eps) / (8 * z * L),
        satisfied_bound=sat,
        chain_bound=chain,
        chain_holds=sat > chain,
    )
