"""Checks for the no-go theorem's hypotheses on a base game.

Regularity and parallel edges, rectangle-density mixing, the value bound and
(delta, eps)-fortification. Exhaustive scans enumerate every rectangle whose
sides meet the size threshold; sampled scans can only refute and report
``passed=None`` when they find nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterator

import numpy as np

from . import caps
from .errors import EpsOutOfRange, NotRegular, SearchSpaceTooLarge
from .game import Game, Strategy, ValueResult, rect_subgame, value_exact
from .rng import derive_rng, random_subset

Side = tuple[int, ...]


# ---------------------------------------------------------------- regularity


@dataclass(frozen=True)
class RegularReport:
    regular: bool
    d: int | None
    parallel_count: int
    bound: Fraction
    passed: bool

    def __iter__(self) -> Iterator:
        return iter((self.passed, self.d, self.parallel_count))

    def to_dict(self) -> dict:
        return {
            "regular": self.regular,
            "d": self.d,
            "parallel_count": self.parallel_count,
            "bound": self.bound,
            "passed": self.passed,
        }


def parallel_count(game: Game) -> int:
    m = game.multiplicity
    return int(np.maximum(m - 1, 0).sum())


def regular_degree(game: Game) -> int | None:
    if not game.edges:
        return None
    dx, dy = game.degrees_x, game.degrees_y
    d = int(dx[0])
    if (dx == d).all() and (dy == d).all():
        return d
    return None


def check_regular_parallel(game: Game, epsilon=None, bound=None) -> RegularReport:
    """Regularity (with multiplicity) and ``sum max(0, mult - 1) <= bound``.

    ``bound`` defaults to ``epsilon * |E|``.
    """
    if bound is None:
        if epsilon is None:
            raise ValueError("give epsilon or an explicit bound")
        bound = Fraction(epsilon) * game.size
    bound = Fraction(bound)
    d = regular_degree(game)
    pc = parallel_count(game)
    return RegularReport(d is not None, d, pc, bound, d is not None and pc <= bound)


# ---------------------------------------------------------------- subsets


def min_side(delta, n: int) -> int:
    """Smallest admissible side size: ceil(delta * n), at least 1."""
    return max(1, math.ceil(Fraction(delta) * n))


def _subset_masks(n: int, lo: int) -> np.ndarray:
    """0/1 membership rows of all subsets of ``range(n)`` of size >= lo.

    Rows are in lexicographic order of the sorted member tuples within each
    size, sizes ascending.
    """
    rows = []
    for size in range(lo, n + 1):
        for combo in combinations(range(n), size):
            r = np.zeros(n, dtype=np.int64)
            r[list(combo)] = 1
            rows.append(r)
    if not rows:
        return np.zeros((0, n), dtype=np.int64)
    return np.array(rows)


def _members(row: np.ndarray) -> Side:
    return tuple(int(i) for i in np.nonzero(row)[0])


def _count_subsets(n: int, lo: int) -> int:
    return sum(math.comb(n, s) for s in range(lo, n + 1))


def _argmax_fraction(num: np.ndarray, den: np.ndarray, valid: np.ndarray, sx: np.ndarray, sy: np.ndarray):
    """Exact max of num/den over valid cells; ties -> smallest (S, T)."""
    if not valid.any():
        return None
    ratio = np.where(valid, num / np.where(den == 0, 1, den), -np.inf)
    top = ratio.max()
    cand = np.argwhere(valid & (ratio >= top - abs(top) * 1e-9 - 1e-12))
    best = None
    for i, j in cand:
        val = Fraction(int(num[i, j]), int(den[i, j]))
        key = (_members(sx[i]), _members(sy[j]))
        if best is None or val > best[0] or (val == best[0] and key < best[1]):
            best = (val, key, int(i), int(j))
    return best


# ---------------------------------------------------------------- mixing


@dataclass(frozen=True)
class MixingReport:
    mode: str  # "exhaustive" | "sampled"
    delta: Fraction
    eta: Fraction
    d: int
    worst_deviation: Fraction | None
    worst_S: Side | None
    worst_T: Side | None
    worst_count: int | None
    rectangles_checked: int
    passed: bool | None  # None: sampled scan found no violation (refute-only)

    @property
    def refute_only(self) -> bool:
        return self.mode == "sampled"

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "refute_only": self.refute_only,
            "delta": self.delta,
            "eta": self.eta,
            "d": self.d,
            "worst_deviation": self.worst_deviation,
            "worst_S": list(self.worst_S) if self.worst_S is not None else None,
            "worst_T": list(self.worst_T) if self.worst_T is not None else None,
            "worst_count": self.worst_count,
            "rectangles_checked": self.rectangles_checked,
            "passed": self.passed,
        }


def rectangle_deviation(game: Game, S, T, d: int) -> Fraction:
    """``| |E & SxT|/(|S||T|) - d/|Y| |`` relative to ``d/|Y|``."""
    S, T = list(S), list(T)
    cnt = int(game.multiplicity[np.ix_(S, T)].sum())
    return Fraction(abs(cnt * game.num_y - d * len(S) * len(T)), d * len(S) * len(T))


def mixing_check(
    game: Game,
    delta,
    eta,
    mode: str = "auto",
    seed: int = 0,
    samples: int = 2000,
    cap: int | None = None,
) -> MixingReport:
    delta, eta = Fraction(delta), Fraction(eta)
    d = regular_degree(game)
    if d is None:
        raise NotRegular("mixing check needs a regular graph")
    cap = caps.cap("subsets") if cap is None else cap
    nx, ny = game.num_x, game.num_y
    lo_x, lo_y = min_side(delta, nx), min_side(delta, ny)
    fits = 2**nx + 2**ny <= cap
    mode = {"exact": "exhaustive"}.get(mode, mode)
    if mode == "auto":
        mode = "exhaustive" if fits else "sampled"
    if mode == "exhaustive" and not fits:
        raise SearchSpaceTooLarge(f"2^{nx} + 2^{ny} subsets exceeds cap {cap}")
    mult = game.multiplicity

    if mode == "exhaustive":
        sx = _subset_masks(nx, lo_x)
        sy = _subset_masks(ny, lo_y)
        best = None
        checked = 0
        chunk = max(1, (1 << 22) // max(1, len(sy)))
        for start in range(0, len(sx), chunk):
            block = sx[start : start + chunk]
            cnt = block @ mult @ sy.T
            size = np.outer(block.sum(1), sy.sum(1))
            num = np.abs(cnt * ny - d * size)
            den = d * size
            found = _argmax_fraction(num, den, np.ones_like(num, dtype=bool), block, sy)
            checked += cnt.size
            if found is not None:
                val, key, i, j = found
                if best is None or val > best[0] or (val == best[0] and key < best[1]):
                    best = (val, key, int(cnt[i, j]))
        if best is None:
            return MixingReport(mode, delta, eta, d, None, None, None, None, 0, True)
        val, (S, T), c = best
        return MixingReport(mode, delta, eta, d, val, S, T, c, checked, val <= eta)

    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = derive_rng(seed, "mixing-sample")
    best = None
    for _ in range(samples):
        S = tuple(random_subset(nx, int(rng.integers(lo_x, nx + 1)), rng))
        T = tuple(random_subset(ny, int(rng.integers(lo_y, ny + 1)), rng))
        val = rectangle_deviation(game, S, T, d)
        if best is None or val > best[0] or (val == best[0] and (S, T) < best[1]):
            best = (val, (S, T))
    val, (S, T) = best
    c = int(mult[np.ix_(list(S), list(T))].sum())
    return MixingReport(mode, delta, eta, d, val, S, T, c, samples, False if val > eta else None)


# ---------------------------------------------------------------- fortification


@dataclass(frozen=True)
class FortifyReport:
    mode: str  # "exact" | "sampled"
    delta: Fraction
    eps: Fraction
    base_value: Fraction
    threshold: Fraction
    passed: bool | None
    worst_value: Fraction | None
    worst_S: Side | None
    worst_T: Side | None
    witness: Strategy | None  # optimal strategy on rect_subgame(worst_S, worst_T)
    rectangles_checked: int
    skipped_edgeless: int

    @property
    def refute_only(self) -> bool:
        return self.mode == "sampled"

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "refute_only": self.refute_only,
            "delta": self.delta,
            "eps": self.eps,
            "base_value": self.base_value,
            "threshold": self.threshold,
            "passed": self.passed,
            "worst_value": self.worst_value,
            "worst_S": list(self.worst_S) if self.worst_S is not None else None,
            "worst_T": list(self.worst_T) if self.worst_T is not None else None,
            "witness": None
            if self.witness is None
            else {"psi_x": list(self.witness.psi_x), "psi_y": list(self.witness.psi_y)},
            "rectangles_checked": self.rectangles_checked,
            "skipped_edgeless": self.skipped_edgeless,
        }


def recheck_rectangle(game: Game, S, T) -> ValueResult:
    """Independent re-derivation of a rectangle's value (rect_subgame + value_exact)."""
    return value_exact(rect_subgame(game, S, T))


def _rectangle_table(game: Game, sx: np.ndarray, sy: np.ndarray, budget: int = 1 << 23):
    """Best satisfied count for every rectangle ``sx[i] x sy[j]``.

    Enumerates every X-labeling once; for a fixed labeling each y in T answers
    optimally, and the max over labelings of X covers every restriction to S.
    """
    q, nx, ny = game.alphabet_size, game.num_x, game.num_y
    contrib = np.zeros((nx, ny, q, q), dtype=np.int32)  # [x, y, a, b]
    np.add.at(contrib, (game.edge_x, game.edge_y), game.allowed.astype(np.int32))
    total = q**nx
    powers = q ** np.arange(nx - 1, -1, -1, dtype=np.int64)
    per = max(1, len(sx) * ny * q)
    batch = max(1, budget // per)
    best = np.zeros((len(sx), len(sy)), dtype=np.int64)
    sxi = sx.astype(np.int32)
    syi = sy.T.astype(np.int32)
    xs = np.arange(nx)
    for start in range(0, total, batch):
        idx = np.arange(start, min(total, start + batch), dtype=np.int64)
        labels = (idx[:, None] // powers[None, :]) % q  # (B, nx)
        c = contrib[xs[None, :], :, labels, :]  # (B, nx, ny, q)
        score = np.einsum("sx,bxyq->bsyq", sxi, c).max(axis=3)  # (B, Kx, ny)
        tot = score @ syi  # (B, Kx, Ky)
        np.maximum(best, tot.max(axis=0), out=best)
    return best


def fortification_check(
    game: Game,
    delta,
    eps,
    mode: str = "exact",
    seed: int = 0,
    samples: int = 500,
    base_value: ValueResult | None = None,
    cap: int | None = None,
) -> FortifyReport:
    """Every admissible rectangle must have value <= val(G) + eps.

    Rectangles with no edges are skipped. On failure the lexicographically
    smallest worst rectangle is reported with an optimal strategy for it.
    """
    delta, eps = Fraction(delta), Fraction(eps)
    base = value_exact(game) if base_value is None else base_value
    threshold = base.value + eps
    nx, ny = game.num_x, game.num_y
    lo_x, lo_y = min_side(delta, nx), min_side(delta, ny)
    mode = {"exhaustive": "exact", "auto": "exact"}.get(mode, mode)

    if mode == "exact":
        cap = caps.cap("rectangles") if cap is None else cap
        n_rect = _count_subsets(nx, lo_x) * _count_subsets(ny, lo_y)
        if n_rect > cap:
            raise SearchSpaceTooLarge(f"{n_rect} rectangles exceeds cap {cap}")
        if game.alphabet_size ** (nx + ny) > caps.cap("strategy"):
            raise SearchSpaceTooLarge("per-rectangle exact value exceeds strategy cap")
        g = game if nx <= ny else game.transpose()
        sx = _subset_masks(g.num_x, min_side(delta, g.num_x))
        sy = _subset_masks(g.num_y, min_side(delta, g.num_y))
        edges = sx @ g.multiplicity @ sy.T
        best = _rectangle_table(g, sx, sy)
        valid = edges > 0
        skipped = int((~valid).sum())
        if g is not game:
            sx, sy, best, edges, valid = sy, sx, best.T, edges.T, valid.T
        found = _argmax_fraction(best, edges, valid, sx, sy)
        if found is None:
            return FortifyReport(mode, delta, eps, base.value, threshold, True, None, None, None, None, 0, skipped)
        worst, (S, T), _, _ = found
        witness = recheck_rectangle(game, S, T).witness
        return FortifyReport(
            mode, delta, eps, base.value, threshold, worst <= threshold,
            worst, S, T, witness, int(valid.sum()), skipped,
        )

    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = derive_rng(seed, "fortify-sample")
    best = None
    skipped = 0
    checked = 0
    for _ in range(samples):
        S = tuple(random_subset(nx, int(rng.integers(lo_x, nx + 1)), rng))
        T = tuple(random_subset(ny, int(rng.integers(lo_y, ny + 1)), rng))
        if game.multiplicity[np.ix_(list(S), list(T))].sum() == 0:
            skipped += 1
            continue
        checked += 1
        res = recheck_rectangle(game, S, T)
        if best is None or res.value > best[0] or (res.value == best[0] and (S, T) < best[1]):
            best = (res.value, (S, T), res.witness)
    if best is None:
        return FortifyReport(mode, delta, eps, base.value, threshold, None, None, None, None, None, 0, skipped)
    worst, (S, T), witness = best
    return FortifyReport(
        mode, delta, eps, base.value, threshold, False if worst > threshold else None,
        worst, S, T, witness, checked, skipped,
    )


# ---------------------------------------------------------------- theorem bundle


def log2_squared(phi) -> tuple[Fraction, bool]:
    """``max(1, log2(phi)^2)`` as a rational; exact iff phi is a power of two.

    Otherwise a rational upper bound (float log2 plus a 2^-30 margin), so
    every quantity divided by it stays on the safe side.
    """
    phi = Fraction(phi)
    if phi < 1:
        raise ValueError(f"blowup must be >= 1, got {phi}")
    n, d = phi.numerator, phi.denominator
    if n & (n - 1) == 0 and d & (d - 1) == 0:
        L = Fraction(n.bit_length() - 1 - (d.bit_length() - 1))
        return max(Fraction(1), L * L), True
    L = Fraction(math.log2(n) - math.log2(d)) + Fraction(1, 2**30)
    sq = L * L
    if sq <= 1:
        return Fraction(1), True
    return sq, False


def delta_star(phi) -> tuple[Fraction, bool]:
    """``1 / (16 phi max(1, log2^2 phi))`` and whether it is exact."""
    sq, exact = log2_squared(phi)
    return 1 / (16 * Fraction(phi) * sq), exact


@dataclass(frozen=True)
class HypothesisReport:
    delta: Fraction
    eps: Fraction
    regular: RegularReport
    mixing: MixingReport | None
    value: Fraction
    value_bound: Fraction
    value_pass: bool
    fortification: FortifyReport | None
    blowup_bound: Fraction | None = None
    delta_exact: bool = True
    notes: tuple[str, ...] = field(default=())

    @property
    def regular_pass(self) -> bool:
        return self.regular.passed

    @property
    def mixing_pass(self) -> bool:
        return self.mixing is not None and self.mixing.passed is True

    @property
    def fortified_pass(self) -> bool | None:
        return None if self.fortification is None else self.fortification.passed

    @property
    def gate_passed(self) -> bool:
        """Conditions 1-3 (fortification is what the no-go dichotomy probes)."""
        return self.regular_pass and self.mixing_pass and self.value_pass

    @property
    def passed(self) -> bool:
        return self.gate_passed and self.fortified_pass is True

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "delta_exact": self.delta_exact,
            "eps": self.eps,
            "blowup_bound": self.blowup_bound,
            "regular": self.regular.to_dict(),
            "mixing": None if self.mixing is None else self.mixing.to_dict(),
            "value": self.value,
            "value_bound": self.value_bound,
            "value_pass": self.value_pass,
            "fortification": None if self.fortification is None else self.fortification.to_dict(),
            "regular_pass": self.regular_pass,
            "mixing_pass": self.mixing_pass,
            "fortified_pass": self.fortified_pass,
            "passed": self.passed,
            "notes": list(self.notes),
        }


def check_eps(eps) -> Fraction:
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 23):
        raise EpsOutOfRange(f"eps={eps} outside (0, 1/23)")
    return eps


def theorem_hypotheses(
    game: Game,
    blowup_bound,
    eps,
    include_fortification: bool = True,
    mode: str = "exact",
    seed: int = 0,
) -> HypothesisReport:
    """All four conditions at ``delta* = 1/(16 phi max(1, log2^2 phi))``."""
    eps = check_eps(eps)
    phi = Fraction(blowup_bound)
    delta, exact = delta_star(phi)
    reg = check_regular_parallel(game, epsilon=eps)
    mix = None
    notes = []
    if reg.regular:
        mix = mixing_check(game, delta, eps, mode="auto" if mode == "exact" else "sampled", seed=seed)
    else:
        notes.append("graph not regular; mixing condition not evaluated")
    val = value_exact(game)
    bound = 1 - 20 * eps
    fort = None
    if include_fortification:
        fort = fortification_check(game, delta, eps, mode=mode, seed=seed, base_value=val)
    if not exact:
        notes.append("log2(phi) not exact; delta* uses a rational upper bound on log2^2")
    return HypothesisReport(
        delta=delta,
        eps=eps,
        regular=reg,
        mixing=mix,
        value=val.value,
        value_bound=bound,
        value_pass=val.value <= bound,
        fortification=fort,
        blowup_bound=phi,
        delta_exact=exact,
        notes=tuple(notes),
    )
