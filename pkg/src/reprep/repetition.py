"""k-repeated games, repetition schemes, marginals and winning sets.

A repeated game stores k-tuples of *base edge indices*; the questions
``(xbar, ybar)`` are recovered from the base game. Rounds are 1-based in
every public argument and report, 0-based in array axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import caps
from .errors import InvalidSpec, SearchSpaceTooLarge, UndefinedVertex
from .game import Game, Strategy
from .rng import derive_rng, fisher_yates

Vertex = tuple[int, ...]


@dataclass(frozen=True)
class RepeatedGame:
    base: Game
    k: int
    tuples: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.k < 1:
            raise InvalidSpec("k must be positive")
        tuples = tuple(tuple(int(e) for e in t) for t in self.tuples)
        m = self.base.size
        for t in tuples:
            if len(t) != self.k:
                raise InvalidSpec(f"tuple {t} has length {len(t)}, expected {self.k}")
            for e in t:
                if not 0 <= e < m:
                    raise InvalidSpec(f"tuple {t} references missing base edge {e}")
        object.__setattr__(self, "tuples", tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.tuples, dtype=np.int64).reshape(len(self.tuples), self.k)
        a.setflags(write=False)
        return a

    def questions(self, index: int) -> tuple[Vertex, Vertex]:
        t = self.tuples[index]
        edges = self.base.edges
        return tuple(edges[e][0] for e in t), tuple(edges[e][1] for e in t)

    @cached_property
    def x_vertices(self) -> np.ndarray:
        """``[tuple, round]`` -> base X question."""
        return self.base.edge_x[self.array] if len(self) else np.zeros((0, self.k), np.int64)

    @cached_property
    def y_vertices(self) -> np.ndarray:
        return self.base.edge_y[self.array] if len(self) else np.zeros((0, self.k), np.int64)

    @cached_property
    def realized_x(self) -> frozenset[Vertex]:
        return frozenset(tuple(int(v) for v in row) for row in self.x_vertices)

    @cached_property
    def realized_y(self) -> frozenset[Vertex]:
        return frozenset(tuple(int(v) for v in row) for row in self.y_vertices)

    @cached_property
    def pair_index(self) -> dict[tuple[Vertex, Vertex], list[int]]:
        """Question pair -> indices of the tuples asking it."""
        out: dict[tuple[Vertex, Vertex], list[int]] = {}
        for i, (xr, yr) in enumerate(zip(self.x_vertices, self.y_vertices)):
            key = (tuple(int(v) for v in xr), tuple(int(v) for v in yr))
            out.setdefault(key, []).append(i)
        return out


@dataclass(frozen=True)
class RepStrategy:
    """Answers for the realized vertices of a repeated game."""

    k: int
    psi_x: Mapping[Vertex, tuple[int, ...]]
    psi_y: Mapping[Vertex, tuple[int, ...]]

    def answer_x(self, v: Vertex) -> tuple[int, ...]:
        try:
            return self.psi_x[v]
        except KeyError:
            raise UndefinedVertex(f"strategy has no answer for X-vertex {v}") from None

    def answer_y(self, v: Vertex) -> tuple[int, ...]:
        try:
            return self.psi_y[v]
        except KeyError:
            raise UndefinedVertex(f"strategy has no answer for Y-vertex {v}") from None


def product_strategy(H: RepeatedGame, s: Strategy) -> RepStrategy:
    """Play the base strategy ``s`` independently in every round."""
    px = {v: tuple(s.psi_x[x] for x in v) for v in H.realized_x}
    py = {v: tuple(s.psi_y[y] for y in v) for v in H.realized_y}
    return RepStrategy(H.k, px, py)


@dataclass(frozen=True)
class SchemeSpec:
    """Which repetition scheme to apply.

    kind:
      ``full-product``       all of E^k;
      ``permutation-union``  z copies of ``(e, p2(e), ..., pk(e))`` with
                             seeded uniform edge permutations ``pj``; the first
                             ``identity_copies`` copies use identity permutations;
      ``explicit``           the given ``tuples``.
    """

    kind: str
    z: int = 1
    seed: int = 0
    identity_copies: int = 0
    tuples: tuple[tuple[int, ...], ...] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "z": self.z, "seed": self.seed, "identity_copies": self.identity_copies}
        if self.tuples is not None:
            d["tuples"] = [list(t) for t in self.tuples]
        return d


def full_power(game: Game, k: int, cap: int | None = None) -> RepeatedGame:
    cap = caps.cap("power") if cap is None else cap
    if k < 1:
        raise InvalidSpec("k must be positive")
    m = game.size
    if m**k > cap:
        raise SearchSpaceTooLarge(f"|E|^k = {m}^{k} exceeds cap {cap}")
    grid = np.indices((m,) * k).reshape(k, -1).T  # lexicographic
    return RepeatedGame(game, k, tuple(tuple(int(e) for e in row) for row in grid))


def permutation_union(game: Game, k: int, z: int, seed: int = 0, identity_copies: int = 0) -> RepeatedGame:
    if z < 1:
        raise InvalidSpec("permutation-union needs z >= 1")
    if not 0 <= identity_copies <= z:
        raise InvalidSpec("identity_copies must lie in [0, z]")
    m = game.size
    tuples = []
    for c in range(z):
        if c < identity_copies:
            perms = [list(range(m))] * (k - 1)
        else:
            perms = [fisher_yates(m, derive_rng(seed, "perm-union", c, j)) for j in range(2, k + 1)]
        for e in range(m):
            tuples.append((e, *(p[e] for p in perms)))
    return RepeatedGame(game, k, tuple(tuples))


def apply_scheme(game: Game, spec: SchemeSpec, k: int) -> RepeatedGame:
    if spec.kind == "full-product":
        return full_power(game, k)
    if spec.kind == "permutation-union":
        return permutation_union(game, k, spec.z, spec.seed, spec.identity_copies)
    if spec.kind == "explicit":
        if spec.tuples is None:
            raise InvalidSpec("explicit scheme needs tuples")
        return RepeatedGame(game, k, spec.tuples)
    raise InvalidSpec(f"unknown scheme kind {spec.kind!r}")


def blowup(H: RepeatedGame) -> Fraction:
    if H.base.size == 0:
        raise InvalidSpec("blowup of an edgeless base game is undefined")
    return Fraction(len(H), H.base.size)


@dataclass(frozen=True)
class MarginalsReport:
    passed: bool
    z: Fraction
    counts: tuple[tuple[int, ...], ...]  # counts[j-1][e]
    offending: tuple[tuple[int, int, int], ...]  # (round j, edge e, count)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "z": self.z,
            "counts": [list(r) for r in self.counts],
            "offending": [list(o) for o in self.offending],
        }


def uniform_marginals_check(H: RepeatedGame) -> MarginalsReport:
    m = H.base.size
    z = blowup(H)
    counts = np.zeros((H.k, m), dtype=np.int64)
    for j in range(H.k):
        if len(H):
            counts[j] = np.bincount(H.array[:, j], minlength=m)
    offending = []
    for j in range(H.k):
        for e in range(m):
            if int(counts[j, e]) != z:
                offending.append((j + 1, e, int(counts[j, e])))
    return MarginalsReport(
        passed=not offending,
        z=z,
        counts=tuple(tuple(int(c) for c in row) for row in counts),
        offending=tuple(offending),
    )


def _answer_arrays(H: RepeatedGame, psi: RepStrategy) -> tuple[np.ndarray, np.ndarray]:
    a = np.empty((len(H), H.k), dtype=np.int64)
    b = np.empty((len(H), H.k), dtype=np.int64)
    cache_x: dict[Vertex, tuple[int, ...]] = {}
    cache_y: dict[Vertex, tuple[int, ...]] = {}
    for i, (xr, yr) in enumerate(zip(H.x_vertices, H.y_vertices)):
        xv = tuple(int(v) for v in xr)
        yv = tuple(int(v) for v in yr)
        if xv not in cache_x:
            cache_x[xv] = psi.answer_x(xv)
        if yv not in cache_y:
            cache_y[yv] = psi.answer_y(yv)
        a[i] = cache_x[xv]
        b[i] = cache_y[yv]
    return a, b


def round_wins(H: RepeatedGame, psi: RepStrategy) -> np.ndarray:
    """Boolean ``[tuple, round]``: does ``psi`` win that round of that tuple."""
    if len(H) == 0:
        return np.zeros((0, H.k), dtype=bool)
    a, b = _answer_arrays(H, psi)
    q = H.base.alphabet_size
    if a.min() < 0 or b.min() < 0 or a.max() >= q or b.max() >= q:
        raise InvalidSpec("strategy answers fall outside the alphabet")
    return H.base.allowed[H.array, a, b]


def winning_set(H: RepeatedGame, psi: RepStrategy, C: Iterable[int]) -> list[int]:
    """Indices of tuples on which ``psi`` wins every round in ``C`` (1-based)."""
    rounds = sorted(set(int(c) for c in C))
    for c in rounds:
        if not 1 <= c <= H.k:
            raise InvalidSpec(f"round {c} outside [1, {H.k}]")
    if not rounds:
        return list(range(len(H)))
    wins = round_wins(H, psi)
    ok = wins[:, [c - 1 for c in rounds]].all(axis=1)
    return [int(i) for i in np.nonzero(ok)[0]]


def validate_rep_strategy(H: RepeatedGame, psi: RepStrategy) -> None:
    for v in H.realized_x:
        if len(psi.answer_x(v)) != H.k:
            raise InvalidSpec(f"answer for {v} has wrong length")
    for v in H.realized_y:
        if len(psi.answer_y(v)) != H.k:
            raise InvalidSpec(f"answer for {v} has wrong length")


def vertices_of(H: RepeatedGame) -> tuple[Sequence[Vertex], Sequence[Vertex]]:
    return sorted(H.realized_x), sorted(H.realized_y)
