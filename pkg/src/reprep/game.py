"""Two-prover games, strategies and exact/heuristic values.

A game is a bipartite multigraph on ``X = range(num_x)``, ``Y = range(num_y)``
whose edge entries each carry a set of allowed answer pairs. Values are
always :class:`fractions.Fraction` with denominator ``|E|``; every count is
taken over edge-multiset entries, so parallel edges are weighted by their
multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import caps
from .errors import (
    DimensionMismatch,
    EmptyGame,
    EmptyRectangle,
    IndexOutOfRange,
    InvalidGame,
    SearchSpaceTooLarge,
)
from .rng import derive_rng

Pair = tuple[int, int]


@dataclass(frozen=True)
class Game:
    num_x: int
    num_y: int
    alphabet_size: int
    edges: tuple[Pair, ...]
    constraints: tuple[frozenset[Pair], ...]
    # new index -> index in the parent game, set only by rect_subgame
    x_origin: tuple[int, ...] | None = field(default=None, compare=False, repr=False)
    y_origin: tuple[int, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.num_x < 1 or self.num_y < 1 or self.alphabet_size < 1:
            raise InvalidGame("num_x, num_y and alphabet_size must be positive")
        edges = tuple((int(x), int(y)) for x, y in self.edges)
        constraints = tuple(frozenset((int(a), int(b)) for a, b in c) for c in self.constraints)
        if len(edges) != len(constraints):
            raise InvalidGame(f"{len(edges)} edges but {len(constraints)} constraints")
        for x, y in edges:
            if not (0 <= x < self.num_x and 0 <= y < self.num_y):
                raise InvalidGame(f"edge ({x}, {y}) outside {self.num_x}x{self.num_y}")
        q = self.alphabet_size
        for c in constraints:
            for a, b in c:
                if not (0 <= a < q and 0 <= b < q):
                    raise InvalidGame(f"pair ({a}, {b}) outside alphabet of size {q}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "constraints", constraints)

    @classmethod
    def from_tables(cls, num_x, num_y, alphabet_size, edges, tables):
        """Build from per-edge boolean ``q x q`` tables."""
        constraints = [
            frozenset(zip(*np.nonzero(np.asarray(t, dtype=bool)))) for t in tables
        ]
        return cls(num_x, num_y, alphabet_size, tuple(edges), tuple(constraints))

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def size(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_x(self) -> np.ndarray:
        return np.array([x for x, _ in self.edges], dtype=np.int64)

    @cached_property
    def edge_y(self) -> np.ndarray:
        return np.array([y for _, y in self.edges], dtype=np.int64)

    @cached_property
    def allowed(self) -> np.ndarray:
        """Boolean array ``[edge, a, b]``."""
        q = self.alphabet_size
        table = np.zeros((len(self.edges), q, q), dtype=bool)
        for i, c in enumerate(self.constraints):
            for a, b in c:
                table[i, a, b] = True
        table.setflags(write=False)
        return table

    @cached_property
    def degrees_x(self) -> np.ndarray:
        return np.bincount(self.edge_x, minlength=self.num_x)

    @cached_property
    def degrees_y(self) -> np.ndarray:
        return np.bincount(self.edge_y, minlength=self.num_y)

    @property
    def max_degree(self) -> int:
        if not self.edges:
            return 0
        return int(max(self.degrees_x.max(), self.degrees_y.max()))

    @cached_property
    def multiplicity(self) -> np.ndarray:
        """``[x, y]`` -> number of edge entries between x and y."""
        m = np.zeros((self.num_x, self.num_y), dtype=np.int64)
        np.add.at(m, (self.edge_x, self.edge_y), 1)
        return m

    def transpose(self) -> "Game":
        """Swap the roles of the two provers."""
        return Game(
            self.num_y,
            self.num_x,
            self.alphabet_size,
            tuple((y, x) for x, y in self.edges),
            tuple(frozenset((b, a) for a, b in c) for c in self.constraints),
        )


@dataclass(frozen=True)
class Strategy:
    psi_x: tuple[int, ...]
    psi_y: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "psi_x", tuple(int(a) for a in self.psi_x))
        object.__setattr__(self, "psi_y", tuple(int(b) for b in self.psi_y))

    def check(self, game: Game) -> None:
        if len(self.psi_x) != game.num_x or len(self.psi_y) != game.num_y:
            raise DimensionMismatch(
                f"strategy is {len(self.psi_x)}x{len(self.psi_y)}, "
                f"game is {game.num_x}x{game.num_y}"
            )
        q = game.alphabet_size
        if any(not 0 <= a < q for a in self.psi_x + self.psi_y):
            raise DimensionMismatch(f"strategy uses symbols outside alphabet of size {q}")


@dataclass(frozen=True)
class ValueResult:
    value: Fraction
    witness: Strategy
    method: str  # "exact" | "local-search-lower-bound"


def satisfied_count(game: Game, s: Strategy) -> int:
    s.check(game)
    if not game.edges:
        return 0
    px = np.asarray(s.psi_x, dtype=np.int64)
    py = np.asarray(s.psi_y, dtype=np.int64)
    hits = game.allowed[np.arange(game.size), px[game.edge_x], py[game.edge_y]]
    return int(hits.sum())


def strategy_value(game: Game, s: Strategy) -> Fraction:
    if not game.edges:
        raise EmptyGame("value of an edgeless game is undefined")
    return Fraction(satisfied_count(game, s), game.size)


def _best_response_scan(game: Game, chunk_budget: int = 1 << 22):
    """Enumerate every X-labeling; answer each y optimally.

    Given psi_x the Y-side decouples, so the exact value is
    ``max_psi_x sum_y max_b #{edges (x, y): (psi_x(x), b) allowed}``.
    Returns (best count, psi_x, psi_y). Ties go to the lexicographically
    smallest psi_x (vertex 0 most significant) and the smallest b.
    """
    q, nx, ny, m = game.alphabet_size, game.num_x, game.num_y, game.size
    incidence = np.zeros((m, ny), dtype=np.int32)
    incidence[np.arange(m), game.edge_y] = 1
    allowed = game.allowed.astype(np.int32)
    total = q**nx
    powers = q ** np.arange(nx - 1, -1, -1, dtype=np.int64)
    batch = max(1, chunk_budget // max(1, m * q))
    best = (-1, None, None)
    for start in range(0, total, batch):
        idx = np.arange(start, min(total, start + batch), dtype=np.int64)
        labels = (idx[:, None] // powers[None, :]) % q  # (B, nx)
        # rows[b, e, :] = allowed[e, labels[b, x_e], :]
        rows = allowed[np.arange(m)[None, :], labels[:, game.edge_x]]  # (B, m, q)
        scores = np.einsum("bmq,my->byq", rows, incidence)  # (B, ny, q)
        totals = scores.max(axis=2).sum(axis=1)
        b = int(np.argmax(totals))
        if totals[b] > best[0]:
            psi_y = tuple(int(v) for v in scores[b].argmax(axis=1))
            best = (int(totals[b]), tuple(int(v) for v in labels[b]), psi_y)
    return best


def value_exact(game: Game, cap: int | None = None) -> ValueResult:
    """Exact value by exhaustive search over the smaller prover's labelings."""
    if not game.edges:
        raise EmptyGame("value of an edgeless game is undefined")
    cap = caps.cap("strategy") if cap is None else cap
    q = game.alphabet_size
    if q ** (game.num_x + game.num_y) > cap:
        raise SearchSpaceTooLarge(
            f"{q}^{game.num_x + game.num_y} strategies exceeds cap {cap}"
        )
    if game.num_y < game.num_x:
        count, psi_y, psi_x = _best_response_scan(game.transpose())
    else:
        count, psi_x, psi_y = _best_response_scan(game)
    return ValueResult(Fraction(count, game.size), Strategy(psi_x, psi_y), "exact")


def value_local_search(game: Game, restarts: int = 16, seed: int = 0) -> ValueResult:
    """Random-restart hill climbing over single-vertex symbol changes.

    Each restart starts from a uniformly random labeling, takes the first
    improving move in (X vertices, then Y vertices, symbols ascending) order,
    and stops at a local optimum. Returns the best labeling seen.
    """
    if not game.edges:
        raise EmptyGame("value of an edgeless game is undefined")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    q, nx, ny = game.alphabet_size, game.num_x, game.num_y
    allowed = game.allowed
    inc_x = [[] for _ in range(nx)]
    inc_y = [[] for _ in range(ny)]
    for e, (x, y) in enumerate(game.edges):
        inc_x[x].append((e, y))
        inc_y[y].append((e, x))

    def gain_x(px, py, x, a):
        return sum(int(allowed[e, a, py[y]]) for e, y in inc_x[x])

    def gain_y(px, py, y, b):
        return sum(int(allowed[e, px[x], b]) for e, x in inc_y[y])

    best_count, best = -1, None
    for r in range(restarts):
        rng = derive_rng(seed, "local-search", r)
        px = [int(v) for v in rng.integers(0, q, size=nx)]
        py = [int(v) for v in rng.integers(0, q, size=ny)]
        improved = True
        while improved:
            improved = False
            for x in range(nx):
                cur = gain_x(px, py, x, px[x])
                for a in range(q):
                    if a != px[x] and gain_x(px, py, x, a) > cur:
                        px[x] = a
                        improved = True
                        break
                if improved:
                    break
            if improved:
                continue
            for y in range(ny):
                cur = gain_y(px, py, y, py[y])
                for b in range(q):
                    if b != py[y] and gain_y(px, py, y, b) > cur:
                        py[y] = b
                        improved = True
                        break
                if improved:
                    break
        s = Strategy(px, py)
        count = satisfied_count(game, s)
        if count > best_count:
            best_count, best = count, s
    return ValueResult(Fraction(best_count, game.size), best, "local-search-lower-bound")


def rect_subgame(game: Game, S: Iterable[int], T: Iterable[int]) -> Game:
    """The game on edges with both endpoints in ``S x T``, reindexed.

    ``x_origin``/``y_origin`` on the result map new indices back to ``game``.
    """
    S = sorted(set(int(x) for x in S))
    T = sorted(set(int(y) for y in T))
    if not S or not T:
        raise EmptyRectangle("rectangle sides must be nonempty")
    for x in S:
        if not 0 <= x < game.num_x:
            raise IndexOutOfRange(f"x={x} outside [0, {game.num_x})")
    for y in T:
        if not 0 <= y < game.num_y:
            raise IndexOutOfRange(f"y={y} outside [0, {game.num_y})")
    xi = {x: i for i, x in enumerate(S)}
    yi = {y: i for i, y in enumerate(T)}
    keep = [i for i, (x, y) in enumerate(game.edges) if x in xi and y in yi]
    if not keep:
        raise EmptyRectangle(f"no edge inside {S} x {T}")
    return Game(
        len(S),
        len(T),
        game.alphabet_size,
        tuple((xi[game.edges[i][0]], yi[game.edges[i][1]]) for i in keep),
        tuple(game.constraints[i] for i in keep),
        x_origin=tuple(S),
        y_origin=tuple(T),
    )


def induced_subgame(game: Game, edge_indices: Sequence[int]) -> Game:
    """Same vertices and alphabet, edge multiset restricted to ``edge_indices``."""
    idx = [int(i) for i in edge_indices]
    for i in idx:
        if not 0 <= i < game.size:
            raise IndexOutOfRange(f"edge index {i} outside [0, {game.size})")
    return Game(
        game.num_x,
        game.num_y,
        game.alphabet_size,
        tuple(game.edges[i] for i in idx),
        tuple(game.constraints[i] for i in idx),
    )


def lift_strategy(sub: Game, s: Strategy, parent: Game, fill: int = 0) -> Strategy:
    """Extend a strategy on ``rect_subgame`` output back to the parent game."""
    if sub.x_origin is None or sub.y_origin is None:
        raise ValueError("game was not produced by rect_subgame")
    px = [fill] * parent.num_x
    py = [fill] * parent.num_y
    for i, x in enumerate(sub.x_origin):
        px[x] = s.psi_x[i]
    for j, y in enumerate(sub.y_origin):
        py[y] = s.psi_y[j]
    return Strategy(px, py)
