"""Named small games used across tests, examples and the CLI."""

from __future__ import annotations

from .game import Game
from .randgame import random_constraints

PLANT8_SEED = 17
PLANT8_ROWS = (0, 1)
PLANT8_COLS = (0, 1)


def complete_edges(nx: int, ny: int) -> tuple[tuple[int, int], ...]:
    return tuple((x, y) for x in range(nx) for y in range(ny))


def chsh() -> Game:
    """X = Y = Sigma = {0, 1}, all four edges, a xor b = x * y."""
    edges = complete_edges(2, 2)
    cons = [frozenset((a, b) for a in range(2) for b in range(2) if a ^ b == x * y) for x, y in edges]
    return Game(2, 2, 2, edges, tuple(cons))


def all_full(nx: int = 2, ny: int = 2, q: int = 2) -> Game:
    full = frozenset((a, b) for a in range(q) for b in range(q))
    edges = complete_edges(nx, ny)
    return Game(nx, ny, q, edges, (full,) * len(edges))


def all_empty(nx: int = 2, ny: int = 2, q: int = 2) -> Game:
    edges = complete_edges(nx, ny)
    return Game(nx, ny, q, edges, (frozenset(),) * len(edges))


def plant8() -> Game:
    """8x8 complete bipartite, binary alphabet, one planted all-full 2x2 block.

    Edges are listed x-major. Outside rows {0,1} x cols {0,1} each edge
    allows exactly one of the four answer pairs, drawn with seed 17.
    """
    edges = complete_edges(8, 8)
    cons = random_constraints(len(edges), 2, "1/4", PLANT8_SEED)
    full = frozenset((a, b) for a in range(2) for b in range(2))
    cons = [full if x in PLANT8_ROWS and y in PLANT8_COLS else c for (x, y), c in zip(edges, cons)]
    return Game(8, 8, 2, edges, tuple(cons))


FIXTURES = {"chsh": chsh, "plant8": plant8, "all-full": all_full, "all-empty": all_empty}
