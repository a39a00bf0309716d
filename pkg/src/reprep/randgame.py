"""Random regular games: unions of random perfect matchings with random
exact-density constraints, and empirical checks of their properties."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import InvalidDensity
from .fortify import (
    HypothesisReport,
    check_regular_parallel,
    fortification_check,
    mixing_check,
)
from .game import Game, value_exact
from .rng import derive_rng, fisher_yates, random_subset


@dataclass(frozen=True)
class RandomGameParams:
    t: int
    d: int
    alphabet_size: int
    beta: Fraction
    eta: Fraction = Fraction(1, 4)
    delta: Fraction = Fraction(1, 3)
    seed: int = 0

    def __post_init__(self):
        if self.t < 1 or self.d < 1 or self.alphabet_size < 1:
            raise ValueError("t, d and alphabet_size must be positive")
        for name in ("beta", "eta", "delta"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    @property
    def in_lemma_regime(self) -> bool:
        """Whether beta < 1/2 and d > 4(1 + ln|Sigma|)/(eta^2 delta^2)."""
        need = 4 * (1 + math.log(self.alphabet_size)) / float(self.eta**2 * self.delta**2)
        return 0 < self.beta < Fraction(1, 2) and self.d > need


def sample_matching_union(t: int, d: int, seed: int) -> list[tuple[int, int]]:
    """Multiset union of ``d`` uniform perfect matchings of ``[t] x [t]``.

    Matching ``j`` is ``x -> perm_j[x]`` with ``perm_j`` drawn by Fisher-Yates
    from the stream ``(seed, "matching", j)``; entries are listed matching by
    matching, ``x`` ascending.
    """
    if t < 1 or d < 1:
        raise ValueError("t and d must be positive")
    edges = []
    for j in range(d):
        perm = fisher_yates(t, derive_rng(seed, "matching", j))
        edges.extend((x, perm[x]) for x in range(t))
    return edges


def constraint_size(alphabet_size: int, beta) -> int:
    """round(beta * q^2), halves rounded up."""
    beta = Fraction(beta)
    q2 = alphabet_size**2
    m = math.floor(beta * q2 + Fraction(1, 2))
    if not 0 <= m <= q2:
        raise InvalidDensity(f"density {beta} gives {m} of {q2} pairs")
    return m


def random_constraints(count: int, alphabet_size: int, beta, seed: int, stream: str = "constraint"):
    q = alphabet_size
    m = constraint_size(q, beta)
    out = []
    for i in range(count):
        picks = random_subset(q * q, m, derive_rng(seed, stream, i))
        out.append(frozenset((p // q, p % q) for p in picks))
    return out


def sample_random_game(params: RandomGameParams) -> Game:
    if not 0 <= params.beta <= 1:
        raise InvalidDensity(f"beta={params.beta} outside [0, 1]")
    edges = sample_matching_union(params.t, params.d, params.seed)
    constraints = random_constraints(len(edges), params.alphabet_size, params.beta, params.seed)
    return Game(params.t, params.t, params.alphabet_size, tuple(edges), tuple(constraints))


def verify_random_game(game: Game, params: RandomGameParams, mode: str = "exact", seed: int = 0) -> HypothesisReport:
    """The four random-game properties at ``(delta, eta)``.

    1. regular with at most ``200 d^2`` parallel edges;
    2. rectangle densities within ``eta`` (relative) of ``d/t``;
    3. ``val(G) <= beta + eta``;
    4. ``(delta, 2 eta)``-fortified.
    """
    reg = check_regular_parallel(game, bound=200 * params.d**2)
    mix = mixing_check(game, params.delta, params.eta, mode=mode, seed=seed) if reg.regular else None
    val = value_exact(game)
    fort = fortification_check(game, params.delta, 2 * params.eta, mode=mode, seed=seed, base_value=val)
    return HypothesisReport(
        delta=params.delta,
        eps=params.eta,
        regular=reg,
        mixing=mix,
        value=val.value,
        value_bound=params.beta + params.eta,
        value_pass=val.value <= params.beta + params.eta,
        fortification=fort,
        notes=() if params.in_lemma_regime else ("outside the lemma's d > 4(1+ln q)/(eta delta)^2 regime",),
    )


@dataclass(frozen=True)
class ConcentrationReport:
    t: int
    d: int
    z_size: int
    mu: Fraction
    rho: Fraction
    trials: int
    violations: int
    empirical_violation_rate: Fraction
    mean_count: Fraction
    degenerate: bool
    exponent: float  # rho^2 mu^2 d t, the lemma's exp(-Omega(.)) argument
    counts: tuple[int, ...] = field(repr=False, default=())

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "d": self.d,
            "z_size": self.z_size,
            "mu": self.mu,
            "rho": self.rho,
            "trials": self.trials,
            "violations": self.violations,
            "empirical_violation_rate": self.empirical_violation_rate,
            "mean_count": self.mean_count,
            "degenerate": self.degenerate,
            "exponent": self.exponent,
        }


def concentration_experiment(t: int, d: int, Z: Iterable[tuple[int, int]], rho, trials: int, seed: int) -> ConcentrationReport:
    """How often ``| |union M^j & Z| - mu d t | > rho mu d t`` over fresh samples.

    The union is counted as a multiset, matching ``E[|union & Z|] = mu d t``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rho = Fraction(rho)
    zset = set()
    for x, y in Z:
        if not (0 <= x < t and 0 <= y < t):
            raise ValueError(f"pair ({x}, {y}) outside [{t}]x[{t}]")
        zset.add((int(x), int(y)))
    mu = Fraction(len(zset), t * t)
    center = mu * d * t
    slack = rho * center
    counts = []
    violations = 0
    for trial in range(trials):
        edges = sample_matching_union(t, d, derive_rng(seed, "concentration", trial).integers(0, 2**62))
        c = sum(1 for e in edges if e in zset)
        counts.append(c)
        if abs(c - center) > slack:
            violations += 1
    return ConcentrationReport(
        t=t,
        d=d,
        z_size=len(zset),
        mu=mu,
        rho=rho,
        trials=trials,
        violations=violations,
        empirical_violation_rate=Fraction(violations, trials),
        mean_count=Fraction(sum(counts), trials),
        degenerate=len(zset) == 0,
        exponent=float(rho**2 * mu**2 * d * t),
        counts=tuple(counts),
    )


def rectangle_pairs(rows: Iterable[int], cols: Iterable[int]) -> list[tuple[int, int]]:
    return [(x, y) for x in rows for y in cols]
