from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reprep.errors import InvalidSpec, SearchSpaceTooLarge, UndefinedVertex
from reprep.fixtures import all_full, chsh
from reprep.game import Strategy, strategy_value
from reprep.repetition import (
    RepeatedGame,
    RepStrategy,
    SchemeSpec,
    apply_scheme,
    blowup,
    full_power,
    permutation_union,
    product_strategy,
    uniform_marginals_check,
    winning_set,
)
from strategies import games


def test_full_power_examples():
    g = chsh()
    H1 = full_power(g, 1)
    assert H1.tuples == tuple((e,) for e in range(4)) and blowup(H1) == 1
    H2 = full_power(g, 2)
    assert len(H2) == 16 and blowup(H2) == 4
    assert list(H2.tuples) == sorted(H2.tuples)
    with pytest.raises(SearchSpaceTooLarge):
        full_power(g, 11)


def test_questions_follow_edges():
    g = chsh()
    H = full_power(g, 2)
    assert H.questions(7) == ((g.edges[1][0], g.edges[3][0]), (g.edges[1][1], g.edges[3][1]))


def test_invalid_tuples_rejected():
    with pytest.raises(InvalidSpec):
        RepeatedGame(chsh(), 2, ((0, 4),))
    with pytest.raises(InvalidSpec):
        RepeatedGame(chsh(), 2, ((0,),))


def test_permutation_union_identity_copy():
    H = permutation_union(chsh(), 3, 1, seed=0, identity_copies=1)
    assert H.tuples == tuple((e, e, e) for e in range(4))
    assert len(H) == 4


def test_permutation_union_z3_seed7():
    H = apply_scheme(chsh(), SchemeSpec("permutation-union", z=3, seed=7), 2)
    assert len(H) == 12
    assert uniform_marginals_check(H).passed


def test_apply_scheme_full_product_matches_full_power():
    g = chsh()
    assert apply_scheme(g, SchemeSpec("full-product"), 2) == full_power(g, 2)


def test_apply_scheme_errors():
    with pytest.raises(InvalidSpec):
        apply_scheme(chsh(), SchemeSpec("permutation-union", z=0), 2)
    with pytest.raises(InvalidSpec):
        apply_scheme(chsh(), SchemeSpec("bogus"), 2)
    with pytest.raises(InvalidSpec):
        apply_scheme(chsh(), SchemeSpec("explicit"), 2)


def test_blowup_examples():
    g = chsh()
    assert blowup(full_power(g, 2)) == 4
    assert blowup(permutation_union(g, 2, 3)) == 3
    assert blowup(RepeatedGame(g, 2, ((0, 0),))) == Fraction(1, 4)


def test_marginals_examples():
    g = chsh()
    rep = uniform_marginals_check(full_power(g, 2))
    assert rep.passed and all(c == 4 for row in rep.counts for c in row)
    bad = uniform_marginals_check(RepeatedGame(g, 2, ((0, 0),)))
    assert not bad.passed
    assert (1, 1, 0) in bad.offending
    two = uniform_marginals_check(permutation_union(g, 2, 2, seed=5))
    assert two.passed and all(c == 2 for row in two.counts for c in row)


def test_winning_set_examples():
    g = chsh()
    H = full_power(g, 2)
    zero = product_strategy(H, Strategy((0, 0), (0, 0)))
    assert winning_set(H, zero, []) == list(range(16))
    won = winning_set(H, zero, [1])
    assert won == [t for t in range(16) if H.tuples[t][0] != 3]
    assert len(won) == 12
    Hf = full_power(all_full(), 2)
    any_s = product_strategy(Hf, Strategy((1, 0), (0, 1)))
    assert winning_set(Hf, any_s, [1, 2]) == list(range(16))


def test_winning_set_errors():
    g = chsh()
    H = full_power(g, 2)
    with pytest.raises(UndefinedVertex):
        winning_set(H, RepStrategy(2, {}, {}), [1])
    with pytest.raises(InvalidSpec):
        winning_set(H, product_strategy(H, Strategy((0, 0), (0, 0))), [3])


@settings(max_examples=30)
@given(games(max_side=2, max_q=2, max_edges=4), st.integers(1, 3), st.data())
def test_product_strategy_winning_count(g, k, data):
    H = full_power(g, k)
    px = data.draw(st.lists(st.integers(0, g.alphabet_size - 1), min_size=g.num_x, max_size=g.num_x))
    py = data.draw(st.lists(st.integers(0, g.alphabet_size - 1), min_size=g.num_y, max_size=g.num_y))
    s = Strategy(px, py)
    won = winning_set(H, product_strategy(H, s), range(1, k + 1))
    assert len(won) == (strategy_value(g, s) * g.size) ** k


@settings(max_examples=40)
@given(games(max_edges=6), st.integers(1, 4), st.integers(1, 4), st.integers(0, 10**6))
def test_permutation_union_always_uniform(g, k, z, seed):
    H = permutation_union(g, k, z, seed)
    rep = uniform_marginals_check(H)
    assert rep.passed and rep.z == z
    for row in rep.counts:
        assert sum(row) == len(H)


@settings(max_examples=30)
@given(games(max_side=2, max_q=2, max_edges=4), st.integers(2, 3), st.data())
def test_winning_set_monotone(g, k, data):
    H = full_power(g, k)
    answers_x = {v: tuple(data.draw(st.integers(0, g.alphabet_size - 1)) for _ in range(k)) for v in sorted(H.realized_x)}
    answers_y = {v: tuple(data.draw(st.integers(0, g.alphabet_size - 1)) for _ in range(k)) for v in sorted(H.realized_y)}
    psi = RepStrategy(k, answers_x, answers_y)
    C = data.draw(st.sets(st.integers(1, k)))
    C2 = C | data.draw(st.sets(st.integers(1, k)))
    assert set(winning_set(H, psi, C2)) <= set(winning_set(H, psi, C))


@settings(max_examples=30)
@given(games(max_edges=4), st.integers(1, 2))
def test_mutating_one_tuple_breaks_marginals(g, k):
    H = full_power(g, k)
    if g.size < 2:
        return
    t = list(H.tuples[0])
    t[0] = (t[0] + 1) % g.size
    mutated = RepeatedGame(g, k, (tuple(t),) + H.tuples[1:])
    assert not uniform_marginals_check(mutated).passed


def test_full_power_lexicographic_and_complete():
    g = all_full(1, 2, 2)
    H = full_power(g, 3)
    assert H.tuples == tuple(product(range(2), repeat=3))
