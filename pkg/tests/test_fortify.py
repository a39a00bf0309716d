import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reprep.errors import EpsOutOfRange, NotRegular, SearchSpaceTooLarge
from reprep.fixtures import all_empty, all_full, chsh, complete_edges
from reprep.fortify import (
    check_regular_parallel,
    delta_star,
    fortification_check,
    log2_squared,
    min_side,
    mixing_check,
    rectangle_deviation,
    theorem_hypotheses,
)
from reprep.game import Game, rect_subgame, strategy_value, value_exact
from reprep.randgame import sample_matching_union
from oracles import brute_fortification_worst, brute_mixing_worst, brute_rect_value
from strategies import games

FULL = frozenset({(0, 0), (0, 1), (1, 0), (1, 1)})


def graph(n, edges, q=2):
    return Game(n, n, q, tuple(edges), tuple(FULL for _ in edges))


def regular_games():
    return st.builds(
        lambda t, d, seed: graph(t, sample_matching_union(t, d, seed)),
        st.integers(1, 5),
        st.integers(1, 3),
        st.integers(0, 10**6),
    )


# ---------------------------------------------------------------- regularity


def test_complete_bipartite_is_simple_regular():
    rep = check_regular_parallel(all_full(3, 3), epsilon=0)
    assert tuple(rep) == (True, 3, 0)


def test_triplicated_edge():
    g = Game(1, 1, 2, ((0, 0),) * 3, (FULL,) * 3)
    rep = check_regular_parallel(g, epsilon=0)
    assert rep.parallel_count == 2 and not rep.passed


def test_matching_union_parallel_count():
    edges = sample_matching_union(6, 3, 42)
    rep = check_regular_parallel(graph(6, edges), epsilon=1)
    recount = sum(max(0, edges.count(e) - 1) for e in set(edges))
    assert rep.d == 3 and rep.parallel_count == recount == 4


def test_irregular_graph_reports_no_degree():
    g = graph(2, [(0, 0), (0, 1), (1, 1)])
    assert tuple(check_regular_parallel(g, epsilon=1)) == (False, None, 0)
    with pytest.raises(NotRegular):
        mixing_check(g, Fraction(1, 2), 0)


# ---------------------------------------------------------------- mixing


@pytest.mark.parametrize("delta", [Fraction(1, 4), Fraction(1, 2), 1])
def test_complete_graph_mixes_perfectly(delta):
    rep = mixing_check(all_full(4, 4), delta, 0)
    assert rep.passed and rep.worst_deviation == 0


def test_single_matching_fails():
    g = graph(4, [(i, i) for i in range(4)])
    rep = mixing_check(g, Fraction(1, 2), Fraction(1, 2))
    assert rep.passed is False and rep.worst_deviation >= 1
    assert brute_mixing_worst(4, 4, g.edges, 1, 2, 2) == rep.worst_deviation


def test_five_matchings_worst_deviation():
    g = graph(6, sample_matching_union(6, 5, 42))
    rep = mixing_check(g, Fraction(1, 3), Fraction(1, 4))
    assert rep.worst_deviation == Fraction(11, 10) == brute_mixing_worst(6, 6, g.edges, 5, 2, 2)
    assert not rep.passed
    assert rectangle_deviation(g, rep.worst_S, rep.worst_T, 5) == rep.worst_deviation


def test_sampled_mixing_is_refute_only():
    rep = mixing_check(all_full(4, 4), Fraction(1, 2), 0, mode="sampled", samples=50)
    assert rep.refute_only and rep.passed is None
    bad = mixing_check(graph(4, [(i, i) for i in range(4)]), Fraction(1, 2), 0, mode="sampled", samples=50)
    assert bad.passed is False


def test_exhaustive_mixing_respects_cap():
    with pytest.raises(SearchSpaceTooLarge):
        mixing_check(all_full(4, 4), Fraction(1, 2), 0, mode="exhaustive", cap=8)


@settings(max_examples=40)
@given(regular_games(), st.sampled_from([Fraction(1, 5), Fraction(1, 3), Fraction(1, 2)]))
def test_mixing_matches_brute_force(g, delta):
    d = len(g.edges) // g.num_x
    rep = mixing_check(g, delta, Fraction(1, 4))
    lo = min_side(delta, g.num_x)
    assert rep.worst_deviation == brute_mixing_worst(g.num_x, g.num_y, g.edges, d, lo, lo)
    assert rep.passed == (rep.worst_deviation <= Fraction(1, 4))


@settings(max_examples=30)
@given(regular_games())
def test_single_vertex_rectangles(g):
    d = len(g.edges) // g.num_x
    rep = mixing_check(g, Fraction(1, g.num_x), 0)
    direct = max(
        abs(Fraction(g.edges.count((x, y)) * g.num_y, d) - 1)
        for x in range(g.num_x)
        for y in range(g.num_y)
    )
    assert rep.worst_deviation >= direct
    for x in range(g.num_x):
        for y in range(g.num_y):
            dev = rectangle_deviation(g, [x], [y], d)
            assert dev == abs(Fraction(g.edges.count((x, y)) * g.num_y, d) - 1)


# ---------------------------------------------------------------- fortification


def test_all_full_is_fortified():
    rep = fortification_check(all_full(3, 3), Fraction(1, 3), Fraction(1, 100))
    assert rep.passed and rep.worst_value == 1


def test_chsh_witness():
    rep = fortification_check(chsh(), Fraction(1, 2), Fraction(1, 10))
    assert rep.passed is False
    assert (rep.worst_S, rep.worst_T, rep.worst_value) == ((0,), (0,), 1)
    assert rep.base_value == Fraction(3, 4)
    sub = rect_subgame(chsh(), rep.worst_S, rep.worst_T)
    assert value_exact(sub).value == 1 == strategy_value(sub, rep.witness)


def test_edgeless_rectangles_skipped():
    g = Game(2, 2, 2, ((0, 0),), (frozenset({(0, 0)}),))
    rep = fortification_check(g, Fraction(1, 2), Fraction(1, 10))
    assert rep.skipped_edgeless == 5 and rep.passed


def test_all_empty_never_fails():
    rep = fortification_check(all_empty(), Fraction(1, 2), Fraction(1, 100))
    assert rep.passed and rep.worst_value == 0


def test_sampled_fortification_refute_only():
    rep = fortification_check(all_full(), Fraction(1, 2), Fraction(1, 10), mode="sampled", samples=20)
    assert rep.refute_only and rep.passed is None
    bad = fortification_check(chsh(), Fraction(1, 2), Fraction(1, 10), mode="sampled", samples=40)
    assert bad.passed is False and bad.worst_value == 1


@settings(max_examples=60)
@given(games(max_side=3, max_q=2, max_edges=6), st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), 1]))
def test_fortification_matches_brute_force(g, delta):
    rep = fortification_check(g, delta, Fraction(1, 10))
    worst = brute_fortification_worst(
        g.num_x, g.num_y, g.alphabet_size, g.edges, g.constraints,
        min_side(delta, g.num_x), min_side(delta, g.num_y),
    )
    assert rep.worst_value == worst[0]
    assert rep.passed == (worst[0] <= rep.base_value + Fraction(1, 10))
    # the reported witness re-checks to the same value, independently
    assert brute_rect_value(g.alphabet_size, g.edges, g.constraints, set(rep.worst_S), set(rep.worst_T)) == rep.worst_value
    sub = rect_subgame(g, rep.worst_S, rep.worst_T)
    assert value_exact(sub).value == rep.worst_value == strategy_value(sub, rep.witness)


@settings(max_examples=40)
@given(
    games(max_side=3, max_q=2, max_edges=6),
    st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)]),
    st.sampled_from([0, Fraction(1, 10), Fraction(1, 4)]),
    st.sampled_from([0, Fraction(1, 3)]),
    st.sampled_from([0, Fraction(1, 10)]),
)
def test_fortification_monotone(g, delta, eps, d_delta, d_eps):
    if fortification_check(g, delta, eps).passed:
        assert fortification_check(g, min(1, delta + d_delta), eps + d_eps).passed


# ---------------------------------------------------------------- theorem bundle


@pytest.mark.parametrize(
    "phi, expected",
    [(4, Fraction(1, 256)), (1, Fraction(1, 16)), (2, Fraction(1, 32)), (8, Fraction(1, 1152)), (64, Fraction(1, 36864))],
)
def test_delta_star_exact(phi, expected):
    assert delta_star(phi) == (expected, True)


def test_delta_star_inexact_is_conservative():
    d, exact = delta_star(3)
    assert not exact
    assert d <= 1 / (16 * 3 * math.log2(3) ** 2)
    sq, _ = log2_squared(3)
    assert sq >= Fraction(math.log2(3)) ** 2


def test_log2_rejects_small_phi():
    with pytest.raises(ValueError):
        log2_squared(Fraction(1, 2))


def test_eps_range():
    for bad in (0, Fraction(1, 23), Fraction(1, 2), -1):
        with pytest.raises(EpsOutOfRange):
            theorem_hypotheses(chsh(), 4, bad)


def test_all_full_value_fails():
    rep = theorem_hypotheses(all_full(), 1, Fraction(1, 32))
    assert rep.value == 1 and rep.value_bound == Fraction(3, 8) and not rep.value_pass
    assert not rep.passed


def test_theorem_hypotheses_deterministic():
    g = Game(4, 4, 2, complete_edges(4, 4), tuple(frozenset({(0, 1), (1, 0)}) for _ in range(16)))
    a = theorem_hypotheses(g, 4, Fraction(1, 100))
    b = theorem_hypotheses(g, 4, Fraction(1, 100))
    assert a == b and a.to_dict() == b.to_dict()
    assert a.delta == Fraction(1, 256)
    assert a.regular_pass and a.mixing_pass


def test_irregular_bundle_notes():
    g = Game(2, 2, 2, ((0, 0), (0, 1), (1, 1)), (FULL,) * 3)
    rep = theorem_hypotheses(g, 4, Fraction(1, 100))
    assert rep.mixing is None and not rep.regular_pass and rep.notes
