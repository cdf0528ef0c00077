from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcpforge.generators import random_regular_edges
from pcpforge.graphs import Graph, cycle
from pcpforge.nonsignal import (
    affected_set,
    check_nonsignaling_sensitivity,
    constant_rule,
    even_degree_rule,
    extract_ball,
    local_minimum_rule,
    random_color_rule,
    run_local,
)


def random_graph(n, d, seed):
    return Graph(n, tuple(random_regular_edges(n, d, random.Random(seed), simple=False)))


@settings(max_examples=25)
@given(st.integers(0, 10**6), st.sampled_from([(8, 3), (10, 4), (7, 2)]), st.integers(0, 2))
def test_affected_set_is_exactly_the_changed_views(seed, nd, t):
    g = random_graph(*nd, seed)
    for i in range(g.m):
        h = g.without_edge(i)
        changed = [v for v in range(g.n) if extract_ball(g, v, t) != extract_ball(h, v, t)]
        aff = affected_set(g, i, t)
        assert aff == changed
        assert len(aff) <= 2 * g.max_degree**t


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_outputs_change_only_inside_the_affected_set(seed):
    g = random_graph(10, 3, seed)
    alg = local_minimum_rule(2)
    for i in range(g.m):
        h = g.without_edge(i)
        aff = set(affected_set(g, i, 2))
        for s in range(3):
            x, y = run_local(alg, g, s), run_local(alg, h, s)
            assert {v for v in x if x[v] != y[v]} <= aff


@pytest.mark.parametrize("alg", [constant_rule(), even_degree_rule(), local_minimum_rule(1), local_minimum_rule(2), random_color_rule(2)])
def test_sensitivity_check_passes(alg):
    rep = check_nonsignaling_sensitivity(alg, random_graph(8, 3, 11), samples=6, seed=2)
    assert rep["pass"]
    assert rep["max_affected"] <= rep["bound"]
    assert all(r["emd"] <= r["coupling"] <= r["affected"] for r in rep["edges"])


def test_constant_rule_never_moves():
    rep = check_nonsignaling_sensitivity(constant_rule(), cycle(6), samples=4)
    assert rep["max_emd"] == 0 and rep["max_affected"] == 0


def test_even_degree_on_a_cycle():
    # deleting an edge of a cycle flips both endpoints to odd degree
    g = cycle(6)
    assert all(v == 1 for v in run_local(even_degree_rule(), g).values())
    rep = check_nonsignaling_sensitivity(even_degree_rule(), g, samples=2)
    assert all(r["emd"] == 2 for r in rep["edges"])


def test_ball_view():
    v = extract_ball(cycle(6), 0, 1)
    assert v.vertices == [0, 1, 5] and v.degree(0) == 2 and v.degree(1) == 1
