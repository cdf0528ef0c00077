from __future__ import annotations

import functools
import random
from collections import defaultdict
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcpforge.csp import Edge, Parity2, BOOLEAN, l1_distance, single_alphabet_instance, value
from pcpforge.errors import NotRegular, TooLarge
from pcpforge.generators import ones_cycle, random_regular_instance
from pcpforge.graphs import bfs, bsrw_kernel, discard_mass, enumerate_walks
from pcpforge.harness import perturb, random_assignment
from pcpforge.recovery import opinions, recover_power
from pcpforge.transforms.common import instance_graph
from pcpforge.transforms.powering import lift_power, power, walk_bound


def walk_oracle(inst, t, B, sigma):
    """Per (start, end) mass and the value of the ball-restricted sigma, walk by walk."""
    g, order, edge_map = instance_graph(inst)
    n = g.n
    mass = defaultdict(Fraction)
    good = Fraction(0)
    for s in range(n):
        ds = bfs(g, s, t)
        for walk, p in enumerate_walks(g, s, B, t):
            dw = bfs(g, walk.end, t)
            mass[(order[s], order[walk.end])] += p / n
            ok = True
            for a, b, j in walk.steps():
                if a in ds and b in dw:
                    e = inst.edges[edge_map[j]]
                    lab = {order[a]: sigma[order[a]], order[b]: sigma[order[b]]}
                    ok &= e.relation.accepts(tuple(lab[v] for v in e.vars))
            good += p / n if ok else 0
    return mass, good


@pytest.mark.parametrize("B", [0, 2, 4])
def test_exact_weights_match_walk_enumeration(B):
    inst, plant = random_regular_instance(4, 3, seed=3)
    rng = random.Random(B)
    sigma = {v: rng.randrange(2) for v in inst.variables}
    P = power(inst, 2, B=B)
    mass, good = walk_oracle(inst, 2, B, sigma)
    got = defaultdict(Fraction)
    for e in P.edges:
        got[e.vars] += e.mass
    assert dict(got) == {k: v for k, v in mass.items() if v}
    total = sum(e.mass for e in P.edges)
    assert total == 1 - discard_mass(2, B)
    assert value(P, lift_power(P, sigma)) == good / total


@pytest.mark.parametrize("n,t", [(4, 1), (4, 2), (8, 1)])
def test_total_weight_and_completeness(n, t):
    inst, plant = random_regular_instance(n, 3, seed=n + t)
    P = power(inst, t)
    B = walk_bound(t, 2)
    assert sum(e.mass for e in P.edges) == 1 - discard_mass(t, B)
    assert value(P, lift_power(P, plant)) == 1


def test_horizon_one_keeps_only_empty_walks():
    P = power(ones_cycle(8), 1)
    assert P.m == 8 and all(e.vars[0] == e.vars[1] and not e.relation.checks for e in P.edges)


def test_sampled_mode_is_replayable():
    inst, _ = random_regular_instance(4, 3, seed=1)
    a = power(inst, 2, "sampled", count=30, seed=5)
    b = power(inst, 2, "sampled", count=30, seed=5)
    assert a.m == 30 and a.edges == b.edges


def test_errors():
    inst = single_alphabet_instance(range(3), BOOLEAN, [Edge((0, 1), Parity2(1)), Edge((1, 2), Parity2(1))])
    with pytest.raises(NotRegular):
        power(inst, 2)
    big, _ = random_regular_instance(8, 3, seed=1)
    with pytest.raises(TooLarge):
        power(big, 2, cap=1000)
    with pytest.raises(ValueError):
        power(ones_cycle(4), 2, "sampled")


@functools.lru_cache(maxsize=None)
def powered_k4(which):
    inst, plant = random_regular_instance(4, 3, seed=which)
    g, _, _ = instance_graph(inst)
    return inst, plant, power(inst, 2), bsrw_kernel(g, 2)


@settings(max_examples=30)
@given(st.integers(0, 2), st.integers(0, 10**6))
def test_recovery_bounds_under_single_vertex_changes(which, seed):
    rng = random.Random(seed)
    inst, plant, P, K = powered_k4(which)
    s1 = lift_power(P, plant) if rng.random() < 0.5 else random_assignment(P, rng)
    s2 = perturb(P, s1, rng)
    o1, o2 = opinions(inst, K, s1), opinions(inst, K, s2)
    total = Fraction(0)
    for v in o1:
        assert o1[v].denominator >= Fraction(9, 10)
        d = l1_distance(o1[v].mu_star, o2[v].mu_star)
        assert d <= 4 * l1_distance(o1[v].mu, o2[v].mu)
        total += d
    assert total <= 8


def test_recovery_of_the_lift_is_the_source_assignment():
    inst, plant = random_regular_instance(8, 3, seed=4)
    P = power(inst, 1)
    g, _, _ = instance_graph(inst)
    rec = recover_power(inst, bsrw_kernel(g, 1), lift_power(P, plant))
    assert all(rec.marginal(v) == {plant[v]: 1} for v in inst.variables)
