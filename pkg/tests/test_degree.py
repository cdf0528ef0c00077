from __future__ import annotations

import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcpforge.csp import Edge, Parity2, single_alphabet_instance, BOOLEAN, hamming, swap_constraint, swap_distance, tv_distance, value
from pcpforge.errors import ExpanderNotFound, NonBinaryInstance, TooLarge
from pcpforge.generators import ones_cycle, random_regular_instance
from pcpforge.harness import expected_value, perturb
from pcpforge.oracles import default_swap
from pcpforge.recovery import recover_degree
from pcpforge.transforms.degree import degree_reduce, lift_degree, materialize


def endpoint_degrees(instance):
    # count endpoints directly; a self-loop contributes two
    c = Counter()
    for e in instance.edges:
        for v in e.vars:
            c[v] += e.mult
    return c


def test_ones_cycle_clouds():
    out, cm = degree_reduce(ones_cycle(4), 4, seed=0)
    assert all(cm.size(v) == 2 for v in range(1, 5))
    assert set(endpoint_degrees(out).values()) == {5}
    assert out.m == 5 * 4


@given(st.sampled_from([4, 6, 8, 10, 12]), st.integers(0, 10**6))
def test_output_is_regular_with_exact_edge_count(n, seed):
    inst, plant = random_regular_instance(n, 3, seed=seed)
    d0 = 4
    out, cm = degree_reduce(inst, d0, seed)
    assert set(endpoint_degrees(out).values()) == {d0 + 1}
    assert out.m == (d0 + 1) * inst.m
    assert value(out, lift_degree(cm, plant)) == 1


@given(st.integers(0, 10**6))
def test_instance_sensitivity_is_one(seed):
    inst, _ = random_regular_instance(8, 3, seed=seed)
    i = random.Random(seed).randrange(inst.m)
    other = swap_constraint(inst, i, default_swap(inst, i))
    a, _ = degree_reduce(inst, 4, seed)
    b, _ = degree_reduce(other, 4, seed)
    assert swap_distance(a, b) == 1


@given(st.integers(0, 10**6), st.integers(1, 4))
def test_recovery_tv_is_at_most_flips_over_cloud_size(seed, flips):
    rng = random.Random(seed)
    inst, plant = random_regular_instance(8, 3, seed=seed)
    out, cm = degree_reduce(inst, 4, seed)
    s1 = {v: rng.randrange(2) for v in out.variables}
    s2 = dict(s1)
    for _ in range(flips):
        s2 = perturb(out, s2, rng)
    h = hamming(s1, s2)
    r1, r2 = recover_degree(cm, s1), recover_degree(cm, s2)
    tv = sum(tv_distance(r1.marginal(v), r2.marginal(v)) for v in inst.variables)
    assert tv <= Fraction(h, 3)


def test_single_flip_moves_one_third():
    inst, plant = random_regular_instance(6, 3, seed=2)
    out, cm = degree_reduce(inst, 4, 0)
    s = lift_degree(cm, plant)
    c = cm.clouds[0][0]
    t = dict(s)
    t[c] ^= 1
    r1, r2 = recover_degree(cm, s), recover_degree(cm, t)
    assert tv_distance(r1.marginal(0), r2.marginal(0)) == Fraction(1, 3)
    assert expected_value(inst, r1) == 1


def test_materialize_weights():
    inst = single_alphabet_instance(
        range(2), BOOLEAN, [Edge((0, 1), Parity2(1), Fraction(1, 2)), Edge((0, 1), Parity2(0), Fraction(1, 3))]
    )
    mat = materialize(inst)
    assert [e.mult for e in mat.edges] == [3, 2]
    with pytest.raises(TooLarge):
        materialize(inst, cap=4)
    out, cm = degree_reduce(inst, 4)
    assert out.m == 5 * 5


def test_errors():
    from pcpforge.csp import Parity

    inst = single_alphabet_instance(range(3), BOOLEAN, [Edge((0, 1, 2), Parity(0, 3))])
    with pytest.raises(NonBinaryInstance):
        degree_reduce(inst, 4)
    # a single-vertex cloud with an odd expander degree
    single = single_alphabet_instance(range(2), BOOLEAN, [Edge((0, 1), Parity2(1))])
    with pytest.raises(ExpanderNotFound):
        degree_reduce(single, 3)
