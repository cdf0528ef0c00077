from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcpforge.csp import cost, hamming, serialize, swap_distance, value
from pcpforge.errors import OddLength
from pcpforge.generators import (
    CycleSpec,
    e2lin_cycle,
    ones_cycle,
    planted_assignment,
    random_instance,
    random_label_cover,
    random_regular_instance,
    two_swap_pair,
)
from pcpforge.oracles import brute_force_opt, satisfying_assignments


def test_cycle_examples():
    assert brute_force_opt(ones_cycle(4))[0] == 1
    assert brute_force_opt(e2lin_cycle(CycleSpec(4, (0, 1, 1, 1))))[0] == Fraction(3, 4)
    opt, witness = brute_force_opt(e2lin_cycle(CycleSpec(4, (0, 0, 0, 0))))
    assert opt == 1 and len(set(witness.values())) == 1


def test_cycle_spec_validation():
    with pytest.raises(OddLength):
        CycleSpec(5, (1,) * 5)
    with pytest.raises(OddLength):
        two_swap_pair(7)
    with pytest.raises(ValueError):
        CycleSpec(4, (1, 1))


@pytest.mark.parametrize("n", [4, 8, 12])
def test_two_swap_pair(n):
    a, b = two_swap_pair(n)
    assert swap_distance(a, b) == 2
    # the two swapped edges: (v_{n/2}, v_{n/2+1}) and (v_n, v_1)
    changed = [e.vars for e, f in zip(a.edges, b.edges) if e.relation != f.relation]
    assert changed == [(n // 2, n // 2 + 1), (n, 1)]
    sa, sb = satisfying_assignments(a), satisfying_assignments(b)
    assert len(sa) == len(sb) == 2
    assert min(hamming(x, y) for x in sa for y in sb) >= n // 2


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12, 14, 16])
def test_every_assignment_violates_an_even_number(n):
    inst = ones_cycle(n)
    seen = set()
    for bits in itertools.product((0, 1), repeat=n):
        violated = cost(inst, dict(zip(range(1, n + 1), bits))) * n
        seen.add(int(violated) % 2)
    assert seen == {0}


def test_ones_cycle_satisfying_pair_is_complementary():
    sols = satisfying_assignments(ones_cycle(8))
    assert len(sols) == 2 and hamming(*sols) == 8


def test_random_instance_replay_and_edgeless():
    assert serialize(random_instance(5, 7, 3, seed=11)) == serialize(random_instance(5, 7, 3, seed=11))
    assert random_instance(4, 0, 2, seed=1).m == 0


@given(st.integers(2, 6), st.integers(1, 8), st.integers(2, 3), st.integers(0, 10**6))
def test_planted_family_is_satisfiable(n, m, q, seed):
    inst = random_instance(n, m, q, "satisfiable-planted", seed=seed)
    plant = planted_assignment(n, q, "satisfiable-planted", seed=seed)
    assert value(inst, plant) == 1
    assert brute_force_opt(inst)[0] == 1


@given(st.integers(0, 10**6))
def test_regular_and_label_cover_plants(seed):
    inst, plant = random_regular_instance(8, 3, seed=seed)
    assert all(d == 3 for d in inst.degrees().values())
    assert value(inst, plant) == 1
    lc, plant = random_label_cover(3, 3, 5, 3, 2, seed=seed)
    assert value(lc, plant) == 1
