from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcpforge.csp import BOOLEAN, Disjunction, Edge, Parity2, positional_changes, single_alphabet_instance, swap_constraint, value
from pcpforge.errors import NonBinaryInstance, NotE3SAT
from pcpforge.generators import random_label_cover
from pcpforge.oracles import brute_force_opt, default_swap
from pcpforge.recovery import recover_e3sat
from pcpforge.transforms.gadgets import all_clause_assignments, clause_pattern, e3sat_to_3lin, lift_e3sat, to_e3sat


def test_seven_equation_pattern():
    for signs in all_clause_assignments():
        for vals in all_clause_assignments():
            sat = any(v == s for v, s in zip(vals, signs))
            assert sum(clause_pattern(signs, vals)) == (4 if sat else 0)


@given(st.integers(0, 10**6))
def test_3lin_value_is_four_sevenths_of_e3sat_value(seed):
    rng = random.Random(seed)
    edges = [Edge(tuple(rng.sample(range(5), 3)), Disjunction(tuple(rng.randrange(2) for _ in range(3)))) for _ in range(6)]
    e3 = single_alphabet_instance(range(5), BOOLEAN, edges)
    lin = e3sat_to_3lin(e3)
    assert lin.m == 7 * e3.m
    sigma = {v: rng.randrange(2) for v in range(5)}
    assert value(lin, sigma) == Fraction(4, 7) * value(e3, sigma)


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_e3sat_round_trip_and_completeness(seed):
    inst, plant = random_label_cover(2, 2, 3, 3, 2, seed=seed)
    e3, enc = to_e3sat(inst)
    assert e3.m == enc.K * inst.m
    assert all(len(e.vars) == 3 for e in e3.edges)
    bits = lift_e3sat(inst, e3, enc, plant)
    assert value(e3, bits) == 1
    assert recover_e3sat(enc, bits) == plant
    rng = random.Random(seed)
    sigma = {v: rng.randrange(inst.alphabet(v).size) for v in inst.variables}
    assert dict(enc.decode(enc.encode(sigma))) == sigma


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_block_satisfiable_iff_constraint_holds(seed):
    # each block is satisfiable by some auxiliaries exactly when the decoded labels satisfy it
    inst, _ = random_label_cover(2, 2, 2, 3, 2, seed=seed, planted=False)
    e3, enc = to_e3sat(inst)
    assert (brute_force_opt(e3)[0] == 1) == (brute_force_opt(inst)[0] == 1)


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_one_swap_changes_at_most_k_clauses(seed):
    inst, _ = random_label_cover(3, 2, 4, 3, 2, seed=seed)
    i = random.Random(seed).randrange(inst.m)
    other = swap_constraint(inst, i, default_swap(inst, i))
    a, enc = to_e3sat(inst)
    b, _ = to_e3sat(other)
    assert 0 < positional_changes(a, b) <= enc.K


def test_errors():
    from pcpforge.csp import Parity

    with pytest.raises(NonBinaryInstance):
        to_e3sat(single_alphabet_instance(range(3), BOOLEAN, [Edge((0, 1, 2), Parity(0, 3))]))
    with pytest.raises(NotE3SAT):
        e3sat_to_3lin(single_alphabet_instance(range(2), BOOLEAN, [Edge((0, 1), Parity2(1))]))
