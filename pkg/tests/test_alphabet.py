from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcpforge.csp import BOOLEAN, Edge, Equality, Parity, Parity2, cost, dense, positional_changes, single_alphabet_instance, swap_constraint, tuples, value
from pcpforge.errors import NonBinaryInstance, TesterTooLarge
from pcpforge.generators import random_regular_instance
from pcpforge.oracles import default_swap
from pcpforge.recovery import recover_alphabet
from pcpforge.transforms.alphabet import (
    alphabet_reduce,
    bits_vec,
    hadamard,
    lift_sparsify,
    outer_vec,
    relation_circuit,
    sparsify,
    vec_bits,
)


def test_hadamard_codewords():
    assert hadamard(0, 4) == [0, 0, 0, 0]
    assert hadamard(3, 4) == [0, 1, 1, 0]
    for a, b in itertools.combinations(range(8), 2):
        assert sum(x != y for x, y in zip(hadamard(a, 8), hadamard(b, 8))) == 4


def test_bit_vector_helpers():
    assert bits_vec(vec_bits(0b1011, 6)) == 0b1011
    # (x outer y) bit i*k+j = x_i y_j
    assert outer_vec(0b01, 0b11, 2) == 0b0011


@pytest.mark.parametrize(
    "rel,q", [(Parity2(1), 2), (Equality(), 3), (tuples({(0, 2), (1, 1), (2, 0)}), 3)]
)
def test_relation_circuit_accepts_exactly_encoded_satisfying_pairs(rel, q):
    # with 3 labels in 2 bits, label index 3 is invalid and must be rejected
    alph = dense(q)
    b = 1 if q == 2 else 2
    ell = 1 << b
    c = relation_circuit(ell, b, alph, alph, rel)
    words = {tuple(hadamard(i, ell)): alph.label_at(i) for i in range(alph.size)}
    for bits in itertools.product((0, 1), repeat=2 * ell):
        u, v = bits[:ell], bits[ell:]
        want = u in words and v in words and rel.accepts((words[u], words[v]))
        assert c.accepts(bits) == want


@given(st.integers(0, 10**6))
def test_sparsify_preserves_cost_for_uniform_arity(seed):
    rng = random.Random(seed)
    rels = [Parity(0, 3), Parity(1, 3), tuples({t for t in itertools.product((0, 1), repeat=3) if rng.random() < 0.5} or {(0, 0, 0)})]
    edges = [Edge(tuple(rng.sample(range(5), 3)), rng.choice(rels)) for _ in range(6)]
    inst = single_alphabet_instance(range(5), BOOLEAN, edges)
    sp = sparsify(inst)
    assert sp.is_binary() and sp.m == 3 * inst.m
    sigma = {v: rng.randrange(2) for v in range(5)}
    assert cost(sp, lift_sparsify(inst, sigma)) == cost(inst, sigma)


@pytest.mark.parametrize("q", [2, 4, 8])
def test_lift_satisfies_and_decodes(q):
    inst, plant = random_regular_instance(4, 3, q=q, family="tuples", seed=q)
    red = alphabet_reduce(inst, 2, seed=1)
    sigma = red.lift(plant)
    assert value(red.instance, sigma) == 1
    rec = recover_alphabet(red, sigma)
    assert all(d.distance == 0 for d in rec.decodings.values())
    assert rec.assignment_at(0) == plant
    assert red.report()["block_length"] == red.ell


def test_replay_is_deterministic():
    inst, _ = random_regular_instance(4, 3, q=4, family="tuples", seed=2)
    a, b = alphabet_reduce(inst, 2, seed=9), alphabet_reduce(inst, 2, seed=9)
    assert a.instance.edges == b.instance.edges


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_one_swap_changes_at_most_four_per_sample(seed):
    inst, _ = random_regular_instance(4, 3, q=4, family="tuples", seed=seed)
    i = random.Random(seed).randrange(inst.m)
    other = swap_constraint(inst, i, default_swap(inst, i))
    a = alphabet_reduce(inst, 2, seed=seed)
    pad = max(c.size for c in a.circuits)
    b = alphabet_reduce(other, 2, seed=seed, pad_to=pad)
    if max(c.size for c in b.circuits) == pad:
        assert positional_changes(a.instance, b.instance) <= 4 * 2


def test_errors():
    inst = single_alphabet_instance(range(3), BOOLEAN, [Edge((0, 1, 2), Parity(0, 3))])
    with pytest.raises(NonBinaryInstance):
        alphabet_reduce(inst)
    inst, _ = random_regular_instance(4, 3, q=8, family="tuples", seed=1)
    with pytest.raises(TesterTooLarge):
        alphabet_reduce(inst, k_cap=16)
