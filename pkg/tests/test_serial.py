from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcpforge.csp import value
from pcpforge.generators import random_label_cover
from pcpforge.transforms.serial import conjoin, edge_usage, serial_draws, serial_repeat


@given(st.integers(1, 3), st.integers(1, 10), st.integers(0, 10**6))
def test_conjunctions_replay_their_draws(t, M, seed):
    inst, plant = random_label_cover(3, 3, 6, 3, 2, seed=seed)
    out = serial_repeat(inst, t, M, seed)
    assert out.m == M and set(out.variables) == set(inst.variables)
    assert value(out, plant) == 1
    rng = random.Random(seed)
    sigma = {v: rng.randrange(inst.alphabet(v).size) for v in inst.variables}
    for e, picks in zip(out.edges, serial_draws(inst, t, M, seed)):
        want = all(inst.edges[i].relation.accepts(tuple(sigma[v] for v in inst.edges[i].vars)) for i in picks)
        assert e.relation.accepts(tuple(sigma[v] for v in e.vars)) == want
    assert sum(edge_usage(inst, t, M, seed).values()) == sum(len(set(p)) for p in serial_draws(inst, t, M, seed))


def test_conjoin_scope_is_first_seen_order():
    inst, _ = random_label_cover(2, 2, 3, 2, 2, seed=1)
    e = conjoin([inst.edges[0], inst.edges[0]])
    assert e.vars == inst.edges[0].vars
    for labels in itertools.product(range(2), repeat=2):
        assert e.relation.accepts(labels) == inst.edges[0].relation.accepts(labels)


def test_bad_parameters():
    inst, _ = random_label_cover(2, 2, 3, 2, 2, seed=1)
    with pytest.raises(ValueError):
        serial_repeat(inst, 0, 3)
