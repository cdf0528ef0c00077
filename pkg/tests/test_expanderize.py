from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcpforge.csp import Edge, Parity2, BOOLEAN, cost, single_alphabet_instance, value
from pcpforge.errors import NotRegular
from pcpforge.generators import ones_cycle, random_regular_instance
from pcpforge.graphs import certified_degree, lambda_
from pcpforge.transforms.common import instance_graph
from pcpforge.transforms.expanderize import expander_for, expanderize, expanderized_graph

from test_graphs import numpy_lambda


@given(st.sampled_from([6, 8, 10, 12]), st.integers(0, 10**6))
def test_lambda_is_subadditive(n, seed):
    inst, _ = random_regular_instance(n, 3, seed=seed)
    d0 = certified_degree(n, seed=seed)
    g, _, _ = instance_graph(inst)
    out = expanderized_graph(inst, d0, seed)
    assert numpy_lambda(out) <= numpy_lambda(g) + numpy_lambda(expander_for(inst, d0, seed)) + 1e-6
    assert lambda_(out) == pytest.approx(numpy_lambda(out), abs=1e-8)


@given(st.integers(0, 10**6))
def test_cost_dilution_identity(seed):
    rng = random.Random(seed)
    inst, plant = random_regular_instance(8, 3, seed=seed)
    d0 = certified_degree(8, seed=seed)
    out = expanderize(inst, d0, seed)
    assert out.m == 8 * (3 + d0) // 2
    assert set(out.degrees().values()) == {3 + d0}
    assert value(out, plant) == 1
    for _ in range(20):
        sigma = {v: rng.randrange(2) for v in inst.variables}
        assert cost(out, sigma) * out.m == cost(inst, sigma) * inst.m


def test_ones_cycle():
    out = expanderize(ones_cycle(8), 6)
    assert out.m == 8 + 24


def test_irregular_input_is_rejected():
    inst = single_alphabet_instance(range(3), BOOLEAN, [Edge((0, 1), Parity2(1)), Edge((1, 2), Parity2(1))])
    with pytest.raises(NotRegular):
        expanderize(inst, 4)
