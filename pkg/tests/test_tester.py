from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcpforge.csp import cost
from pcpforge.errors import TesterTooLarge
from pcpforge.transforms.tester import (
    FAMILIES,
    Circuit,
    CircuitBuilder,
    SmallTester,
    arithmetize,
    assignment_tester,
    bits_of,
    blr_fraction,
    blr_single_flip_fraction,
    distance_to_satisfying,
    exact_tables,
    gate_circuit,
    had_table,
    int_of,
    quad_table,
    tester_layout,
    tester_lift,
    weight_repr,
    wires_int,
)

GATES = ("and", "or", "not")
NOT1 = Circuit(1, (("not", 0, 0),), 1)  # k = 2, small enough for the explicit instance


def test_gate_circuits():
    truth = {"and": [0, 0, 0, 1], "or": [0, 1, 1, 1], "not": [1, 0, 1, 0]}
    for op in GATES:
        c = gate_circuit(op)
        assert c.k == 3
        assert [int(c.accepts((a, b))) for b in (0, 1) for a in (0, 1)] == truth[op]


def test_builder_xor_and_padding():
    cb = CircuitBuilder(2)
    c = cb.finish(cb.xor(0, 1))
    assert [c.accepts(x) for x in itertools.product((0, 1), repeat=2)] == [False, True, True, False]
    p = c.padded(c.size + 3)
    assert p.size == c.size + 3 and p.satisfying_inputs() == c.satisfying_inputs()
    with pytest.raises(ValueError):
        Circuit(1, (("and", 0, 1),), 1)


@pytest.mark.parametrize("op", GATES)
def test_equations_vanish_exactly_on_accepting_computations(op):
    c = gate_circuit(op)
    polys = arithmetize(c)
    accepting = {wires_int(c, x) for x in c.satisfying_inputs()}
    for z in range(1 << c.k):
        bits = bits_of(z, c.k)
        assert all(p.evaluate(bits) == 0 for p in polys) == (z in accepting)


def test_hadamard_tables_are_linear():
    for k in (1, 2, 3):
        for z in range(1 << k):
            assert blr_fraction(had_table(z, k)) == 0
    q = quad_table(0b101, 3)
    assert q[1 << 0] == 1 and q[1 << (1 * 3 + 1)] == 0 and q[1 << (2 * 3 + 0)] == 1


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_single_flip_closed_form_matches_enumeration(k):
    for z in (0, (1 << k) - 1):
        for s in range(1 << k):
            L = had_table(z, k).copy()
            L[s] ^= 1
            assert blr_fraction(L) == blr_single_flip_fraction(k, s)


@pytest.mark.parametrize("op", GATES)
def test_completeness_with_exact_tables(op):
    c = gate_circuit(op)
    T = SmallTester(c)
    for x in c.satisfying_inputs():
        s = T.score_assignment(x, wires_int(c, x))
        assert s.exact and s.violated == 0


@pytest.mark.parametrize("op", GATES)
def test_soundness_over_every_input(op):
    c = gate_circuit(op)
    T = SmallTester(c)
    rng = random.Random(op)
    for x in itertools.product((0, 1), repeat=2):
        delta = distance_to_satisfying(c, x)
        corpus = [exact_tables(c, z) for z in range(1 << c.k)]
        for _ in range(20):
            L, Q = exact_tables(c, rng.randrange(1 << c.k))
            p = rng.random() / 4
            corpus.append((L ^ (np.random.default_rng(rng.getrandbits(32)).random(len(L)) < p),
                           Q ^ (np.random.default_rng(rng.getrandbits(32)).random(len(Q)) < p)))
        for L, Q in corpus:
            assert T.score(x, L, Q).violated >= delta / 48


@given(st.integers(0, 10**6))
def test_vectorized_score_matches_explicit_instance(seed):
    rng = np.random.default_rng(seed)
    inst, layout = assignment_tester(NOT1)
    T = SmallTester(NOT1)
    L = rng.integers(0, 2, 1 << NOT1.k, dtype=np.uint8)
    Q = rng.integers(0, 2, 1 << (NOT1.k**2), dtype=np.uint8)
    x = [int(rng.integers(0, 2))]
    sigma = {"x0": x[0]}
    sigma.update({f"L{s}": int(v) for s, v in enumerate(L)})
    sigma.update({f"Q{q}": int(v) for q, v in enumerate(Q)})
    # every family carries total weight 1, so the cost is the mean family violation
    assert cost(inst, sigma) == T.score(x, L, Q).violated


def test_explicit_lift_satisfies():
    inst, _ = assignment_tester(NOT1)
    assert cost(inst, tester_lift(NOT1, [0])) == 0
    assert cost(inst, tester_lift(NOT1, [1])) > 0


def test_layout_normalizer_is_the_lcm():
    for op in GATES:
        lay = tester_layout(gate_circuit(op))
        assert lay.normalizer == math.lcm(*(w.denominator for w in lay.weights))
        assert all(lay.normalizer * w == int(lay.normalizer * w) for w in lay.weights)
    assert weight_repr(Fraction(1, 2**70)) == "2^-70"
    assert weight_repr(Fraction(1, 3 * 2**5)) == "1/(3*2^5)"


def test_sampled_regime_and_caps():
    cb = CircuitBuilder(2)
    c4 = cb.finish(cb.not_(cb.and_(0, 1)))
    assert c4.k == 4
    a = SmallTester(c4, budget=512, seed=3)
    b = SmallTester(c4, budget=512, seed=3)
    x = (0, 0)
    z = wires_int(c4, x)
    L, Q = exact_tables(c4, z)
    Q = Q.copy()
    Q[5] ^= 1
    assert not a.exact
    assert a.score(x, L, Q).fractions == b.score(x, L, Q).fractions
    assert a.score_assignment(x, z).violated == 0
    cb = CircuitBuilder(3)
    with pytest.raises(TesterTooLarge):
        SmallTester(cb.finish(cb.and_(0, cb.and_(1, 2))))
    assert set(a.score(x, L, Q).fractions) == set(FAMILIES)


def test_bit_helpers():
    assert int_of(bits_of(13, 5)) == 13
    assert distance_to_satisfying(gate_circuit("and"), (0, 0)) == 1
    assert distance_to_satisfying(gate_circuit("and"), (1, 0)) == Fraction(1, 2)
