from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcpforge.csp import Assignment, dense, tv_distance
from pcpforge.errors import BlockMissing, DomainMismatch
from pcpforge.recovery import AlphabetRecovery, decode_block, recover_degree, recover_expanderize, threshold_coupling_cost
from pcpforge.transforms.alphabet import hadamard
from pcpforge.transforms.degree import CloudMap

ELL = 32
ALPH = dense(ELL)


def blocks_for(words):
    blocks = {u: tuple(f"x{u}_{j}" for j in range(ELL)) for u in words}
    sigma = {name: bit for u, w in words.items() for name, bit in zip(blocks[u], w)}
    return blocks, sigma


def recovery(words):
    blocks, sigma = blocks_for(words)
    return AlphabetRecovery(blocks, {u: ALPH for u in words}, ELL, sigma)


def flipped(word, positions):
    w = list(word)
    for p in positions:
        w[p] ^= 1
    return w


@pytest.mark.parametrize("dist,p", [(0, 1), (ELL // 8, Fraction(1, 2)), (ELL // 4, 0)])
def test_keep_probability_is_one_minus_four_delta(dist, p):
    word = flipped(hadamard(5, ELL), range(1, dist + 1))
    d = decode_block(word, ALPH, ELL)
    assert d.delta == Fraction(dist, ELL)
    assert d.p == 1 - 4 * d.delta == p
    assert d.label == 5 or d.p == 0


def test_same_codeword_flip_moves_four_over_ell():
    a = hadamard(9, ELL)
    r1, r2 = recovery({0: a}), recovery({0: flipped(a, [3])})
    tv = tv_distance(r1.marginals().marginal(0), r2.marginals().marginal(0))
    assert tv == Fraction(4, ELL) <= Fraction(8, ELL)


def test_decoding_boundary_flip():
    # halfway between codewords 1 and 3 (distance ELL/2 apart); one flip changes the closest codeword
    c1, c3 = hadamard(1, ELL), hadamard(3, ELL)
    diff = [j for j in range(ELL) if c1[j] != c3[j]]
    mid = flipped(c1, diff[: ELL // 4])
    near3 = flipped(mid, diff[ELL // 4: ELL // 4 + 1])
    d1, d2 = decode_block(mid, ALPH, ELL), decode_block(near3, ALPH, ELL)
    assert d1.label == 1 and d2.label == 3
    r1, r2 = recovery({0: mid}), recovery({0: near3})
    assert tv_distance(r1.marginals().marginal(0), r2.marginals().marginal(0)) <= Fraction(8, ELL)


@given(st.integers(0, 10**6))
def test_single_bit_tv_bound_on_random_words(seed):
    rng = random.Random(seed)
    word = flipped(hadamard(rng.randrange(ELL), ELL), rng.sample(range(ELL), rng.randrange(ELL // 2)))
    other = flipped(word, [rng.randrange(ELL)])
    r1, r2 = recovery({0: word, 1: hadamard(0, ELL)}), recovery({0: other, 1: hadamard(0, ELL)})
    total = sum(tv_distance(r1.marginals().marginal(u), r2.marginals().marginal(u)) for u in (0, 1))
    assert total <= Fraction(8, ELL)
    # the shared-threshold coupling bounds the same quantity from above
    assert total <= threshold_coupling_cost(r1, r2)


@given(st.integers(0, 10**6))
def test_joint_law_matches_marginals(seed):
    rng = random.Random(seed)
    words = {u: flipped(hadamard(rng.randrange(ELL), ELL), rng.sample(range(ELL), rng.randrange(ELL // 3))) for u in range(3)}
    r = recovery(words)
    joint = r.joint()
    for u in range(3):
        marg = {}
        for a, p in joint.items:
            marg[a[u]] = marg.get(a[u], Fraction(0)) + p
        assert marg == r.marginals().marginal(u)


def test_missing_block_variable():
    blocks, sigma = blocks_for({0: hadamard(1, ELL)})
    del sigma["x0_3"]
    with pytest.raises(BlockMissing):
        AlphabetRecovery(blocks, {0: ALPH}, ELL, sigma)


def test_degree_recovery_histograms():
    cm = CloudMap({"a": ("a#0", "a#1", "a#2"), "b": ()}, {"a#0": "a", "a#1": "a", "a#2": "a"})
    with pytest.raises(DomainMismatch):
        recover_degree(cm, {"a#0": 0, "a#1": 1, "a#2": 1})
    cm = CloudMap({"a": ("a#0", "a#1", "a#2")}, {"a#0": "a", "a#1": "a", "a#2": "a"})
    assert recover_degree(cm, {"a#0": 0, "a#1": 1, "a#2": 1}).marginal("a") == {0: Fraction(1, 3), 1: Fraction(2, 3)}
    assert recover_expanderize({"a": 1}).assignment == Assignment({"a": 1})
