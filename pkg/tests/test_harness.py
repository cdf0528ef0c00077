from __future__ import annotations

import json
from fractions import Fraction

import pytest

from pcpforge.csp import PointMass
from pcpforge.harness import REGISTRY, DegreeReducePass, ExpanderizePass, compose, verify_reduction

FAST = [name for name in REGISTRY if name != "power"]


@pytest.mark.parametrize("name", FAST)
def test_every_pass_meets_its_obligations(name):
    rep = verify_reduction(name, trials=6, seed=3)
    assert rep.passed, rep.dumps()
    assert rep.c_i["checked"] > 0 and rep.c_sigma["checked"] > 0


def test_power_pass_single_trial():
    rep = verify_reduction("power", trials=1, seed=0)
    assert rep.passed
    assert Fraction(rep.c_sigma["measured_max"]) <= 8


def test_degree_reduction_constants_are_exact():
    rep = verify_reduction("degree-reduce", trials=50, seed=7)
    assert rep.passed
    assert rep.c_i["measured_max"] <= 1 and rep.c_sigma["measured_max"] <= Fraction(1, 3)
    assert rep.extra["regular"] and rep.extra["edges_ok"]


def test_reports_replay_byte_identically():
    a = verify_reduction("e3sat", trials=4, seed=11).dumps()
    b = verify_reduction("e3sat", trials=4, seed=11).dumps()
    assert a == b and json.loads(a)["passed"]


class ZeroLift(DegreeReducePass):
    def lift(self, instance, out, ctx, sigma):
        return {c: 0 for c in ctx.inverse}


class Overclaiming(DegreeReducePass):
    def csigma_bound(self, instance, out, ctx):
        return Fraction(1, 100)


class ConstantRecovery(ExpanderizePass):
    # complementing every bit would still satisfy parity constraints; a constant does not
    def recover(self, instance, out, ctx, sigma):
        return PointMass({v: 0 for v in sigma})


def test_broken_passes_are_caught():
    assert not verify_reduction(ZeroLift(), trials=5).completeness["pass"]
    assert not verify_reduction(Overclaiming(), trials=5).c_sigma["pass"]
    assert not verify_reduction(ConstantRecovery(), trials=5).soundness["pass"]


def test_compose_multiplies_measured_factors():
    reps = [verify_reduction(name, trials=3, seed=1) for name in ("degree-reduce", "e3sat")]
    out = compose(reps, [("input", 4, 6), ("a", 8, 12)])
    ci = Fraction(reps[0].c_i["measured_max"]) * Fraction(reps[1].c_i["measured_max"])
    assert Fraction(out["c_i_product"]) == ci
    assert Fraction(out["sensitivity_factor"]) == Fraction(out["c_i_product"]) * Fraction(out["c_sigma_product"])
    assert out["growth"][1]["n_ratio"] == "2"
