"""Mechanized checks of the four reduction obligations, per pass, and composition bookkeeping.

For each pass the harness samples source instances with a planted
satisfying assignment and checks:

1. completeness: the canonical lift satisfies the output (value 1);
2. soundness: on a corpus of output assignments (the lift, uniform random,
   lift with a fraction of coordinates corrupted), whenever the output
   value is 1 the recovered distribution has expected value 1 on the
   source; passes with a sharper exact relation check it instead;
3. instance sensitivity: output distance between T(I) and T(I') over swap
   distance between I and I', against the declared C_I;
4. assignment sensitivity: distance between recovered distributions over
   Hamming distance of single-coordinate output changes, against C_sigma.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .csp import (
    Assignment,
    Disjunction,
    cost,
    Empirical,
    Instance,
    PerVertexProduct,
    PointMass,
    hamming,
    positional_changes,
    swap_constraint,
    swap_distance,
    value,
)
from .generators import random_label_cover, random_regular_instance
from .graphs import bsrw_kernel, certified_degree, lambda_
from .oracles import default_swap, emd_upper_product
from .parallel import derive_seed
from .recovery import (
    AlphabetRecovery,
    recover_alphabet,
    recover_degree,
    recover_e3sat,
    recover_expanderize,
    recover_power,
    recover_serial,
    recover_3lin,
    threshold_coupling_cost,
)
from .transforms.alphabet import alphabet_reduce
from .transforms.common import instance_graph
from .transforms.degree import degree_reduce, lift_degree
from .transforms.expanderize import expander_for, expanderize, expanderized_graph
from .transforms.gadgets import e3sat_to_3lin, lift_e3sat, to_e3sat
from .transforms.powering import lift_power, power
from .transforms.serial import serial_draws, serial_repeat

REPORT_VERSION = 1


# ---------------------------------------------------------------- helpers


def random_assignment(instance: Instance, rng: random.Random) -> dict:
    return {v: instance.alphabet(v).label_at(rng.randrange(instance.alphabet(v).size)) for v in instance.sorted_variables()}


def perturb(instance: Instance, sigma, rng: random.Random, candidates=None) -> dict:
    """Change one coordinate (drawn from ``candidates``) to a different label."""
    pool = list(candidates) if candidates is not None else instance.sorted_variables()
    pool = [v for v in pool if instance.alphabet(v).size > 1]
    v = pool[rng.randrange(len(pool))]
    a = instance.alphabet(v)
    cur = a.index(sigma[v])
    new = (cur + 1 + rng.randrange(a.size - 1)) % a.size
    out = dict(sigma)
    out[v] = a.label_at(new)
    return out


def corrupt(instance: Instance, sigma, frac: float, rng: random.Random, candidates=None) -> dict:
    out = dict(sigma)
    pool = list(candidates) if candidates is not None else instance.sorted_variables()
    for v in pool:
        if rng.random() < frac:
            a = instance.alphabet(v)
            out[v] = a.label_at(rng.randrange(a.size))
    return out


def expected_value(instance: Instance, dist) -> Fraction:
    """Exact E[value(instance, sigma)] for sigma drawn from ``dist``."""
    if isinstance(dist, AlphabetRecovery):
        dist = dist.joint()
    if isinstance(dist, PointMass):
        return value(instance, dist.assignment)
    if isinstance(dist, (Assignment, dict)):
        return value(instance, dist)
    if isinstance(dist, Empirical):
        return sum((p * value(instance, a) for a, p in dist.items), Fraction(0))
    if isinstance(dist, PerVertexProduct):
        total = Fraction(0)
        for e in instance.edges:
            scope = list(dict.fromkeys(e.vars))
            options = [list(dist.marginal(v).items()) for v in scope]
            sat = Fraction(0)
            for combo in itertools.product(*options):
                lab = {v: a for v, (a, _) in zip(scope, combo)}
                if e.relation.accepts(tuple(lab[v] for v in e.vars)):
                    p = Fraction(1)
                    for _, q in combo:
                        p *= q
                    sat += p
            total += e.mass * sat
        return total / instance.total_weight
    raise TypeError(f"unsupported distribution {type(dist).__name__}")


def fmt(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {k: fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    return x


# ---------------------------------------------------------------- pass definitions


class Pass:
    """A (T_I, T_sigma) pair with a source sampler and declared constants."""

    name = ""
    declared_ci: Fraction = Fraction(1)
    declared_csigma: Fraction = Fraction(1)
    sensitivity_trials: int | None = None  # cap on costly C_I trials
    default_trials: int = 50

    def __init__(self, **params):
        self.params = params

    def sample(self, rng):  # -> (instance, planted)
        raise NotImplementedError

    def apply(self, instance, seed):  # -> (out, ctx)
        raise NotImplementedError

    def lift(self, instance, out, ctx, sigma):
        raise NotImplementedError

    def recover(self, instance, out, ctx, sigma):
        raise NotImplementedError

    def ci_bound(self, instance, out, ctx) -> Fraction:
        return self.declared_ci

    def csigma_bound(self, instance, out, ctx) -> Fraction:
        return self.declared_csigma

    def neighbor(self, instance, rng):
        i = rng.randrange(instance.m)
        return swap_constraint(instance, i, default_swap(instance, i))

    def apply_neighbor(self, instance, other, out, ctx, seed):
        return self.apply(other, seed)

    def distance(self, a, b) -> int:
        return swap_distance(a, b)

    def perturb_candidates(self, out, ctx):
        return None

    def rec_distance(self, r1, r2) -> Fraction:
        if isinstance(r1, AlphabetRecovery):
            return threshold_coupling_cost(r1, r2)
        if isinstance(r1, (PerVertexProduct, PointMass)):
            return emd_upper_product(r1, r2)
        return Fraction(hamming(r1, r2))

    def soundness(self, instance, out, ctx, sigma_out, rec):
        """(ok, info) for one corpus member."""
        v_out = value(out, sigma_out)
        v_in = expected_value(instance, rec)
        ok = v_in == 1 if v_out == 1 else True
        return ok, {"out": v_out, "in": v_in}

    def extra(self, instance, out, ctx, rng) -> dict:
        return {}


class DegreeReducePass(Pass):
    name = "degree-reduce"

    def sample(self, rng):
        n = rng.choice(self.params.get("sizes", (4, 6, 8, 10, 12)))
        return random_regular_instance(n, 3, family="parity-planted", seed=rng.getrandbits(32))

    def apply(self, instance, seed):
        return degree_reduce(instance, self.params.get("d0", 4), seed)

    def lift(self, instance, out, ctx, sigma):
        return lift_degree(ctx, sigma)

    def recover(self, instance, out, ctx, sigma):
        return recover_degree(ctx, sigma, instance)

    def csigma_bound(self, instance, out, ctx):
        return Fraction(1, min(len(c) for c in ctx.clouds.values() if c))

    def extra(self, instance, out, ctx, rng):
        d0 = self.params.get("d0", 4)
        degs = set(out.degrees().values())
        return {"regular": degs == {d0 + 1}, "edges_ok": out.m == (d0 + 1) * instance.m}


class ExpanderizePass(Pass):
    name = "expanderize"

    def sample(self, rng):
        n = rng.choice(self.params.get("sizes", (6, 8, 10, 12)))
        return random_regular_instance(n, 3, family="parity-planted", seed=rng.getrandbits(32))

    def apply(self, instance, seed):
        d0 = self.params.get("d0") or certified_degree(instance.n, 3, seed=seed)
        return expanderize(instance, d0, seed), (d0, seed)

    def lift(self, instance, out, ctx, sigma):
        return dict(sigma)

    def recover(self, instance, out, ctx, sigma):
        return recover_expanderize(sigma)

    def extra(self, instance, out, ctx, rng):
        d0, seed = ctx
        g, _, _ = instance_graph(instance)
        lam_out = lambda_(expanderized_graph(instance, d0, seed))
        lam_in = lambda_(g)
        lam_h = lambda_(expander_for(instance, d0, seed))
        sigma = random_assignment(instance, rng)
        dil = cost(out, sigma) * out.m == cost(instance, sigma) * instance.m
        return {
            "lambda_ok": lam_out <= lam_in + lam_h + 1e-6,
            "regular": set(out.degrees().values()) == {3 + d0},
            "dilution": dil,
        }


class PowerPass(Pass):
    name = "power"
    declared_csigma = Fraction(8)
    sensitivity_trials = 2
    default_trials = 3

    def sample(self, rng):
        n = 4
        return random_regular_instance(n, 3, family="parity-planted", seed=rng.getrandbits(32))

    def apply(self, instance, seed):
        t = self.params.get("t", 2)
        out = power(instance, t, "exact")
        g, _, _ = instance_graph(instance)
        return out, bsrw_kernel(g, t)

    def lift(self, instance, out, ctx, sigma):
        return lift_power(out, sigma)

    def recover(self, instance, out, ctx, sigma):
        return recover_power(instance, ctx, sigma)

    def ci_bound(self, instance, out, ctx):
        return Fraction(out.m)

    def rec_distance(self, r1, r2):
        # per-vertex l1 distance, the quantity bounded by 8
        return 2 * emd_upper_product(r1, r2)


class AlphabetReducePass(Pass):
    name = "alphabet-reduce"

    def sample(self, rng):
        q = self.params.get("q", 8)
        return random_regular_instance(4, 3, q=q, family="tuples", seed=rng.getrandbits(32))

    def apply(self, instance, seed):
        return None, alphabet_reduce(instance, self.params.get("samples", 2), seed, self.params.get("pad_to"))

    def lift(self, instance, out, ctx, sigma):
        return ctx.lift(sigma)

    def recover(self, instance, out, ctx, sigma):
        return recover_alphabet(ctx, sigma)

    def ci_bound(self, instance, out, ctx):
        return Fraction(4 * ctx.samples)

    def csigma_bound(self, instance, out, ctx):
        return Fraction(8, ctx.ell)

    def apply_neighbor(self, instance, other, out, ctx, seed):
        pad = max(c.size for c in ctx.circuits)
        red = alphabet_reduce(other, ctx.samples, seed, pad)
        if max(c.size for c in red.circuits) != pad:
            red = None
        return None, red

    def perturb_candidates(self, out, ctx):
        return [x for names in ctx.blocks.values() for x in names]

    def soundness(self, instance, out, ctx, sigma_out, rec):
        # the sampled tester is not sound pointwise: check the exact lift decodes exactly
        v_out = value(ctx.instance, sigma_out)
        exact = all(d.distance == 0 for d in rec.decodings.values())
        v_in = expected_value(instance, rec)
        ok = (not exact) or v_out < 1 or v_in == 1
        return ok, {"out": v_out, "in": v_in, "codewords": exact}


class SerialPass(Pass):
    name = "serial-repeat"

    def sample(self, rng):
        return random_label_cover(3, 3, 6, 3, 2, seed=rng.getrandbits(32))

    def apply(self, instance, seed):
        t, M = self.params.get("t", 2), self.params.get("M", 12)
        return serial_repeat(instance, t, M, seed), (t, M, seed)

    def lift(self, instance, out, ctx, sigma):
        return dict(sigma)

    def recover(self, instance, out, ctx, sigma):
        return recover_serial(sigma)

    def distance(self, a, b):
        return positional_changes(a, b)

    def ci_bound(self, instance, out, ctx):
        t, M, _ = ctx
        return Fraction(2 * t * M, instance.m)

    def soundness(self, instance, out, ctx, sigma_out, rec):
        t, M, seed = ctx
        v_out = value(out, sigma_out)
        draws = serial_draws(instance, t, M, seed)
        if v_out == 1:
            used = {i for d in draws for i in d}
            ok = all(instance.edges[i].relation.accepts(tuple(rec[v] for v in instance.edges[i].vars)) for i in used)
        else:
            ok = True
        return ok, {"out": v_out, "in": value(instance, rec)}


class E3SatPass(Pass):
    name = "e3sat"

    def sample(self, rng):
        return random_label_cover(3, 2, 4, 3, 2, seed=rng.getrandbits(32))

    def apply(self, instance, seed):
        return to_e3sat(instance)

    def lift(self, instance, out, ctx, sigma):
        return lift_e3sat(instance, out, ctx, sigma)

    def recover(self, instance, out, ctx, sigma):
        return recover_e3sat(ctx, sigma)

    def distance(self, a, b):
        return positional_changes(a, b)

    def ci_bound(self, instance, out, ctx):
        return Fraction(ctx.K)

    def soundness(self, instance, out, ctx, sigma_out, rec):
        v_out = value(out, sigma_out)
        v_in = value(instance, rec)
        # a block with all clauses satisfied forces its constraint to hold
        blocks_ok = all(
            all(e.relation.accepts(tuple(sigma_out[v] for v in e.vars)) for e in out.edges[i * ctx.K:(i + 1) * ctx.K])
            for i in range(instance.m)
        )
        ok = (not blocks_ok) or v_in == 1
        return ok, {"out": v_out, "in": v_in}


class ThreeLinPass(Pass):
    name = "3lin"
    declared_ci = Fraction(7)

    def sample(self, rng):
        lc, plant = random_label_cover(3, 2, 3, 3, 2, seed=rng.getrandbits(32))
        e3, enc = to_e3sat(lc)
        return e3, lift_e3sat(lc, e3, enc, plant)

    def apply(self, instance, seed):
        return e3sat_to_3lin(instance), None

    def lift(self, instance, out, ctx, sigma):
        return dict(sigma)

    def recover(self, instance, out, ctx, sigma):
        return recover_3lin(sigma)

    def neighbor(self, instance, rng):
        i = rng.randrange(instance.m)
        signs = instance.edges[i].relation.signs
        j = rng.randrange(3)
        new = tuple(1 - s if k == j else s for k, s in enumerate(signs))
        return swap_constraint(instance, i, Disjunction(new))

    def distance(self, a, b):
        return positional_changes(a, b)

    def lift_value_target(self):
        return Fraction(4, 7)

    def soundness(self, instance, out, ctx, sigma_out, rec):
        v_out = value(out, sigma_out)
        v_in = value(instance, rec)
        return v_out == Fraction(4, 7) * v_in, {"out": v_out, "in": v_in}


REGISTRY = {
    p.name: p
    for p in (DegreeReducePass, ExpanderizePass, PowerPass, AlphabetReducePass, SerialPass, E3SatPass, ThreeLinPass)
}


# ---------------------------------------------------------------- reports


@dataclass
class ReductionReport:
    name: str
    trials: int
    seed: object
    completeness: dict
    soundness: dict
    c_i: dict
    c_sigma: dict
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(x["pass"] for x in (self.completeness, self.soundness, self.c_i, self.c_sigma)) and all(
            v for k, v in self.extra.items() if isinstance(v, bool)
        )

    def to_json(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "pass": self.name,
            "trials": self.trials,
            "seed": self.seed,
            "completeness": fmt(self.completeness),
            "soundness": fmt(self.soundness),
            "c_i": fmt(self.c_i),
            "c_sigma": fmt(self.c_sigma),
            "extra": fmt(self.extra),
            "passed": self.passed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


def verify_reduction(transform, trials: int = 50, seed=0, corruptions=(0.05, 0.2), **params) -> ReductionReport:
    """Run the four obligation checks of a registered pass on sampled instances."""
    p = REGISTRY[transform](**params) if isinstance(transform, str) else transform
    target = p.lift_value_target() if hasattr(p, "lift_value_target") else Fraction(1)
    comp_min, comp_ok = None, True
    sound_checked, sound_bad, ratios = 0, 0, []
    ci_max, ci_ok, ci_checked = Fraction(0), True, 0
    cs_max, cs_ok, cs_checked = Fraction(0), True, 0
    extras = {}
    for trial in range(trials):
        rng = random.Random(derive_seed(seed, p.name, trial))
        tseed = derive_seed(seed, p.name, "transform", trial)
        instance, planted = p.sample(rng)
        out, ctx = p.apply(instance, tseed)
        target_inst = out if out is not None else ctx.instance
        lifted = p.lift(instance, out, ctx, planted)
        v = value(target_inst, lifted)
        comp_min = v if comp_min is None else min(comp_min, v)
        comp_ok = comp_ok and v == target
        # soundness corpus
        cand = p.perturb_candidates(out, ctx)
        corpus = [lifted, random_assignment(target_inst, rng)]
        corpus += [corrupt(target_inst, lifted, f, rng, cand) for f in corruptions]
        for s in corpus:
            rec = p.recover(instance, out, ctx, s)
            ok, info = p.soundness(instance, target_inst, ctx, s, rec)
            sound_checked += 1
            sound_bad += not ok
            if info["out"] < 1:
                ratios.append((1 - info["in"]) / (1 - info["out"]))
        # instance sensitivity
        if p.sensitivity_trials is None or trial < p.sensitivity_trials:
            other = p.neighbor(instance, rng)
            sd = swap_distance(instance, other)
            if sd:
                out2, ctx2 = p.apply_neighbor(instance, other, out, ctx, tseed)
                if out is None:
                    if ctx2 is not None:
                        dist = positional_changes(ctx.instance, ctx2.instance)
                        ci_checked += 1
                        ratio = Fraction(dist, sd)
                        ci_max = max(ci_max, ratio)
                        ci_ok = ci_ok and ratio <= p.ci_bound(instance, out, ctx)
                else:
                    ratio = Fraction(p.distance(out, out2), sd)
                    ci_checked += 1
                    ci_max = max(ci_max, ratio)
                    ci_ok = ci_ok and ratio <= p.ci_bound(instance, out, ctx)
        # assignment sensitivity: one random and one lifted base point
        for base in (lifted, corpus[1]):
            other = perturb(target_inst, base, rng, cand)
            h = hamming(base, other)
            r1 = p.recover(instance, out, ctx, base)
            r2 = p.recover(instance, out, ctx, other)
            ratio = p.rec_distance(r1, r2) / h
            cs_checked += 1
            cs_max = max(cs_max, ratio)
            cs_ok = cs_ok and ratio <= p.csigma_bound(instance, out, ctx)
        for k, val in p.extra(instance, out, ctx, rng).items():
            if isinstance(val, bool):
                extras[k] = extras.get(k, True) and val
            else:
                extras.setdefault(k, []).append(val)
    ref = p.ci_bound(instance, out, ctx) if trials else p.declared_ci
    return ReductionReport(
        p.name,
        trials,
        seed,
        {"target": target, "min_value": comp_min, "pass": comp_ok},
        {
            "checked": sound_checked,
            "violations": sound_bad,
            "max_cost_ratio": max(ratios) if ratios else None,
            "pass": sound_bad == 0,
        },
        {"declared": ref, "measured_max": ci_max, "checked": ci_checked, "pass": ci_ok},
        {"declared": p.csigma_bound(instance, out, ctx) if trials else p.declared_csigma,
         "measured_max": cs_max, "checked": cs_checked, "pass": cs_ok},
        {k: (v if isinstance(v, bool) else v[:5]) for k, v in extras.items()},
    )


# ---------------------------------------------------------------- composition


def compose(reports, growth=None) -> dict:
    """Multiply measured C_I * C_sigma factors along a pipeline and record growth.

    ``growth`` optionally lists (stage, n, m) tuples for the size ledger.
    """
    factor_i = Fraction(1)
    factor_s = Fraction(1)
    rows = []
    for r in reports:
        ci = Fraction(r.c_i["measured_max"]) if r.c_i["checked"] else Fraction(1)
        cs = Fraction(r.c_sigma["measured_max"]) if r.c_sigma["checked"] else Fraction(1)
        ci = ci or Fraction(1)
        cs = cs or Fraction(1)
        factor_i *= ci
        factor_s *= cs
        rows.append({"pass": r.name, "c_i": str(ci), "c_sigma": str(cs), "passed": r.passed})
    out = {
        "stages": rows,
        "c_i_product": str(factor_i),
        "c_sigma_product": str(factor_s),
        "sensitivity_factor": str(factor_i * factor_s),
    }
    if growth:
        base = growth[0]
        out["growth"] = [
            {"stage": s, "n": n, "m": m, "n_ratio": str(Fraction(n, base[1]) if base[1] else 0)} for s, n, m in growth
        ]
    return out
