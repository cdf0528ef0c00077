"""Round-structured pipeline: expanderize, power, degree-reduce, alphabet-reduce, degree-reduce.

The last round drops its trailing degree reduction. Every stage output, its
statistics and the canonical satisfying lift are written to disk, and a
composed harness ledger closes the report.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from .csp import Instance, content_hash, label_to_json, serialize, value, var_key
from .errors import ExpanderNotFound, ForgeError
from .graphs import certified_degree, lambda_
from .harness import compose, verify_reduction
from .oracles import brute_force_opt
from .parallel import derive_seed
from .transforms.alphabet import K_CAP, alphabet_reduce
from .transforms.common import instance_graph
from .transforms.degree import cloud_graph, degree_reduce, lift_degree
from .transforms.expanderize import expanderize
from .transforms.powering import STATE_CAP, lift_power, power

PIPELINE_VERSION = 1
LAMBDA_CAP = 1024


class PipelineError(ForgeError):
    def __init__(self, stage: str, round_: int, cause: Exception):
        self.stage, self.round, self.cause = stage, round_, cause
        super().__init__(f"round {round_}, stage {stage}: {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class PipelineConfig:
    rounds: int = 1
    t: int = 1
    d0: int | None = None  # expander degree; None picks the smallest certified one
    cloud_degree: int | None = None  # degree-reduction expander degree; None picks per instance
    power_mode: str = "exact"
    power_count: int | None = None
    alphabet_samples: int = 1
    ledger_trials: int = 1
    seed: int = 0
    state_cap: int = STATE_CAP
    k_cap: int = K_CAP
    out_dir: str = "pcpforge-out"

    def __post_init__(self):
        for name in ("state_cap", "k_cap", "alphabet_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.rounds < 0 or self.t < 1 or self.ledger_trials < 0:
            raise ValueError("rounds and ledger_trials must be non-negative and t positive")
        # a second round would need cloud expanders and a uniform alphabet the first round does not provide
        if self.rounds > 1:
            raise ValueError("only rounds in {0, 1} are supported")

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("out_dir")
        return d


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def pick_cloud_degree(instance: Instance, seed, lo: int = 3, hi: int = 64) -> int:
    """Smallest degree for which every cloud size gets a certified expander."""
    sizes = sorted({d for d in instance.degrees().values() if d})
    for d0 in range(lo, hi + 1):
        try:
            for s in sizes:
                cloud_graph(s, d0, derive_seed(seed, "cloud", s))
            return d0
        except ExpanderNotFound:
            continue
    raise ExpanderNotFound(f"no cloud degree in [{lo}, {hi}] works for cloud sizes {sizes}")


def stats(instance: Instance) -> dict:
    degs = instance.degrees()
    out = {
        "n": instance.n,
        "m": instance.m,
        "max_degree": max(degs.values(), default=0),
        "regular": len(set(degs.values())) <= 1,
        "alphabet": max((instance.alphabet(v).size for v in instance.variables), default=0),
        "total_weight": str(instance.total_weight),
    }
    if instance.is_binary() and instance.n <= LAMBDA_CAP and out["regular"]:
        g, _, _ = instance_graph(instance)
        out["lambda"] = round(float(lambda_(g)), 9)
    return out


def _witness_json(sigma) -> list:
    return [[v, label_to_json(sigma[v])] for v in sorted(sigma, key=var_key)]


def canonical_witness(instance: Instance) -> dict:
    best, sigma = brute_force_opt(instance)
    if best != 1:
        raise ValueError("pipeline input is not satisfiable")
    return dict(sigma)


def _stage_list(config: PipelineConfig):
    for r in range(config.rounds):
        names = ["expanderize", "power", "degree-reduce", "alphabet-reduce"]
        if r < config.rounds - 1:
            names.append("degree-reduce")
        for name in names:
            yield r, name


def _apply(name: str, instance: Instance, sigma, config: PipelineConfig, seed):
    """One stage: returns (output instance, lifted witness, stage parameters)."""
    if name == "expanderize":
        d0 = config.d0 or certified_degree(instance.n, seed=seed)
        return expanderize(instance, d0, seed), dict(sigma), {"d0": d0}
    if name == "power":
        out = power(instance, config.t, config.power_mode, config.power_count, seed, config.state_cap)
        return out, lift_power(out, sigma), {"t": config.t, "mode": config.power_mode}
    if name == "degree-reduce":
        d0 = config.cloud_degree or pick_cloud_degree(instance, seed)
        out, cm = degree_reduce(instance, d0, seed)
        return out, lift_degree(cm, sigma), {"d0": d0}
    if name == "alphabet-reduce":
        red = alphabet_reduce(instance, config.alphabet_samples, seed, k_cap=config.k_cap)
        return red.instance, red.lift(sigma), red.report()
    raise ValueError(f"unknown stage {name!r}")


def run_pipeline(config: PipelineConfig, instance: Instance, witness=None) -> dict:
    """Run every stage, write its output, and return the report dictionary."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sigma = dict(witness) if witness is not None else canonical_witness(instance)
    rows = [
        {
            "index": 0,
            "round": None,
            "stage": "input",
            "hash": content_hash(instance),
            "stats": stats(instance),
            "witness_value": str(value(instance, sigma)),
        }
    ]
    growth = [("input", instance.n, instance.m)]
    current = instance
    for i, (r, name) in enumerate(_stage_list(config), start=1):
        seed = derive_seed(config.seed, "round", r, name, i)
        try:
            current, sigma, params = _apply(name, current, sigma, config, seed)
        except ForgeError as exc:
            raise PipelineError(name, r, exc) from exc
        val = value(current, sigma)
        stem = f"{i:02d}-r{r}-{name}"
        (out_dir / f"{stem}.json").write_bytes(serialize(current))
        (out_dir / f"{stem}.witness.json").write_text(_dumps(_witness_json(sigma)))
        rows.append(
            {
                "index": i,
                "round": r,
                "stage": name,
                "params": params,
                "file": f"{stem}.json",
                "hash": content_hash(current),
                "stats": stats(current),
                "witness_value": str(val),
            }
        )
        growth.append((stem, current.n, current.m))
        if val != 1:
            raise PipelineError(name, r, ForgeError(f"lifted witness has value {val}"))
    reports, cache = [], {}
    for _, name in _stage_list(config):
        if name not in cache:
            cache[name] = verify_reduction(name, trials=config.ledger_trials, seed=derive_seed(config.seed, "ledger", name))
        reports.append(cache[name])
    report = {
        "version": PIPELINE_VERSION,
        "config": config.to_json(),
        "seed": config.seed,
        "input_hash": rows[0]["hash"],
        "stages": rows,
        "all_witnesses_one": all(Fraction(row["witness_value"]) == 1 for row in rows),
        "ledger": compose(reports, growth),
        "pass_reports": {k: v.to_json() for k, v in sorted(cache.items())},
    }
    (out_dir / "report.json").write_text(_dumps(report))
    return report


def report_bytes(report: dict) -> bytes:
    return _dumps(report).encode()
