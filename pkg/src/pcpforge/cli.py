"""Command-line entry point ``pcp-forge``.

Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from pathlib import Path

from . import csp
from .errors import ForgeError
from .generators import (
    CycleSpec,
    e2lin_cycle,
    random_instance,
    random_label_cover,
    random_regular_instance,
    two_swap_pair,
)
from .graphs import Graph
from .harness import REGISTRY, fmt, verify_reduction
from .nonsignal import (
    check_nonsignaling_sensitivity,
    constant_rule,
    even_degree_rule,
    local_minimum_rule,
    random_color_rule,
)
from .oracles import brute_force_opt, estimate_sensitivity, lexicographic_solver
from .pipeline import PipelineConfig, run_pipeline
from .recovery import recover_fglss
from .transforms.alphabet import alphabet_reduce
from .transforms.degree import degree_reduce
from .transforms.expanderize import expanderize
from .transforms.fglss import fglss, max_clique
from .transforms.gadgets import e3sat_to_3lin, to_e3sat
from .transforms.powering import power
from .transforms.serial import serial_repeat


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------- output


def _rows(obj):
    """Flatten a report to (key, value) rows for CSV output."""
    if isinstance(obj, dict):
        for k, v in obj.items():
            for sub, val in _rows(v):
                yield (f"{k}.{sub}" if sub else str(k)), val
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            for sub, val in _rows(v):
                yield (f"{i}.{sub}" if sub else str(i)), val
    else:
        yield "", obj if not isinstance(obj, list) else json.dumps(obj)


def _render(obj, form: str) -> str:
    obj = fmt(obj)
    if form == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _rows(obj):
            w.writerow([k, v])
        return buf.getvalue()
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(args, obj, name: str):
    text = _render(obj, args.format)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{args.format}").write_text(text)
    else:
        sys.stdout.write(text)


def _write_instance(args, instance, name: str):
    data = csp.serialize(instance)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.json").write_bytes(data)
    else:
        sys.stdout.write(data.decode())


def _load(path: str) -> csp.Instance:
    return csp.deserialize(Path(path).read_text())


def _load_assignment(path: str, instance: csp.Instance) -> dict:
    """A JSON object or a list of [variable, label] pairs; object keys match variables by text."""
    data = json.loads(Path(path).read_text())
    pairs = data.items() if isinstance(data, dict) else data
    by_text = {str(v): v for v in instance.variables}
    out = {}
    for v, x in pairs:
        v = csp.label_from_json(v) if isinstance(v, list) else v
        if v not in instance.variables and str(v) in by_text:
            v = by_text[str(v)]
        out[v] = csp.label_from_json(x)
    return out


# ---------------------------------------------------------------- commands


def cmd_gen(args):
    fam = args.family
    if fam == "e2lin-cycle":
        pattern = {"ones": (1,) * args.n, "zeros": (0,) * args.n}.get(args.pattern)
        if pattern is None:
            pattern = tuple(int(c) for c in args.pattern)
        _write_instance(args, e2lin_cycle(CycleSpec(args.n, pattern)), f"e2lin_cycle_{args.n}")
    elif fam == "two-swap-pair":
        a, b = two_swap_pair(args.n)
        _write_instance(args, a, f"pair_{args.n}_a")
        _write_instance(args, b, f"pair_{args.n}_b")
    elif fam == "random":
        inst = random_instance(args.n, args.m, args.q, args.relations, seed=args.seed)
        _write_instance(args, inst, f"random_{args.n}_{args.m}_{args.q}")
    elif fam == "regular":
        inst, _ = random_regular_instance(args.n, args.d, args.q, seed=args.seed)
        _write_instance(args, inst, f"regular_{args.n}_{args.d}")
    elif fam == "label-cover":
        inst, _ = random_label_cover(args.n, args.n, args.m, args.q, args.q, seed=args.seed)
        _write_instance(args, inst, f"label_cover_{args.n}_{args.m}")
    return 0


def cmd_transform(args):
    inst = _load(args.instance)
    p = args.pass_name
    if p == "degree-reduce":
        out, _ = degree_reduce(inst, args.d0 or 3, args.seed, args.cap)
    elif p == "expanderize":
        out = expanderize(inst, args.d0 or 4, args.seed)
    elif p == "power":
        out = power(inst, args.t, args.mode, args.count, args.seed, args.cap)
    elif p == "alphabet-reduce":
        out = alphabet_reduce(inst, args.samples, args.seed).instance
    elif p == "serial-repeat":
        out = serial_repeat(inst, args.t, args.count or inst.m, args.seed)
    elif p == "e3sat":
        out, _ = to_e3sat(inst)
    elif p == "3lin":
        out = e3sat_to_3lin(inst)
    else:
        raise UsageError(f"unknown pass {p!r}")
    _write_instance(args, out, p)
    return 0


def cmd_opt(args):
    inst = _load(args.instance)
    best, sigma = brute_force_opt(inst, args.cap)
    _emit(args, {"opt": best, "witness": [[v, csp.label_to_json(sigma[v])] for v in inst.sorted_variables()]}, "opt")
    return 0


def cmd_eval(args):
    inst = _load(args.instance)
    sigma = _load_assignment(args.assignment, inst)
    _emit(args, {"value": csp.value(inst, sigma), "cost": csp.cost(inst, sigma)}, "eval")
    return 0


def _algorithm(name: str):
    if name == "constant":
        return lambda inst, rng: csp.Assignment({v: inst.alphabet(v).smallest() for v in inst.variables})
    if name == "solver":
        return lexicographic_solver
    if name == "random":
        return lambda inst, rng: csp.Assignment(
            {v: inst.alphabet(v).label_at(rng.randrange(inst.alphabet(v).size)) for v in inst.sorted_variables()}
        )
    raise UsageError(f"unknown algorithm {name!r}")


def cmd_sens(args):
    inst = _load(args.instance)
    rep = estimate_sensitivity(_algorithm(args.algorithm), inst, args.policy, args.samples, args.seed)
    rep["edges"] = [r.row() for r in rep["edges"]]
    _emit(args, rep, "sens")
    return 0


def cmd_verify(args):
    if args.pass_name not in REGISTRY:
        raise UsageError(f"unknown pass {args.pass_name!r}; choose from {sorted(REGISTRY)}")
    trials = args.trials if args.trials is not None else REGISTRY[args.pass_name].default_trials
    rep = verify_reduction(args.pass_name, trials=trials, seed=args.seed)
    _emit(args, rep.to_json(), f"verify-{args.pass_name}")
    return 0 if rep.passed else 1


def cmd_pipeline(args):
    inst = _load(args.instance)
    cfg = PipelineConfig(
        rounds=args.rounds,
        t=args.t,
        d0=args.d0,
        power_mode=args.mode,
        power_count=args.count,
        alphabet_samples=args.samples,
        ledger_trials=args.ledger_trials,
        seed=args.seed,
        out_dir=args.out or "pcpforge-out",
    )
    rep = run_pipeline(cfg, inst)
    if not args.out:
        sys.stdout.write(_render(rep, args.format))
    return 0 if rep["all_witnesses_one"] else 1


def cmd_fglss(args):
    inst = _load(args.instance)
    g, legend = fglss(inst)
    clique = max_clique(g)
    sigma = recover_fglss(inst, legend, g, clique)
    sat = sum(csp.satisfied(inst, sigma, i) for i in range(inst.m))
    rep = {
        "vertices": g.n,
        "edges": g.m,
        "max_clique": len(clique),
        "constraints": inst.m,
        "recovered_satisfied": sat,
        "recovered_value": csp.value(inst, sigma),
        "ok": sat >= len(clique),
    }
    _emit(args, rep, "fglss")
    return 0 if rep["ok"] else 1


RULES = {
    "constant": lambda t: constant_rule(),
    "even-degree": lambda t: even_degree_rule(),
    "local-min": local_minimum_rule,
    "color": random_color_rule,
}


def cmd_nonsig(args):
    if args.graph:
        g = Graph.from_text(Path(args.graph).read_text())
    else:
        from .generators import random_regular_edges

        g = Graph(args.n, tuple(random_regular_edges(args.n, args.d, random.Random(args.seed))))
    alg = RULES[args.rule](args.t)
    rep = check_nonsignaling_sensitivity(alg, g, args.samples, args.seed)
    _emit(args, rep, "nonsig")
    return 0 if rep["pass"] else 1


def cmd_report(args):
    rows = []
    for path in args.reports:
        data = json.loads(Path(path).read_text())
        if "stages" in data and "ledger" in data:
            rows.append(
                {
                    "file": path,
                    "kind": "pipeline",
                    "ok": data["all_witnesses_one"],
                    "sensitivity_factor": data["ledger"]["sensitivity_factor"],
                }
            )
        elif "passed" in data:
            rows.append(
                {
                    "file": path,
                    "kind": "verify",
                    "pass": data["pass"],
                    "ok": data["passed"],
                    "c_i": data["c_i"]["measured_max"],
                    "c_sigma": data["c_sigma"]["measured_max"],
                }
            )
        else:
            rows.append({"file": path, "kind": "unknown", "ok": False})
    if args.format == "csv":
        keys = sorted({k for r in rows for k in r})
        buf = io.StringIO()
        w = csv.DictWriter(buf, keys, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        sys.stdout.write(json.dumps(rows, sort_keys=True, indent=2) + "\n")
    return 0 if all(r["ok"] for r in rows) else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    def options(suppress: bool) -> argparse.ArgumentParser:
        # subcommand copies use SUPPRESS so they never overwrite values given before the subcommand
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        o = _Parser(add_help=False)
        o.add_argument("--seed", type=int, default=d(0))
        o.add_argument("--cap", type=int, default=d(10**6))
        o.add_argument("--format", choices=("json", "csv"), default=d("json"))
        o.add_argument("--out", default=d(None), help="output directory (default: standard output)")
        return o

    p = _Parser(prog="pcp-forge", parents=[options(False)], description="CSP reductions and sensitivity checks")
    common = options(True)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate an instance")
    g.add_argument("family", choices=("e2lin-cycle", "two-swap-pair", "random", "regular", "label-cover"))
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--m", type=int, default=8)
    g.add_argument("--q", type=int, default=2)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--pattern", default="ones")
    g.add_argument("--relations", default="tuples")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("transform", parents=[common], help="apply one reduction")
    t.add_argument("pass_name", metavar="pass")
    t.add_argument("instance")
    t.add_argument("--d0", type=int)
    t.add_argument("--t", type=int, default=1)
    t.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    t.add_argument("--count", type=int)
    t.add_argument("--samples", type=int, default=2)
    t.set_defaults(func=cmd_transform)

    o = sub.add_parser("opt", parents=[common], help="exact optimum by enumeration")
    o.add_argument("instance")
    o.set_defaults(func=cmd_opt)

    e = sub.add_parser("eval", parents=[common], help="value and cost of an assignment")
    e.add_argument("instance")
    e.add_argument("assignment")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sens", parents=[common], help="estimate sensitivity of a stock algorithm")
    s.add_argument("instance")
    s.add_argument("--algorithm", choices=("constant", "solver", "random"), default="solver")
    s.add_argument("--policy", choices=("delete", "swap"), default="delete")
    s.add_argument("--samples", type=int, default=16)
    s.set_defaults(func=cmd_sens)

    v = sub.add_parser("verify", parents=[common], help="check the four obligations of a pass")
    v.add_argument("pass_name", metavar="pass")
    v.add_argument("--trials", type=int)
    v.set_defaults(func=cmd_verify)

    pl = sub.add_parser("pipeline", parents=[common], help="run the round pipeline")
    pl.add_argument("instance")
    pl.add_argument("--rounds", type=int, default=1)
    pl.add_argument("--t", type=int, default=1)
    pl.add_argument("--d0", type=int)
    pl.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    pl.add_argument("--count", type=int)
    pl.add_argument("--samples", type=int, default=1)
    pl.add_argument("--ledger-trials", type=int, default=1)
    pl.set_defaults(func=cmd_pipeline)

    f = sub.add_parser("fglss", parents=[common], help="clique reduction and recovery")
    f.add_argument("instance")
    f.set_defaults(func=cmd_fglss)

    n = sub.add_parser("nonsig", parents=[common], help="locality-to-sensitivity check")
    n.add_argument("--graph")
    n.add_argument("--n", type=int, default=10)
    n.add_argument("--d", type=int, default=3)
    n.add_argument("--t", type=int, default=1)
    n.add_argument("--rule", choices=sorted(RULES), default="local-min")
    n.add_argument("--samples", type=int, default=8)
    n.set_defaults(func=cmd_nonsig)

    r = sub.add_parser("report", parents=[common], help="summarize report files")
    r.add_argument("reports", nargs="+")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_usage(sys.stderr)
            raise UsageError("a subcommand is required")
        return args.func(args)
    except UsageError as exc:
        print(f"pcp-forge: error: {exc}", file=sys.stderr)
        return 2
    except (ForgeError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"pcp-forge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
