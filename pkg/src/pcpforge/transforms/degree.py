"""Degree reduction: replace each variable by a cloud wired with an equality expander."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

from ..csp import Edge, Equality, Instance, var_key
from ..errors import ExpanderNotFound, NonBinaryInstance, TooLarge
from ..graphs import build_expander
from ..parallel import derive_seed

MATERIALIZE_CAP = 10**6


@dataclass(frozen=True)
class CloudMap:
    """Original variable -> ordered cloud variables, plus the inverse."""

    clouds: dict
    inverse: dict

    def size(self, v) -> int:
        return len(self.clouds[v])

    def to_json(self) -> dict:
        return {
            "clouds": [[v, list(c)] for v, c in sorted(self.clouds.items(), key=lambda kv: var_key(kv[0]))]
        }


def cloud_var(v, i: int) -> str:
    return f"{v}#{i}"


def materialize(instance: Instance, cap: int = MATERIALIZE_CAP) -> Instance:
    """Turn rational weights into integer multiplicities with unit weight.

    Each edge gets multiplicity ``mass * L / g`` where ``L`` is the lcm of
    the weight denominators and ``g`` the gcd of the resulting integers.
    """
    masses = [e.mass for e in instance.edges]
    L = 1
    for w in masses:
        L = L * w.denominator // math.gcd(L, w.denominator)
    ints = [int(w * L) for w in masses]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    g = g or 1
    mults = [x // g for x in ints]
    if sum(mults) > cap:
        raise TooLarge(f"materializing needs {sum(mults)} edge copies, cap is {cap}")
    edges = [Edge(e.vars, e.relation, Fraction(1), k) for e, k in zip(instance.edges, mults) if k]
    return instance.replace(edges=tuple(edges))


def _uniform_weight(instance: Instance) -> bool:
    return len({e.weight for e in instance.edges}) <= 1


@functools.lru_cache(maxsize=256)
def cloud_graph(size: int, d0: int, seed):
    """Deterministic d0-regular expander on ``size`` cloud vertices."""
    if size == 1:
        if d0 % 2:
            raise ExpanderNotFound("a single-vertex cloud needs an even expander degree")
        return build_expander(1, d0, seed)
    return build_expander(size, d0, seed)


def degree_reduce(instance: Instance, d0: int, seed=0, cap: int = MATERIALIZE_CAP):
    """Return ``(reduced instance, CloudMap)``.

    Every edge copy (multiplicity expanded) becomes one inter-cloud edge with
    the original relation; each cloud of size s >= 1 carries an s-vertex
    d0-regular expander with Equality constraints. The output is unweighted
    and (d0+1)-regular. Non-uniform weights are materialized first.
    """
    if not instance.is_binary():
        raise NonBinaryInstance("degree reduction needs a binary instance")
    if not _uniform_weight(instance):
        instance = materialize(instance, cap)
    deg = instance.degrees()
    order = instance.sorted_variables()
    clouds = {v: tuple(cloud_var(v, i) for i in range(deg[v])) for v in order}
    inverse = {c: v for v, cs in clouds.items() for c in cs}
    nxt = {v: 0 for v in order}

    def take(v):
        c = clouds[v][nxt[v]]
        nxt[v] += 1
        return c

    edges = []
    for e in instance.edges:
        for _ in range(e.mult):
            u, v = e.vars
            edges.append(Edge((take(u), take(v)), e.relation))
    eq = Equality()
    for v in order:
        s = deg[v]
        if not s:
            continue
        g = cloud_graph(s, d0, derive_seed(seed, "cloud", s))
        cs = clouds[v]
        for a, b in g.edges:
            edges.append(Edge((cs[a], cs[b]), eq))
    variables = {c: instance.variables[v] for c, v in inverse.items()}
    marked = None
    if instance.marked is not None:
        marked = [c for v in instance.marked for c in clouds[v]]
    out = Instance(variables, instance.alphabets, edges, marked, validate=False)
    return out, CloudMap(clouds, inverse)


def lift_degree(cloud_map: CloudMap, sigma) -> dict:
    """Copy each label to its whole cloud."""
    return {c: sigma[v] for c, v in cloud_map.inverse.items()}
