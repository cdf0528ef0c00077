"""Locality-t algorithms: outputs that read only a vertex's radius-t ball and a shared seed.

An edge can influence vertex v only when both endpoints lie in the t-ball
of v; deleting it leaves every other view, and therefore every other output,
unchanged under the same seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .csp import Assignment, Empirical
from .graphs import Graph, bfs
from .oracles import emd_exact
from .parallel import derive_seed, pmap


@dataclass(frozen=True)
class BallView:
    """What a vertex sees: ball vertices with distances and the edges inside the ball."""

    center: int
    radius: int
    distances: dict  # vertex -> distance from center
    edges: tuple  # (a, b) with both ends in the ball, sorted

    def degree(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)

    @property
    def vertices(self):
        return sorted(self.distances)


def extract_ball(g: Graph, v: int, t: int) -> BallView:
    dist = bfs(g, v, t)
    inside = tuple(sorted(tuple(sorted(e)) for e in g.edges if e[0] in dist and e[1] in dist))
    return BallView(v, t, dist, inside)


def vertex_random(seed, v) -> random.Random:
    return random.Random(derive_seed(seed, "vertex", v))


@dataclass(frozen=True)
class LocalAlgorithm:
    """``rule(view, seed)`` returns the label of ``view.center``."""

    t: int
    rule: Callable
    name: str = "rule"


def run_local(alg: LocalAlgorithm, g: Graph, seed=0) -> dict:
    return dict(zip(range(g.n), pmap(lambda v: alg.rule(extract_ball(g, v, alg.t), seed), range(g.n))))


# ---------------------------------------------------------------- stock rules


def constant_rule(label=0) -> LocalAlgorithm:
    return LocalAlgorithm(0, lambda view, seed: label, f"constant-{label}")


def even_degree_rule() -> LocalAlgorithm:
    """In the set iff the vertex degree is even; degree is visible at radius 1."""
    return LocalAlgorithm(1, lambda view, seed: int(view.degree(view.center) % 2 == 0), "even-degree")


def local_minimum_rule(t: int = 1) -> LocalAlgorithm:
    """In the set iff the vertex's seeded random priority is the smallest in its ball."""

    def rule(view, seed):
        pr = {u: vertex_random(seed, u).random() for u in view.distances}
        return int(min(pr, key=lambda u: (pr[u], u)) == view.center)

    return LocalAlgorithm(t, rule, f"local-min-{t}")


def random_color_rule(t: int = 2, colors: int = 3) -> LocalAlgorithm:
    """Seeded colour of the vertex, shifted by the number of edges it sees."""

    def rule(view, seed):
        base = vertex_random(seed, view.center).randrange(colors)
        return (base + len(view.edges)) % colors

    return LocalAlgorithm(t, rule, f"color-{t}")


# ---------------------------------------------------------------- sensitivity check


def affected_set(g: Graph, edge_index: int, t: int) -> list:
    """Vertices whose t-ball contains both endpoints of the edge."""
    a, b = g.edges[edge_index]
    da, db = bfs(g, a, t), bfs(g, b, t)
    return sorted(set(da) & set(db))


def _labels(out: dict) -> Assignment:
    return Assignment(out)


def check_nonsignaling_sensitivity(alg: LocalAlgorithm, g: Graph, samples: int = 16, seed=0) -> dict:
    """Per edge: exact affected set, its 2*Delta^t bound, and the shared-seed coupling.

    For each sample seed the algorithm runs on G and on G - e; the mean
    Hamming distance of the paired outputs bounds the EMD between the two
    output laws, and the exact EMD between the empirical laws is reported.
    """
    delta = g.max_degree
    bound = 2 * delta**alg.t
    seeds = [derive_seed(seed, "sample", s) for s in range(samples)]
    base = [run_local(alg, g, s) for s in seeds]
    rows = []
    ok = True
    for i in range(g.m):
        aff = affected_set(g, i, alg.t)
        h = g.without_edge(i)
        other = [run_local(alg, h, s) for s in seeds]
        hams = []
        outside_same = True
        affs = set(aff)
        for x, y in zip(base, other):
            diff = [v for v in x if x[v] != y[v]]
            hams.append(len(diff))
            outside_same = outside_same and all(v in affs for v in diff)
        coupling = Fraction(sum(hams), len(hams))
        emd, _ = emd_exact(
            Empirical.from_samples(_labels(x) for x in base), Empirical.from_samples(_labels(y) for y in other)
        )
        good = len(aff) <= bound and coupling <= len(aff) and emd <= coupling and outside_same
        ok = ok and good
        rows.append(
            {
                "edge": i,
                "affected": len(aff),
                "bound": bound,
                "coupling": coupling,
                "emd": emd,
                "pass": good,
            }
        )
    return {
        "algorithm": alg.name,
        "t": alg.t,
        "max_degree": delta,
        "bound": bound,
        "max_affected": max((r["affected"] for r in rows), default=0),
        "max_emd": max((r["emd"] for r in rows), default=Fraction(0)),
        "edges": rows,
        "pass": ok,
    }
