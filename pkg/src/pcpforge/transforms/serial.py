"""Serial repetition: each new constraint is the AND of t uniformly drawn constraints."""

from __future__ import annotations

import random
from collections import Counter

from ..csp import Conjunction, Edge, Instance
from ..parallel import derive_seed


def serial_repeat(instance: Instance, t: int, M: int, seed=0) -> Instance:
    """M conjunctions of t edges drawn uniformly with replacement.

    Scopes list each distinct variable once, in first-seen order; the
    variable set is unchanged. Draw order follows a seed-derived stream.
    """
    if t < 1 or M < 1:
        raise ValueError("t and M must be positive")
    rng = random.Random(derive_seed(seed, "serial", t, M))
    edges = []
    for _ in range(M):
        picks = [rng.randrange(instance.m) for _ in range(t)]
        edges.append(conjoin([instance.edges[i] for i in picks]))
    return instance.replace(edges=tuple(edges))


def serial_draws(instance: Instance, t: int, M: int, seed=0) -> list:
    """The edge indices each repeated constraint uses, replaying ``serial_repeat``."""
    rng = random.Random(derive_seed(seed, "serial", t, M))
    return [[rng.randrange(instance.m) for _ in range(t)] for _ in range(M)]


def conjoin(parts) -> Edge:
    scope = []
    pos = {}
    comps = []
    for e in parts:
        idx = []
        for v in e.vars:
            if v not in pos:
                pos[v] = len(scope)
                scope.append(v)
            idx.append(pos[v])
        comps.append((tuple(idx), e.relation))
    return Edge(tuple(scope), Conjunction(len(scope), tuple(comps)))


def edge_usage(instance: Instance, t: int, M: int, seed=0) -> Counter:
    """How many repeated constraints draw each original edge (with repeats counted once)."""
    c = Counter()
    for picks in serial_draws(instance, t, M, seed):
        c.update(set(picks))
    return c
