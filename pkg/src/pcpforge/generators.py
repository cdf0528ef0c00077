"""Instance families: E2LIN cycles, the two-swap adversarial pair, random instances."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .csp import (
    BOOLEAN,
    Edge,
    Instance,
    Parity,
    Projection,
    dense,
    single_alphabet_instance,
    tuples,
)
from .errors import OddLength


@dataclass(frozen=True)
class CycleSpec:
    n: int
    pattern: tuple

    def __post_init__(self):
        object.__setattr__(self, "pattern", tuple(int(b) for b in self.pattern))
        if self.n % 2:
            raise OddLength(f"cycle length {self.n} is odd")
        if self.n < 4:
            raise ValueError("cycle length must be at least 4")
        if len(self.pattern) != self.n or any(b not in (0, 1) for b in self.pattern):
            raise ValueError("pattern must hold one parity bit per cycle edge")


def parity_cycle(n: int, pattern) -> Instance:
    """Cycle v_1..v_n with edge i = (v_i, v_{i+1 mod n}) carrying parity ``pattern[i-1]``.

    No parity restriction on n; used for odd-cycle oracles.
    """
    pattern = tuple(pattern)
    edges = [Edge((i, i % n + 1), Parity(pattern[i - 1], 2)) for i in range(1, n + 1)]
    return single_alphabet_instance(range(1, n + 1), BOOLEAN, edges, name="bit")


def e2lin_cycle(spec: CycleSpec) -> Instance:
    return parity_cycle(spec.n, spec.pattern)


def ones_cycle(n: int) -> Instance:
    return e2lin_cycle(CycleSpec(n, (1,) * n))


def two_swap_pair(n: int) -> tuple[Instance, Instance]:
    """The all-ones cycle and the copy with edges (v_{n/2}, v_{n/2+1}) and (v_n, v_1) set to parity 0."""
    if n % 2:
        raise OddLength(f"cycle length {n} is odd")
    base = ones_cycle(n)
    pattern = [1] * n
    pattern[n // 2 - 1] = 0
    pattern[n - 1] = 0
    return base, e2lin_cycle(CycleSpec(n, tuple(pattern)))


def alternating(n: int, first: int = 0) -> dict:
    return {i: (first + i - 1) % 2 for i in range(1, n + 1)}


# ---------------------------------------------------------------- random


def _random_relation(rng, q, family, planted=None):
    if family == "parity":
        if planted is not None:
            return Parity((planted[0] + planted[1]) % 2, 2)
        return Parity(rng.randrange(2), 2)
    if family == "equality":
        return tuples([(a, a) for a in range(q)], 2)
    rows = [(a, b) for a in range(q) for b in range(q) if rng.random() < 0.5]
    if planted is not None and planted not in rows:
        rows.append(planted)
    if not rows:
        rows = [(rng.randrange(q), rng.randrange(q))]
    return tuples(rows, 2)


def random_instance(n: int, m: int, q: int, family: str = "tuples", seed=0) -> Instance:
    """Random binary instance on variables 0..n-1 over labels 0..q-1.

    Families: ``tuples`` (each pair accepted w.p. 1/2), ``parity`` (Boolean
    parity edges), ``satisfiable-planted`` and ``parity-planted`` (relations
    forced to contain a planted assignment).
    """
    rng = random.Random(f"random_instance:{seed}")
    planted_mode = family.endswith("planted")
    base = {"satisfiable-planted": "tuples", "parity-planted": "parity"}.get(family, family)
    if base == "parity":
        q = 2
    plant = {v: rng.randrange(q) for v in range(n)}
    edges = []
    for _ in range(m):
        u, v = rng.sample(range(n), 2) if n > 1 else (0, 0)
        rel = _random_relation(rng, q, base, (plant[u], plant[v]) if planted_mode else None)
        edges.append(Edge((u, v), rel))
    alph = BOOLEAN if q == 2 and base == "parity" else dense(q)
    return single_alphabet_instance(range(n), alph, edges)


def planted_assignment(n: int, q: int, family: str = "satisfiable-planted", seed=0) -> dict:
    """The assignment planted by ``random_instance`` with the same arguments."""
    rng = random.Random(f"random_instance:{seed}")
    if family == "parity-planted":
        q = 2
    return {v: rng.randrange(q) for v in range(n)}


def random_regular_edges(n: int, d: int, rng: random.Random, simple: bool = True, tries: int = 1000):
    """Edge list of a random d-regular graph (configuration model, rejection for simplicity)."""
    if (n * d) % 2:
        raise ValueError("n*d must be even")
    for _ in range(tries):
        stubs = [v for v in range(n) for _ in range(d)]
        rng.shuffle(stubs)
        pairs = [tuple(sorted((stubs[i], stubs[i + 1]))) for i in range(0, len(stubs), 2)]
        if not simple or (all(a != b for a, b in pairs) and len(set(pairs)) == len(pairs)):
            return sorted(pairs)
    raise ValueError(f"no simple {d}-regular graph on {n} vertices found")


def random_regular_instance(n: int, d: int, q: int = 2, family: str = "parity-planted", seed=0):
    """Random d-regular binary instance with a planted satisfying assignment.

    Returns ``(instance, planted)``.
    """
    rng = random.Random(f"regular:{seed}")
    plant = {v: rng.randrange(q if family != "parity-planted" else 2) for v in range(n)}
    edges = []
    for u, v in random_regular_edges(n, d, rng):
        if family == "parity-planted":
            rel = Parity((plant[u] + plant[v]) % 2, 2)
        else:
            rel = _random_relation(rng, q, "tuples", (plant[u], plant[v]))
        edges.append(Edge((u, v), rel))
    alph = BOOLEAN if family == "parity-planted" else dense(q)
    return single_alphabet_instance(range(n), alph, edges), plant


def random_label_cover(nu: int, nv: int, m: int, qu: int, qv: int, seed=0, planted: bool = True):
    """Bipartite projection instance with left vars ``("u", i)`` encoded as ``u{i}``.

    Returns ``(instance, planted assignment or None)``.
    """
    rng = random.Random(f"label_cover:{seed}")
    left = [f"u{i}" for i in range(nu)]
    right = [f"v{j}" for j in range(nv)]
    plant = {x: rng.randrange(qu) for x in left}
    plant.update({y: rng.randrange(qv) for y in right})
    edges = []
    for _ in range(m):
        u, v = rng.choice(left), rng.choice(right)
        phi = [rng.randrange(qv) for _ in range(qu)]
        if planted:
            phi[plant[u]] = plant[v]
        edges.append(Edge((u, v), Projection(tuple(phi))))
    variables = {x: "U" for x in left}
    variables.update({y: "V" for y in right})
    inst = Instance(variables, {"U": dense(qu), "V": dense(qv)}, edges)
    return inst, (plant if planted else None)
