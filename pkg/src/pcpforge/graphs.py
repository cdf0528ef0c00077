"""Multigraphs, spectra, certified random expanders and exact walk kernels.

Vertices are ``0..n-1``. A self-loop contributes two endpoints to its vertex,
so it adds 2 to the degree and 2 to the diagonal of the adjacency matrix;
a simple random walk picks one of the ``deg(v)`` endpoint slots uniformly.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ExpanderNotFound, NotRegular, ParseError, SizeMismatch, TooLarge

DENSE_CAP = 4096
WALK_CAP = 10**7
EXPANDER_RETRIES = 64


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple = ()
    _deg: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        deg = [0] * self.n
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            deg[u] += 1
            deg[v] += 1
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        object.__setattr__(self, "_deg", tuple(deg))

    @property
    def degrees(self) -> tuple:
        return self._deg

    def degree(self, v: int) -> int:
        return self._deg[v]

    @property
    def m(self) -> int:
        return len(self.edges)

    def is_regular(self) -> bool:
        return self.n > 0 and len(set(self._deg)) == 1

    def regular_degree(self) -> int:
        if not self.is_regular():
            raise NotRegular("graph is not regular")
        return self._deg[0]

    @property
    def max_degree(self) -> int:
        return max(self._deg) if self._deg else 0

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for u, v in self.edges:
            a[u, v] += 1
            a[v, u] += 1
        return a

    @property
    def slots(self) -> tuple:
        """Per vertex, the ``(neighbor, edge index)`` endpoint slots in edge order."""
        cached = self.__dict__.get("_slots")
        if cached is None:
            out = [[] for _ in range(self.n)]
            for i, (u, v) in enumerate(self.edges):
                out[u].append((v, i))
                out[v].append((u, i))
            cached = tuple(tuple(s) for s in out)
            self.__dict__["_slots"] = cached
        return cached

    def neighbors(self, v: int) -> set:
        return {w for w, _ in self.slots[v]}

    def without_edge(self, i: int) -> "Graph":
        return Graph(self.n, self.edges[:i] + self.edges[i + 1 :])

    def to_text(self) -> str:
        lines = [f"{self.n} {self.max_degree}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not rows or len(rows[0]) != 2:
            raise ParseError("missing 'n d' header", "line 1")
        try:
            n, d = int(rows[0][0]), int(rows[0][1])
            edges = []
            for i, r in enumerate(rows[1:], start=2):
                if len(r) != 2:
                    raise ParseError("edge lines need two endpoints", f"line {i}")
                edges.append((int(r[0]), int(r[1])))
            g = Graph(n, tuple(edges))
        except ValueError as exc:
            raise ParseError(str(exc), "edges") from None
        if g.max_degree != d:
            raise ParseError(f"header degree {d} does not match max degree {g.max_degree}", "line 1")
        return g


def superimpose(g: Graph, h: Graph) -> Graph:
    if g.n != h.n:
        raise SizeMismatch(f"cannot superimpose graphs on {g.n} and {h.n} vertices")
    return Graph(g.n, g.edges + h.edges)


def cycle(n: int) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


# ---------------------------------------------------------------- spectra


def spectrum(g: Graph) -> np.ndarray:
    """Adjacency eigenvalues in decreasing order (dense solve)."""
    if g.n > DENSE_CAP:
        raise TooLarge(f"dense eigensolve capped at n={DENSE_CAP}")
    return np.linalg.eigvalsh(g.adjacency().astype(float))[::-1]


def lambda_certified(g: Graph) -> tuple[float, float]:
    """Return ``(lambda, bound)`` where lambda = max(lambda_2, |lambda_n|).

    ``bound`` is the largest eigenpair residual norm, which bounds the
    distance from each computed eigenvalue to the true spectrum.
    """
    if g.n == 0:
        raise ValueError("lambda of the empty graph is undefined")
    if g.n == 1:
        return 0.0, 0.0
    a = g.adjacency().astype(float)
    if g.n <= DENSE_CAP:
        vals, vecs = np.linalg.eigh(a)
        vals = vals[::-1]
        vecs = vecs[:, ::-1]
        res = np.linalg.norm(a @ vecs - vecs * vals, axis=0)
        lam = max(vals[1], abs(vals[-1]))
        return float(lam), float(res.max())
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import eigsh

    sp = csr_matrix(a)
    top, tv = eigsh(sp, k=2, which="LA")
    bot, bv = eigsh(sp, k=1, which="SA")
    order = np.argsort(top)[::-1]
    top, tv = top[order], tv[:, order]
    res = max(
        float(np.linalg.norm(sp @ tv[:, 1] - top[1] * tv[:, 1])),
        float(np.linalg.norm(sp @ bv[:, 0] - bot[0] * bv[:, 0])),
    )
    return float(max(top[1], abs(bot[0]))), res


def lambda_(g: Graph) -> float:
    return lambda_certified(g)[0]


# ---------------------------------------------------------------- expanders


def _config_model(n: int, d: int, rng: random.Random) -> Graph:
    stubs = [v for v in range(n) for _ in range(d)]
    rng.shuffle(stubs)
    return Graph(n, tuple((stubs[i], stubs[i + 1]) for i in range(0, len(stubs), 2)))


def build_expander(n: int, d0: int, seed=0, retries: int = EXPANDER_RETRIES) -> Graph:
    """A d0-regular multigraph on n vertices certified to have lambda <= d0/2."""
    if n < 1 or d0 < 1:
        raise ExpanderNotFound(f"no expander with n={n}, d0={d0}")
    if n == 1:
        if d0 % 2:
            raise ExpanderNotFound("a single vertex needs an even degree (self-loops)")
        return Graph(1, tuple((0, 0) for _ in range(d0 // 2)))
    if (n * d0) % 2:
        raise ExpanderNotFound(f"n*d0 = {n * d0} is odd; no {d0}-regular graph on {n} vertices")
    for attempt in range(retries):
        g = _config_model(n, d0, random.Random(f"expander:{seed}:{n}:{d0}:{attempt}"))
        lam, err = lambda_certified(g)
        if lam + err <= d0 / 2 + 1e-9:
            return g
    raise ExpanderNotFound(f"no certified ({n}, {d0}, {d0 / 2}) expander within {retries} tries")


# ---------------------------------------------------------------- distances


def bfs(g: Graph, source: int, radius: int | None = None) -> dict:
    dist = {source: 0}
    q = deque([source])
    while q:
        u = q.popleft()
        if radius is not None and dist[u] >= radius:
            continue
        for w, _ in g.slots[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def ball(g: Graph, v: int, t: int) -> frozenset:
    return frozenset(bfs(g, v, t))


def distance_matrix(g: Graph) -> list:
    """All-pairs hop distances; unreachable pairs are absent from each row."""
    return [bfs(g, v) for v in range(g.n)]


def is_connected(g: Graph) -> bool:
    return g.n > 0 and len(bfs(g, 0)) == g.n


# ---------------------------------------------------------------- walks


@dataclass(frozen=True)
class WalkKernel:
    """Exact stopping distribution of a walk that moves, then halts w.p. 1/t,
    conditioned on halting within t moves."""

    graph: Graph
    t: int
    rows: tuple  # rows[v] = {w: Fraction}

    def row(self, v: int) -> dict:
        return self.rows[v]

    def weights(self) -> list:
        return stop_weights(self.t)


def stop_weights(t: int) -> list:
    """w_l = (1/t)(1-1/t)^(l-1) for l = 1..t."""
    q = 1 - Fraction(1, t)
    return [Fraction(1, t) * q ** (ell - 1) for ell in range(1, t + 1)]


def bsrw_kernel(g: Graph, t: int, cap: int = 2048) -> WalkKernel:
    if t < 1:
        raise ValueError("horizon must be at least 1")
    d = g.regular_degree()
    if g.n > cap:
        raise TooLarge(f"exact kernel capped at n={cap}")
    a = [[int(x) for x in row] for row in g.adjacency()]
    w = stop_weights(t)
    total = sum(w, Fraction(0))
    # acc accumulates sum_l w_l A^l / d^l with one common denominator per power
    acc = [[Fraction(0)] * g.n for _ in range(g.n)]
    power = [row[:] for row in a]
    for ell in range(1, t + 1):
        coef = w[ell - 1] / (d**ell * total)
        for i in range(g.n):
            ai, pi = acc[i], power[i]
            for j in range(g.n):
                if pi[j]:
                    ai[j] += coef * pi[j]
        if ell < t:
            power = _int_matmul(power, a)
    rows = tuple({j: x for j, x in enumerate(r) if x} for r in acc)
    return WalkKernel(g, t, rows)


def _int_matmul(x, y):
    n = len(x)
    cols = [[y[k][j] for k in range(n)] for j in range(n)]
    return [[sum(p * q for p, q in zip(xi, cj) if p) for cj in cols] for xi in x]


@dataclass(frozen=True)
class Walk:
    vertices: tuple
    edges: tuple

    @property
    def moves(self) -> int:
        return len(self.edges)

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def steps(self):
        """Directed traversals ``(a, b, edge index)``."""
        return [(self.vertices[i], self.vertices[i + 1], self.edges[i]) for i in range(len(self.edges))]


DISCARDED = None


def sample_asrw_unbounded(g: Graph, t: int, start: int, rng: random.Random) -> Walk:
    """Halt w.p. 1/t before each move; otherwise move along a uniform endpoint slot."""
    verts = [start]
    edges = []
    cur = start
    while rng.random() >= 1 / t:
        w, e = rng.choice(g.slots[cur])
        verts.append(w)
        edges.append(e)
        cur = w
    return Walk(tuple(verts), tuple(edges))


def sample_asrw(g: Graph, t: int, B: int, start: int, rng: random.Random):
    """An after-stopping walk, or ``DISCARDED`` when it makes more than B moves."""
    verts = [start]
    edges = []
    cur = start
    while rng.random() >= 1 / t:
        if len(edges) == B:
            return DISCARDED
        w, e = rng.choice(g.slots[cur])
        verts.append(w)
        edges.append(e)
        cur = w
    return Walk(tuple(verts), tuple(edges))


def walk_probability(d: int, t: int, moves: int) -> Fraction:
    return (Fraction(t - 1, t * d)) ** moves * Fraction(1, t)


def discard_mass(t: int, B: int) -> Fraction:
    """Probability that an after-stopping walk makes more than B moves."""
    return (1 - Fraction(1, t)) ** (B + 1)


def enumerate_walks(g: Graph, start: int, B: int, t: int, cap: int = WALK_CAP):
    """Yield ``(walk, probability)`` for every walk of at most B moves.

    Order is lexicographic in the sequence of slot choices, shorter first
    among prefixes. Walks of probability zero (t = 1, any move) are skipped.
    """
    d = g.regular_degree()
    if t == 1:
        yield Walk((start,), ()), Fraction(1)
        return
    count = sum(d**m for m in range(B + 1))
    if count > cap:
        raise TooLarge(f"{count} walks exceed the enumeration cap {cap}; use sampled mode")
    probs = [walk_probability(d, t, m) for m in range(B + 1)]

    def rec(verts, edges):
        yield Walk(tuple(verts), tuple(edges)), probs[len(edges)]
        if len(edges) == B:
            return
        for w, e in g.slots[verts[-1]]:
            verts.append(w)
            edges.append(e)
            yield from rec(verts, edges)
            verts.pop()
            edges.pop()

    yield from rec([start], [])


def certified_degree(n: int, lo: int = 3, hi: int = 64, seed=0) -> int:
    """Smallest d0 in [lo, hi] for which ``build_expander(n, d0, seed)`` succeeds."""
    for d0 in range(lo, hi + 1):
        if (n * d0) % 2 or (n == 1 and d0 % 2):
            continue
        try:
            build_expander(n, d0, seed)
            return d0
        except ExpanderNotFound:
            continue
    raise ExpanderNotFound(f"no certified expander on {n} vertices with degree in [{lo}, {hi}]")
