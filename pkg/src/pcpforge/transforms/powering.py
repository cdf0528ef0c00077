"""Random-walk powering: ball-labelled variables, one walk-consistency edge per surviving walk."""

from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction

from ..csp import Edge, Instance, WalkConsistency, ball_labeling, transposed, var_key
from ..errors import NotRegular, TooLarge
from ..graphs import DISCARDED, bfs, sample_asrw
from ..parallel import derive_seed, pmap
from .common import instance_graph


# The exact mode aggregates walks into (end, traversal set) states, so the cap
# bounds live states rather than individual walks.
STATE_CAP = 10**6


def log2_ceil(q: int) -> int:
    return max(0, (q - 1).bit_length())


def walk_bound(t: int, alphabet_size: int) -> int:
    """B = 10 t log2|Sigma| with the logarithm rounded up."""
    return 10 * t * log2_ceil(alphabet_size)


def base_alphabet(instance: Instance):
    alphs = {instance.alphabets[a] for a in set(instance.variables.values())}
    if len(alphs) != 1:
        raise ValueError("powering needs a single shared alphabet")
    return next(iter(alphs))


def _check_key(c):
    return (var_key(c[0]), var_key(c[1]), c[2], c[3], c[4].fingerprint)


class _Context:
    def __init__(self, instance: Instance, t: int):
        g, order, edge_map = instance_graph(instance)
        if not g.is_regular():
            raise NotRegular("powering needs a regular instance")
        self.instance, self.t, self.g, self.order = instance, t, g, order
        self.d = g.regular_degree()
        self.dist = [bfs(g, v, t) for v in range(g.n)]
        base = base_alphabet(instance)
        self.base = base
        self.alph = [ball_labeling(order[v], t, [order[u] for u in self.dist[v]], base) for v in range(g.n)]
        self.rel = {}
        for j, (a, b) in enumerate(g.edges):
            e = instance.edges[edge_map[j]]
            x, y = e.vars
            r = e.relation
            self.rel[(a, b, j)] = r if (order[a], order[b]) == (x, y) else transposed(r)
            self.rel[(b, a, j)] = r if (order[b], order[a]) == (x, y) else transposed(r)

    def relation(self, s: int, w: int, steps) -> WalkConsistency:
        return WalkConsistency(self.checks(s, w, steps))

    def checks(self, s: int, w: int, steps) -> tuple:
        ds, dw = self.dist[s], self.dist[w]
        checks = set()
        for a, b, j in steps:
            if a in ds and b in dw:
                va, vb = self.order[a], self.order[b]
                checks.add(
                    (va, vb, self.alph[s].ball_position(va), self.alph[w].ball_position(vb), self.rel[(a, b, j)])
                )
        return tuple(sorted(checks, key=_check_key))

    def alphabets(self):
        return {f"ball:{self.order[v]}": self.alph[v] for v in range(self.g.n)}

    def variables(self):
        return {self.order[v]: f"ball:{self.order[v]}" for v in range(self.g.n)}


def _exact_rows(ctx: _Context, s: int, B: int, cap: int):
    """Walk-state dynamic program from start s.

    A state is (current vertex, set of traversals (a, b, j) with a in the
    t-ball of s); counts are numbers of slot sequences reaching it. Returns
    {(end, traversal set): integer mass} where the true probability is the
    mass over t (td)^B.
    """
    g, t, d = ctx.g, ctx.t, ctx.d
    ds = ctx.dist[s]
    coef = [(t - 1) ** m * (t * d) ** (B - m) for m in range(B + 1)]
    out = defaultdict(int)
    layer = {(s, frozenset()): 1}
    for m in range(B + 1):
        cm = coef[m]
        for key, c in layer.items():
            out[key] += c * cm
        if m == B or t == 1:
            break
        nxt = defaultdict(int)
        for (cur, steps), c in layer.items():
            for w, j in g.slots[cur]:
                key = steps | {(cur, w, j)} if cur in ds else steps
                nxt[(w, key)] += c
        if len(nxt) > cap or len(out) > cap:
            raise TooLarge(f"walk states exceed cap {cap}; use sampled mode")
        layer = nxt
    return out


def power(instance: Instance, t: int, mode: str = "exact", count: int | None = None, seed=0,
          cap: int = STATE_CAP, B: int | None = None) -> Instance:
    """Powered instance over ball labels.

    ``mode="exact"`` weights each distinct (start, end, checks) class by its
    exact after-stopping walk probability divided by n; the weights sum to
    1 - (1-1/t)^(B+1). ``mode="sampled"`` draws ``count`` surviving walks as
    unit-weight edges from a seed-derived stream.
    """
    if t < 1:
        raise ValueError("horizon must be at least 1")
    ctx = _Context(instance, t)
    if B is None:
        B = walk_bound(t, ctx.base.size)
    n = ctx.g.n
    edges = []
    if mode == "exact":
        rows = pmap(lambda s: _exact_rows(ctx, s, B, cap), range(n))
        den = t * (t * ctx.d) ** B * n
        for s in range(n):
            merged = defaultdict(int)
            for (w, steps), mass in rows[s].items():
                merged[(w, ctx.checks(s, w, steps))] += mass
            keyed = sorted(merged.items(), key=lambda kv: (kv[0][0], [_check_key(c) for c in kv[0][1]]))
            for (w, checks), mass in keyed:
                edges.append(Edge((ctx.order[s], ctx.order[w]), WalkConsistency(checks), Fraction(mass, den)))
    elif mode == "sampled":
        if not count or count < 1:
            raise ValueError("sampled mode needs a positive count")
        rng = random.Random(derive_seed(seed, "power", t, B))
        while len(edges) < count:
            s = rng.randrange(n)
            walk = sample_asrw(ctx.g, t, B, s, rng)
            if walk is DISCARDED:
                continue
            rel = ctx.relation(s, walk.end, walk.steps())
            edges.append(Edge((ctx.order[s], ctx.order[walk.end]), rel))
    else:
        raise ValueError(f"unknown powering mode {mode!r}")
    return Instance(ctx.variables(), ctx.alphabets(), edges, instance.marked, validate=False)


def lift_power(powered: Instance, sigma) -> dict:
    """sigma'(v) = sigma restricted to the t-ball of v."""
    out = {}
    for v in powered.variables:
        a = powered.alphabet(v)
        out[v] = tuple(sigma[u] for u in a.ball)
    return out
