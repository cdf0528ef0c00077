"""FGLSS graph of a label-cover instance and maximum-clique search."""

from __future__ import annotations

from ..csp import Instance, Projection
from ..errors import NotLabelCover
from ..graphs import Graph


def fglss(instance: Instance):
    """Return ``(graph, legend)``; every relation must be functional from left to right labels.

    Vertex i stands for ``legend[i] = (e, a, b)``.

    One vertex per edge and accepted pair; two vertices are adjacent iff
    they come from different edges and agree on every shared variable.
    """
    if not instance.is_binary():
        raise NotLabelCover("FGLSS needs binary constraints")
    legend = []
    for i, e in enumerate(instance.edges):
        au, av = instance.edge_alphabets(e)
        if isinstance(e.relation, Projection):
            pairs = [(a, e.relation.mapping[au.index(a)]) for a in au.labels()]
        else:
            pairs = sorted(e.relation.accepted((au, av)), key=lambda ab: (au.index(ab[0]), av.index(ab[1])))
            if [a for a, _ in pairs] != list(au.labels()):
                raise NotLabelCover(f"edge {i} does not map each left label to exactly one right label")
        legend.extend((i, a, b) for a, b in pairs)
    edges = []
    for p in range(len(legend)):
        for q in range(p + 1, len(legend)):
            if consistent(instance, legend[p], legend[q]):
                edges.append((p, q))
    return Graph(len(legend), tuple(edges)), legend


def consistent(instance: Instance, x, y) -> bool:
    i, a, b = x
    j, c, d = y
    if i == j:
        return False
    lab = {}
    for v, l in zip(instance.edges[i].vars, (a, b)):
        lab[v] = l
    for v, l in zip(instance.edges[j].vars, (c, d)):
        if v in lab and lab[v] != l:
            return False
        lab[v] = l
    # an edge may repeat a variable; its own labels must then agree
    return all(
        lab[v] == l for k, labs in ((i, (a, b)), (j, (c, d))) for v, l in zip(instance.edges[k].vars, labs)
    )


def canonical_clique(legend, sigma, instance: Instance) -> list:
    """Vertices (e, sigma(u), sigma(v)) for the edges sigma satisfies."""
    index = {x: i for i, x in enumerate(legend)}
    out = []
    for i, e in enumerate(instance.edges):
        key = (i, sigma[e.vars[0]], sigma[e.vars[1]])
        if key in index:
            out.append(index[key])
    return out


def is_clique(g: Graph, vertices) -> bool:
    adj = [set() for _ in range(g.n)]
    for a, b in g.edges:
        adj[a].add(b)
        adj[b].add(a)
    vs = list(vertices)
    return len(set(vs)) == len(vs) and all(y in adj[x] for i, x in enumerate(vs) for y in vs[i + 1:])


def max_clique(g: Graph) -> list:
    """Bron-Kerbosch with pivoting; returns the lexicographically first maximum clique."""
    adj = [set() for _ in range(g.n)]
    for a, b in g.edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    best = []

    def expand(R, P, X):
        nonlocal best
        if not P and not X:
            if len(R) > len(best) or (len(R) == len(best) and sorted(R) < sorted(best)):
                best = list(R)
            return
        if len(R) + len(P) < len(best):
            return
        pivot = max(P | X, key=lambda u: len(adj[u] & P))
        for v in sorted(P - adj[pivot]):
            expand(R + [v], P & adj[v], X & adj[v])
            P = P - {v}
            X = X | {v}

    expand([], set(range(g.n)), set())
    return sorted(best)


def all_cliques(g: Graph) -> list:
    """Every clique (including the empty one), by subset enumeration; tiny graphs only."""
    if g.n > 20:
        raise ValueError("subset enumeration limited to 20 vertices")
    adj = [0] * g.n
    for a, b in g.edges:
        if a != b:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
    out = []
    for mask in range(1 << g.n):
        vs = [i for i in range(g.n) if (mask >> i) & 1]
        if all((mask & ~adj[v] & ~(1 << v)) == 0 for v in vs):
            out.append(vs)
    return out
