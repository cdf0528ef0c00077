"""Gadget reductions: binary CSP to E3SAT, and E3SAT to 3LIN."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..csp import BOOLEAN, Disjunction, Edge, Instance, Parity
from ..errors import NonBinaryInstance, NotE3SAT
from .powering import log2_ceil


@dataclass(frozen=True)
class Encoding:
    bits: dict  # variable -> tuple of bit variable names
    alphabets: dict  # variable -> Alphabet
    K: int  # clauses per constraint block

    def encode(self, sigma) -> dict:
        out = {}
        for v, names in self.bits.items():
            idx = self.alphabets[v].index(sigma[v])
            for j, name in enumerate(names):
                out[name] = (idx >> j) & 1
        return out

    def decode(self, bits) -> dict:
        out = {}
        for v, names in self.bits.items():
            idx = sum(int(bits[n]) << j for j, n in enumerate(names))
            a = self.alphabets[v]
            out[v] = a.label_at(idx) if idx < a.size else a.smallest()
        return out


def _decode_index(idx: int, size: int) -> int:
    return idx if idx < size else 0


def _per_pattern(W: int) -> tuple:
    """(clauses, auxiliary variables) used to express one W-literal clause."""
    if W == 1:
        return 4, 2
    if W == 2:
        return 2, 1
    if W == 3:
        return 1, 0
    return W - 2, W - 3


def _expand(lits, aux):
    """Exactly-3-literal clauses equivalent (with fresh aux) to OR(lits).

    ``lits`` is a list of (variable, sign); returns a list of clauses as
    lists of (variable, sign).
    """
    W = len(lits)
    if W == 1:
        (l,) = lits
        a, b = aux
        return [[l, (a, s), (b, r)] for s in (1, 0) for r in (1, 0)]
    if W == 2:
        (a,) = aux
        return [lits + [(a, 1)], lits + [(a, 0)]]
    if W == 3:
        return [list(lits)]
    out = [[lits[0], lits[1], (aux[0], 1)]]
    for i in range(1, W - 3):
        out.append([(aux[i - 1], 0), lits[i + 1], (aux[i], 1)])
    out.append([(aux[-1], 0), lits[-2], lits[-1]])
    return out


def to_e3sat(instance: Instance):
    """Compile each binary constraint into a block of exactly K 3-literal clauses.

    Labels are written in ceil(log2 |Sigma_v|) bits (at least one); bit
    patterns beyond the alphabet decode to the smallest label. Every
    rejected pattern of a constraint's bits yields one clause, widened or
    chained to three literals with auxiliary variables reserved per
    (constraint, pattern). K is the largest possible block, so it does not
    depend on the relations; short blocks repeat their first clause.
    Returns ``(instance, encoding)``.
    """
    if not instance.is_binary():
        raise NonBinaryInstance("E3SAT compilation needs binary constraints")
    order = instance.sorted_variables()
    alph = {v: instance.alphabet(v) for v in order}
    nb = {v: max(1, log2_ceil(alph[v].size)) for v in order}
    bits = {v: tuple(f"b:{v}:{j}" for j in range(nb[v])) for v in order}
    K = max((2 ** (nb[u] + nb[v]) * _per_pattern(nb[u] + nb[v])[0] for u, v in (e.vars for e in instance.edges)),
            default=1)
    variables = {name: "bit" for names in bits.values() for name in names}
    edges = []
    for i, e in enumerate(instance.edges):
        u, v = e.vars
        au, av = alph[u], alph[v]
        lits_vars = list(bits[u]) + list(bits[v])
        W = len(lits_vars)
        naux = _per_pattern(W)[1]
        block = []
        for p in range(2**W):
            pu = p & ((1 << nb[u]) - 1)
            pv = p >> nb[u]
            a = au.label_at(_decode_index(pu, au.size))
            b = av.label_at(_decode_index(pv, av.size))
            aux = [f"a:{i}:{p}:{j}" for j in range(naux)]
            for name in aux:
                variables[name] = "bit"
            if e.relation.accepts((a, b)):
                continue
            lits = [(x, 1 - ((p >> j) & 1)) for j, x in enumerate(lits_vars)]
            block.extend(_expand(lits, aux))
        if not block:
            x = lits_vars[0]
            block = [[(x, 1), (x, 0), (x, 1)]]
        block += [block[0]] * (K - len(block))
        for clause in block:
            edges.append(Edge(tuple(x for x, _ in clause), Disjunction(tuple(s for _, s in clause)), e.weight, e.mult))
    out = Instance(variables, {"bit": BOOLEAN}, edges, validate=False)
    return out, Encoding(bits, alph, K)


def lift_e3sat(instance: Instance, e3: Instance, encoding: Encoding, sigma) -> dict:
    """Bit encoding of sigma plus chain auxiliaries set so satisfied blocks hold."""
    out = {name: 0 for name in e3.variables}
    out.update(encoding.encode(sigma))
    for i, e in enumerate(instance.edges):
        u, v = e.vars
        lits_vars = list(encoding.bits[u]) + list(encoding.bits[v])
        W = len(lits_vars)
        if W <= 3:
            continue
        for p in range(2**W):
            truth = [out[x] != (p >> j) & 1 for j, x in enumerate(lits_vars)]
            for j in range(W - 3):
                out[f"a:{i}:{p}:{j}"] = 0 if any(truth[: j + 2]) else 1
    return out


# ---------------------------------------------------------------- 3LIN

SUBSETS = ((0,), (1,), (2,), (0, 1), (1, 2), (0, 2), (0, 1, 2))


def e3sat_to_3lin(instance: Instance) -> Instance:
    """Seven parity equations per clause: every non-empty literal subset sums to 1.

    With l_i = x_i for a positive literal and 1 + x_i for a negative one, the
    equation for subset S is sum_{i in S} x_i = 1 + #(negative literals in S).
    """
    edges = []
    for i, e in enumerate(instance.edges):
        r = e.relation
        if not isinstance(r, Disjunction) or len(r.signs) != 3:
            raise NotE3SAT(f"edge {i} is not a 3-literal clause")
        for S in SUBSETS:
            b = (1 + sum(1 - r.signs[j] for j in S)) % 2
            edges.append(Edge(tuple(e.vars[j] for j in S), Parity(b, len(S)), e.weight, e.mult))
    return instance.replace(edges=tuple(edges))


def clause_pattern(signs, values) -> list:
    """Which of the seven equations hold for literal values of a single clause."""
    lits = [v if s else 1 - v for v, s in zip(values, signs)]
    return [sum(lits[j] for j in S) % 2 == 1 for S in SUBSETS]


def all_clause_assignments():
    return list(itertools.product((0, 1), repeat=3))
