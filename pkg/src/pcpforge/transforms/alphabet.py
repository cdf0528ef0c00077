"""Alphabet reduction through Hadamard-encoded blocks and a sampled assignment tester.

Each label of u is written as the Hadamard codeword of its index (b bits,
codeword length l = 2^b) on Boolean variables ``x:{u}:{j}``. Each binary
constraint becomes a circuit on the two blocks that accepts iff both blocks
are codewords of valid labels satisfying the relation. The tester for that
circuit is emitted by sampling each of the five constraint families; table
cells are named by a digest of their index vector, so only the sampled cells
exist. Samples for every family except the circuit family are shared across
edges; circuit-family cells depend on the edge's circuit through (s, t).
Finally every constraint of arity > 2 is sparsified into binary ones.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..csp import BOOLEAN, Edge, Equality, Instance, Parity, dense, tuples
from ..errors import ArityTooHigh, NonBinaryInstance, TesterTooLarge
from ..parallel import derive_seed
from .powering import log2_ceil
from .tester import Circuit, CircuitBuilder, arithmetize, combine, tester_layout

K_CAP = 8192
MAX_ARITY = 6


# ---------------------------------------------------------------- bit vectors


def _nbytes(width: int) -> int:
    return (width + 7) // 8


def vec_bits(x: int, width: int) -> np.ndarray:
    raw = np.frombuffer(x.to_bytes(_nbytes(width), "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:width]


def bits_vec(bits) -> int:
    return int.from_bytes(np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes(), "little")


def outer_vec(x: int, y: int, k: int) -> int:
    """Bit i*k + j set iff bit i of x and bit j of y are set."""
    return bits_vec(np.outer(vec_bits(x, k), vec_bits(y, k)).ravel())


def positions_vec(positions, width: int) -> int:
    bits = np.zeros(width, dtype=np.uint8)
    for p in positions:
        bits[p] ^= 1
    return bits_vec(bits)


def digest(x: int, width: int) -> str:
    return hashlib.blake2b(x.to_bytes(_nbytes(width), "little"), digest_size=10).hexdigest()


def parity(x: int) -> int:
    return x.bit_count() & 1


# ---------------------------------------------------------------- encoding


def hadamard(index: int, ell: int) -> list:
    return [parity(x & index) for x in range(ell)]


def block_var(u, j: int) -> str:
    return f"x:{u}:{j}"


def _less_than(cb: CircuitBuilder, bits, bound: int):
    """Wire for int(bits) < bound (little-endian), 1 <= bound < 2^len(bits)."""
    lt = None
    for i, a in enumerate(bits):
        na = cb.not_(a)
        if (bound >> i) & 1:
            lt = na if lt is None else cb.or_(na, lt)
        elif lt is not None:
            lt = cb.and_(na, lt)
    return lt


def _codeword_checks(cb: CircuitBuilder, block) -> list:
    checks = [cb.not_(block[0])]
    for x in range(1, len(block)):
        low = x & -x
        if low != x:
            checks.append(cb.xnor(block[x], cb.xor(block[x ^ low], block[low])))
    return checks


def _minterm(cb: CircuitBuilder, lits, value_bits, negs):
    return cb.and_all([w if bit else negs[w] for w, bit in zip(lits, value_bits)])


def relation_circuit(ell: int, b: int, alph_u, alph_v, relation, cap: int = 1 << 20) -> Circuit:
    """Circuit on 2*ell inputs (block u then block v) accepting encoded satisfying pairs."""
    cb = CircuitBuilder(2 * ell)
    bu = list(range(ell))
    bv = list(range(ell, 2 * ell))
    checks = _codeword_checks(cb, bu) + _codeword_checks(cb, bv)
    du = [bu[1 << i] for i in range(b)]
    dv = [bv[1 << i] for i in range(b)]
    for bits, alph in ((du, alph_u), (dv, alph_v)):
        if alph.size < (1 << b):
            checks.append(_less_than(cb, bits, alph.size))
    if isinstance(relation, Equality) and alph_u == alph_v:
        checks.extend(cb.xnor(a, c) for a, c in zip(du, dv))
    elif not relation.always_true():
        if alph_u.size * alph_v.size > cap:
            raise TesterTooLarge("relation too large to compile into a circuit")
        lu, lv = alph_u.labels(), alph_v.labels()
        acc, rej = [], []
        for i, j in itertools.product(range(len(lu)), range(len(lv))):
            (acc if relation.accepts((lu[i], lv[j])) else rej).append((i, j))
        lits = du + dv
        negs = {w: cb.not_(w) for w in lits}

        def terms(pairs):
            return [
                _minterm(cb, lits, [(i >> s) & 1 for s in range(b)] + [(j >> s) & 1 for s in range(b)], negs)
                for i, j in pairs
            ]

        if not acc:
            checks.append(cb.and_(lits[0], negs[lits[0]]) if lits else cb.and_(bu[0], cb.not_(bu[0])))
        elif rej and len(acc) <= len(rej):
            checks.append(cb.or_all(terms(acc)))
        elif rej:
            checks.append(cb.not_(cb.or_all(terms(rej))))
    return cb.finish(cb.and_all(checks))


# ---------------------------------------------------------------- sparsification


def _bits_tuple(a: int, t: int) -> tuple:
    return tuple((a >> i) & 1 for i in range(t))


def sparsify(instance: Instance) -> Instance:
    """Replace each Boolean constraint of arity t >= 2 by a W-variable over {0,1}^t and
    t binary constraints "W satisfies R and agrees with position j".

    Binary edges are sparsified too so the output alphabet layout is uniform.
    """
    cache = {}
    alphabets = dict(instance.alphabets)
    variables = dict(instance.variables)
    edges = []
    for i, e in enumerate(instance.edges):
        t = len(e.vars)
        if t > MAX_ARITY:
            raise ArityTooHigh(f"edge {i} has arity {t} > {MAX_ARITY}")
        key = (e.relation.fingerprint, t)
        if key not in cache:
            sat = [a for a in range(1 << t) if e.relation.accepts(_bits_tuple(a, t))]
            cache[key] = [tuples([(a, (a >> j) & 1) for a in sat], 2) if sat else None for j in range(t)]
            if not sat:
                cache[key] = [_empty_pair(t)] * t
        name = f"sigma0_{t}"
        alphabets.setdefault(name, dense(1 << t))
        w = f"w{i}"
        variables[w] = name
        for j, v in enumerate(e.vars):
            edges.append(Edge((w, v), cache[key][j], e.weight, e.mult))
    return Instance(variables, alphabets, edges, instance.marked, validate=False)


def _empty_pair(t):
    from ..csp import Tuples

    return Tuples(2, frozenset())


def lift_sparsify(instance: Instance, sigma) -> dict:
    out = dict(sigma)
    for i, e in enumerate(instance.edges):
        out[f"w{i}"] = sum(int(sigma[v]) << j for j, v in enumerate(e.vars))
    return out


# ---------------------------------------------------------------- reduction


_TENSOR = None


def tensor_relation():
    global _TENSOR
    if _TENSOR is None:
        _TENSOR = tuples(
            [t for t in itertools.product((0, 1), repeat=6) if ((t[0] ^ t[1]) & (t[2] ^ t[3])) == (t[4] ^ t[5])], 6
        )
    return _TENSOR


@dataclass
class AlphabetReduction:
    instance: Instance  # sparsified, binary
    boolean: Instance  # before sparsification
    ell: int
    b: int
    blocks: dict  # u -> tuple of X variable names
    source_alphabets: dict  # u -> Alphabet
    layout: object  # TesterLayout shared by all edges
    circuits: list  # edge index -> Circuit
    samples: int
    seed: object
    vectors: dict = field(repr=False)  # cell digest -> (kind, int)
    edge_cells: list = field(repr=False)  # per edge: list of (variable, kind, digest)

    def report(self) -> dict:
        return {
            "block_length": self.ell,
            "label_bits": self.b,
            "samples_per_family": self.samples,
            "tester": self.layout.to_json(),
            "variables": self.instance.n,
            "constraints": self.instance.m,
        }

    def lift(self, sigma) -> dict:
        """Canonical lift: Hadamard blocks, exact table cells, sparsified local views."""
        k = self.layout.k
        x = {}
        for u, names in self.blocks.items():
            idx = self.source_alphabets[u].index(sigma[u])
            for name, bit in zip(names, hadamard(idx, self.ell)):
                x[name] = bit
        out = dict(x)
        src = self.boolean_source
        for i, cells in enumerate(self.edge_cells):
            u, v = src.edges[i].vars
            inputs = [x[n] for n in self.blocks[u]] + [x[n] for n in self.blocks[v]]
            zb = self.circuits[i].evaluate(inputs)
            z = bits_vec(zb)
            zz = None
            for name, kind, dg in cells:
                vec = self.vectors[dg][1]
                if kind == "L":
                    out[name] = parity(vec & z)
                else:
                    if zz is None:
                        zz = outer_vec(z, z, k)
                    out[name] = parity(vec & zz)
        return lift_sparsify(self.boolean, out)


def _sample_stream(seed, tag):
    return random.Random(derive_seed(seed, "alphabet", tag))


def alphabet_reduce(instance: Instance, samples: int = 2, seed=0, pad_to: int | None = None,
                    k_cap: int = K_CAP) -> AlphabetReduction:
    """Hadamard-encode labels and replace each constraint by a sampled assignment tester.

    ``samples`` constraints are drawn per family (per input bit for the
    input family) from seed-derived streams. ``pad_to`` fixes the padded
    circuit size, which keeps layouts aligned when comparing neighbours.
    """
    if not instance.is_binary():
        raise NonBinaryInstance("alphabet reduction needs a binary instance")
    order = instance.sorted_variables()
    src_alph = {u: instance.alphabet(u) for u in order}
    b = max(1, max(log2_ceil(a.size) for a in src_alph.values()))
    ell = 1 << b
    blocks = {u: tuple(block_var(u, j) for j in range(ell)) for u in order}

    cache = {}
    raw = []
    for e in instance.edges:
        au, av = (src_alph[v] for v in e.vars)
        key = (au, av, e.relation.fingerprint, isinstance(e.relation, Equality))
        if key not in cache:
            cache[key] = relation_circuit(ell, b, au, av, e.relation)
        raw.append(cache[key])
    size = max(c.size for c in raw)
    if pad_to is not None:
        size = max(size, pad_to)
    padded = {}
    circuits = []
    for c in raw:
        if id(c) not in padded:
            padded[id(c)] = c.padded(size)
        circuits.append(padded[id(c)])
    k = 2 * ell + size
    if k > k_cap:
        raise TesterTooLarge(f"tester dimension k = {k} exceeds cap {k_cap}")
    kk = k * k
    n_polys = size + 1
    layout = tester_layout(circuits[0], "sampled", samples) if circuits else None

    vectors = {}

    def cell(kind, vec):
        width = k if kind == "L" else kk
        dg = digest(vec, width) + kind
        vectors.setdefault(dg, (kind, vec))
        return dg

    # shared samples
    rng = _sample_stream(seed, "blr_l")
    fam1 = []
    for _ in range(samples):
        x, y = rng.getrandbits(k), rng.getrandbits(k)
        fam1.append((cell("L", x), cell("L", y), cell("L", x ^ y)))
    rng = _sample_stream(seed, "blr_q")
    fam2 = []
    for _ in range(samples):
        x, y = rng.getrandbits(kk), rng.getrandbits(kk)
        fam2.append((cell("Q", x), cell("Q", y), cell("Q", x ^ y)))
    rng = _sample_stream(seed, "tensor")
    fam3 = []
    for _ in range(samples):
        x, xp, y, yp = (rng.getrandbits(k) for _ in range(4))
        q = rng.getrandbits(kk)
        T = outer_vec(x, y, k)
        fam3.append((cell("L", x ^ xp), cell("L", xp), cell("L", y ^ yp), cell("L", yp), cell("Q", T ^ q), cell("Q", q)))
    rng = _sample_stream(seed, "circuit")
    fam4_draws = [
        (tuple(rng.getrandbits(1) for _ in range(n_polys)), rng.getrandbits(k), rng.getrandbits(kk))
        for _ in range(samples)
    ]
    rng = _sample_stream(seed, "input")
    fam5 = []
    for i in range(2 * ell):
        for _ in range(samples):
            x = rng.getrandbits(k)
            fam5.append((i, cell("L", x ^ (1 << i)), cell("L", x)))

    fam4_cache = {}

    def fam4(circuit):
        if id(circuit) not in fam4_cache:
            polys = arithmetize(circuit)
            rows = []
            for r, x, q in fam4_draws:
                c, lin, quad = combine(polys, r)
                s = positions_vec(lin, k) if lin else 0
                t = positions_vec([i * k + j for i, j in quad], kk) if quad else 0
                rows.append((c, cell("L", s ^ x), cell("L", x), cell("Q", t ^ q), cell("Q", q)))
            fam4_cache[id(circuit)] = rows
        return fam4_cache[id(circuit)]

    par0_3 = Parity(0, 3)
    tens = tensor_relation()
    variables = {name: "bit" for names in blocks.values() for name in names}
    edges = []
    edge_cells = []
    w = Fraction(1, samples)
    w5 = Fraction(1, samples * 2 * ell)
    for i, (e, circ) in enumerate(zip(instance.edges, circuits)):
        u, v = e.vars
        names = {}

        def var(dg, _i=i, _names=names):
            if dg not in _names:
                kind = vectors[dg][0]
                _names[dg] = f"e{_i}:{kind}:{dg[:-1]}"
            return _names[dg]

        m = e.mass
        for a, bb, c in fam1:
            edges.append(Edge((var(a), var(bb), var(c)), par0_3, w * m))
        for a, bb, c in fam2:
            edges.append(Edge((var(a), var(bb), var(c)), par0_3, w * m))
        for cells in fam3:
            edges.append(Edge(tuple(var(c) for c in cells), tens, w * m))
        for c0, a, bb, c, d in fam4(circ):
            edges.append(Edge((var(a), var(bb), var(c), var(d)), Parity(c0, 4), w * m))
        xs = list(blocks[u]) + list(blocks[v])
        for j, a, bb in fam5:
            edges.append(Edge((var(a), var(bb), xs[j]), par0_3, w5 * m))
        for dg, name in names.items():
            variables[name] = "bit"
        edge_cells.append([(name, vectors[dg][0], dg) for dg, name in names.items()])

    boolean = Instance(variables, {"bit": BOOLEAN}, edges, validate=False)
    red = AlphabetReduction(
        sparsify(boolean), boolean, ell, b, blocks, src_alph, layout, circuits, samples, seed, vectors, edge_cells
    )
    red.boolean_source = instance
    return red
