"""Assignment-side maps: turn an assignment of a reduced instance into a distribution
over assignments of the source instance."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .csp import Assignment, Empirical, Instance, PerVertexProduct, PointMass, var_key
from .errors import BlockMissing, DomainMismatch, InconsistentClique, NotAClique
from .graphs import WalkKernel, bfs
from .transforms.common import instance_graph
from .transforms.fglss import is_clique


# ---------------------------------------------------------------- degree


def recover_degree(cloud_map, sigma, instance: Instance | None = None) -> PerVertexProduct:
    """Per source variable, the label histogram over its cloud.

    Variables with an empty cloud get a point mass on the smallest label
    (needs ``instance``).
    """
    marg = {}
    for v, cloud in cloud_map.clouds.items():
        if not cloud:
            if instance is None:
                raise DomainMismatch(f"variable {v!r} has an empty cloud and no instance was given")
            marg[v] = {instance.alphabet(v).smallest(): Fraction(1)}
            continue
        try:
            counts = Counter(sigma[c] for c in cloud)
        except KeyError as exc:
            raise DomainMismatch(f"assignment misses cloud variable {exc.args[0]!r}") from None
        marg[v] = {a: Fraction(k, len(cloud)) for a, k in counts.items()}
    return PerVertexProduct(marg)


def recover_expanderize(sigma) -> PointMass:
    return PointMass(Assignment(sigma))


# ---------------------------------------------------------------- powering


@dataclass(frozen=True)
class TruncatedOpinion:
    mu: dict
    mu_star: dict
    denominator: Fraction


def opinions(instance: Instance, kernel: WalkKernel, sigma) -> dict:
    """Per source variable v: the kernel-weighted opinion distribution and its truncation.

    mu_v(a) = sum_w K[v, w] [sigma'(w)_v = a]; labels with mu_v(a) <= 1/(10|Sigma|)
    are dropped and the rest renormalized after subtracting the cutoff.
    """
    g, order, _ = instance_graph(instance)
    t = kernel.t
    balls = [sorted((order[u] for u in bfs(g, w, t)), key=var_key) for w in range(g.n)]
    pos = [{v: i for i, v in enumerate(b)} for b in balls]
    base = instance.alphabet(order[0]) if order else None
    cut = Fraction(1, 10 * base.size) if base else Fraction(0)
    out = {}
    for i, v in enumerate(order):
        mu = {}
        for w, p in kernel.row(i).items():
            try:
                label = sigma[order[w]][pos[w][v]]
            except (KeyError, IndexError, TypeError):
                raise DomainMismatch(f"no opinion of {order[w]!r} about {v!r}") from None
            mu[label] = mu.get(label, Fraction(0)) + p
        kept = {a: p - cut for a, p in mu.items() if p > cut}
        den = sum(kept.values(), Fraction(0))
        out[v] = TruncatedOpinion(mu, {a: p / den for a, p in kept.items()}, den)
    return out


def recover_power(instance: Instance, kernel: WalkKernel, sigma) -> PerVertexProduct:
    return PerVertexProduct({v: o.mu_star for v, o in opinions(instance, kernel, sigma).items()})


# ---------------------------------------------------------------- alphabet


_CODEBOOKS = {}


def codebook(size: int, ell: int) -> np.ndarray:
    """Row a = Hadamard codeword of label index a (length ell)."""
    key = (size, ell)
    if key not in _CODEBOOKS:
        a = np.arange(size)[:, None] & np.arange(ell)[None, :]
        par = np.zeros_like(a)
        x = a.copy()
        while x.any():
            par ^= x & 1
            x >>= 1
        _CODEBOOKS[key] = par.astype(np.uint8)
    return _CODEBOOKS[key]


@dataclass(frozen=True)
class BlockDecoding:
    label: object  # decode of the closest codeword
    fallback: object
    distance: int
    ell: int

    @property
    def delta(self) -> Fraction:
        return Fraction(self.distance, self.ell)

    @property
    def threshold(self) -> Fraction:
        return 4 * self.delta

    @property
    def p(self) -> Fraction:
        return max(Fraction(0), 1 - self.threshold)

    def marginal(self) -> dict:
        out = {}
        for a, q in ((self.label, self.p), (self.fallback, 1 - self.p)):
            if q:
                out[a] = out.get(a, Fraction(0)) + q
        return out


def decode_block(bits, alphabet, ell: int) -> BlockDecoding:
    """Closest codeword among valid labels; ties go to the smallest label index."""
    book = codebook(alphabet.size, ell)
    dist = (book != np.asarray(bits, dtype=np.uint8)[None, :]).sum(axis=1)
    idx = int(np.argmin(dist))
    return BlockDecoding(alphabet.label_at(idx), alphabet.smallest(), int(dist[idx]), ell)


class AlphabetRecovery:
    """Threshold decoding with one shared uniform tau in [0, 1].

    Vertex u outputs its decoded label iff 4 delta_u <= tau, else the
    smallest label. ``marginals()`` gives the exact per-vertex laws,
    ``joint()`` the exact joint law over tau-regimes, ``sample(rng)`` a draw.
    """

    def __init__(self, blocks: dict, alphabets: dict, ell: int, sigma):
        self.decodings = {}
        for u in sorted(blocks, key=var_key):
            try:
                bits = [int(sigma[x]) for x in blocks[u]]
            except KeyError as exc:
                raise BlockMissing(f"assignment misses block variable {exc.args[0]!r}") from None
            self.decodings[u] = decode_block(bits, alphabets[u], ell)

    def marginals(self) -> PerVertexProduct:
        return PerVertexProduct({u: d.marginal() for u, d in self.decodings.items()})

    def assignment_at(self, tau: Fraction) -> Assignment:
        return Assignment({u: d.label if d.threshold <= tau else d.fallback for u, d in self.decodings.items()})

    def joint(self) -> Empirical:
        cuts = sorted({Fraction(0), Fraction(1)} | {d.threshold for d in self.decodings.values() if d.threshold < 1})
        items = [(self.assignment_at(lo), hi - lo) for lo, hi in zip(cuts, cuts[1:])]
        return Empirical(tuple(items))

    def sample(self, rng: random.Random) -> Assignment:
        return self.assignment_at(Fraction(rng.getrandbits(64), 1 << 64))


def recover_alphabet(reduction, sigma) -> AlphabetRecovery:
    return AlphabetRecovery(reduction.blocks, reduction.source_alphabets, reduction.ell, sigma)


# ---------------------------------------------------------------- FGLSS, gadgets, identities


def recover_fglss(instance: Instance, legend, graph, clique) -> Assignment:
    clique = list(clique)
    if not is_clique(graph, clique):
        raise NotAClique("vertex set is not a clique of the FGLSS graph")
    out = {}
    for x in clique:
        i, a, b = legend[x]
        for v, lab in zip(instance.edges[i].vars, (a, b)):
            if out.setdefault(v, lab) != lab:
                raise InconsistentClique(f"clique assigns two labels to {v!r}")
    for v in instance.variables:
        out.setdefault(v, instance.alphabet(v).smallest())
    return Assignment(out)


def recover_e3sat(encoding, sigma) -> Assignment:
    return Assignment(encoding.decode(sigma))


def recover_3lin(sigma) -> Assignment:
    return Assignment(sigma)


def recover_serial(sigma) -> Assignment:
    return Assignment(sigma)


def threshold_coupling_cost(r1: AlphabetRecovery, r2: AlphabetRecovery) -> Fraction:
    """E[Ham] when both recoveries use the same tau; an upper bound on their EMD."""
    cuts = {Fraction(0), Fraction(1)}
    for r in (r1, r2):
        cuts |= {d.threshold for d in r.decodings.values() if d.threshold < 1}
    cuts = sorted(cuts)
    total = Fraction(0)
    for lo, hi in zip(cuts, cuts[1:]):
        a, b = r1.assignment_at(lo), r2.assignment_at(lo)
        total += (hi - lo) * sum(1 for u in a if a[u] != b[u])
    return total
