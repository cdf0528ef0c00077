"""Boolean circuits, their quadratic arithmetization and the Hadamard-table assignment tester.

Conventions. A circuit on ``n_inputs`` inputs has wires 0..n_inputs-1 for
the inputs and wire ``n_inputs + g`` for gate g. The tester variable vector
is z = (all wires), k = n_inputs + |C|. Bit i of an integer encodes z_i;
the quadratic table is indexed by k*k-bit integers where bit ``i*k + j``
stands for z_i z_j.

Constraints are kept in "= 0 over GF(2)" form. Besides one equation per
gate, an output equation ``y_out + 1 = 0`` forces acceptance; without it
every input extends to a consistent wire vector and the tester would accept
everything.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..csp import BOOLEAN, Edge, Instance, Parity, tuples
from ..errors import TesterTooLarge
from ..parallel import derive_seed

AND, OR, NOT = "and", "or", "not"
EXACT_K = 3
MAX_SMALL_K = 4
FAMILIES = ("blr_l", "blr_q", "tensor", "circuit", "input")


# ---------------------------------------------------------------- circuits


@dataclass(frozen=True)
class Circuit:
    n_inputs: int
    gates: tuple  # (op, a, b); NOT uses a == b
    output: int

    def __post_init__(self):
        for g, (op, a, b) in enumerate(self.gates):
            if op not in (AND, OR, NOT):
                raise ValueError(f"unknown gate {op!r}")
            if not (0 <= a < self.n_inputs + g and 0 <= b < self.n_inputs + g):
                raise ValueError(f"gate {g} reads a wire that is not yet defined")
        if not 0 <= self.output < self.n_inputs + len(self.gates):
            raise ValueError("output wire out of range")

    @property
    def size(self) -> int:
        return len(self.gates)

    @property
    def k(self) -> int:
        return self.n_inputs + self.size

    def evaluate(self, bits) -> list:
        w = [int(b) for b in bits]
        if len(w) != self.n_inputs:
            raise ValueError("wrong number of circuit inputs")
        for op, a, b in self.gates:
            if op == AND:
                w.append(w[a] & w[b])
            elif op == OR:
                w.append(w[a] | w[b])
            else:
                w.append(1 - w[a])
        return w

    def accepts(self, bits) -> bool:
        return self.evaluate(bits)[self.output] == 1

    def padded(self, size: int) -> "Circuit":
        if size < self.size:
            raise ValueError("cannot pad to a smaller size")
        extra = ((AND, 0, 0),) * (size - self.size)
        return Circuit(self.n_inputs, self.gates + extra, self.output)

    def satisfying_inputs(self) -> list:
        if self.n_inputs > 20:
            raise TesterTooLarge("too many inputs to enumerate")
        return [x for x in itertools.product((0, 1), repeat=self.n_inputs) if self.accepts(x)]


class CircuitBuilder:
    def __init__(self, n_inputs: int):
        self.n_inputs = n_inputs
        self.gates = []
        self._memo = {}

    def _gate(self, op, a, b):
        key = (op, a, b) if op == NOT or a <= b else (op, b, a)
        if key in self._memo:
            return self._memo[key]
        self.gates.append(key)
        w = self.n_inputs + len(self.gates) - 1
        self._memo[key] = w
        return w

    def and_(self, a, b):
        return self._gate(AND, a, b)

    def or_(self, a, b):
        return self._gate(OR, a, b)

    def not_(self, a):
        return self._gate(NOT, a, a)

    def xor(self, a, b):
        return self.and_(self.or_(a, b), self.not_(self.and_(a, b)))

    def xnor(self, a, b):
        return self.not_(self.xor(a, b))

    def _tree(self, wires, op):
        wires = list(wires)
        while len(wires) > 1:
            nxt = [op(wires[i], wires[i + 1]) for i in range(0, len(wires) - 1, 2)]
            if len(wires) % 2:
                nxt.append(wires[-1])
            wires = nxt
        return wires[0]

    def and_all(self, wires):
        return self._tree(wires, self.and_)

    def or_all(self, wires):
        return self._tree(wires, self.or_)

    def finish(self, out) -> Circuit:
        if out < self.n_inputs:
            # keep the output on a gate so the output equation has a gate variable
            out = self.and_(out, out)
        return Circuit(self.n_inputs, tuple(self.gates), out)


def gate_circuit(op: str) -> Circuit:
    """The 2-input, 1-gate circuits used for micro tests (NOT reads input 0)."""
    return Circuit(2, ((op, 0, 0 if op == NOT else 1),), 2)


# ---------------------------------------------------------------- arithmetization


@dataclass(frozen=True)
class Poly:
    """c + sum_{i in lin} z_i + sum_{(i,j) in quad} z_i z_j over GF(2)."""

    const: int
    lin: frozenset
    quad: frozenset

    def evaluate(self, z) -> int:
        v = self.const
        for i in self.lin:
            v ^= z[i]
        for i, j in self.quad:
            v ^= z[i] & z[j]
        return v

    def lin_mask(self) -> int:
        return sum(1 << i for i in self.lin)

    def quad_mask(self, k: int) -> int:
        return sum(1 << (i * k + j) for i, j in self.quad)


def _toggle(s: set, i):
    s.symmetric_difference_update({i})


def arithmetize(circuit: Circuit) -> tuple:
    """One quadratic equation per gate plus the output equation."""
    out = []
    for g, (op, a, b) in enumerate(circuit.gates):
        y = circuit.n_inputs + g
        lin = set()
        if op == AND:
            _toggle(lin, y)
            out.append(Poly(0, frozenset(lin), frozenset({(a, b)})))
        elif op == OR:
            for i in (a, b, y):
                _toggle(lin, i)
            out.append(Poly(0, frozenset(lin), frozenset({(a, b)})))
        else:
            for i in (a, y):
                _toggle(lin, i)
            out.append(Poly(1, frozenset(lin), frozenset()))
    out.append(Poly(1, frozenset({circuit.output}), frozenset()))
    return tuple(out)


def combine(polys, r) -> tuple:
    """(s0, s, t) masks of the GF(2) sum of the selected equations (r: bit per equation)."""
    c, lin, quad = 0, set(), set()
    for p, bit in zip(polys, r):
        if bit:
            c ^= p.const
            lin.symmetric_difference_update(p.lin)
            quad.symmetric_difference_update(p.quad)
    return c, frozenset(lin), frozenset(quad)


# ---------------------------------------------------------------- small tables


def bits_of(x: int, k: int) -> list:
    return [(x >> i) & 1 for i in range(k)]


def int_of(bits) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def _parity_table(width: int) -> np.ndarray:
    idx = np.arange(1 << width, dtype=np.int64)
    par = np.zeros(1 << width, dtype=np.uint8)
    for i in range(width):
        par ^= ((idx >> i) & 1).astype(np.uint8)
    return par


def had_table(z: int, k: int) -> np.ndarray:
    """L[s] = <s, z> mod 2 for all s in {0,1}^k."""
    return _parity_table(k)[np.arange(1 << k) & z] if k else np.zeros(1, np.uint8)


def tensor_int(x: int, y: int, k: int) -> int:
    out = 0
    for i in range(k):
        if (x >> i) & 1:
            out |= y << (i * k)
    return out


def quad_table(z: int, k: int) -> np.ndarray:
    """Q[q] = <q, z (x) z> mod 2 for all q in {0,1}^(k*k)."""
    zz = tensor_int(z, z, k)
    return _parity_table(k * k)[np.arange(1 << (k * k)) & zz]


def wires_int(circuit: Circuit, x_bits) -> int:
    return int_of(circuit.evaluate(x_bits))


def exact_tables(circuit: Circuit, z: int):
    return had_table(z, circuit.k), quad_table(z, circuit.k)


# ---------------------------------------------------------------- layout


@dataclass(frozen=True)
class TesterLayout:
    k: int
    n_inputs: int
    size: int
    n_polys: int
    weights: tuple  # w1..w5 as Fractions
    normalizer: int
    alpha: int
    regime: str
    budget: int

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "inputs": self.n_inputs,
            "circuit_size": self.size,
            "equations": self.n_polys,
            "weights": [weight_repr(w) for w in self.weights],
            "normalizer_bits": self.normalizer.bit_length() - 1,
            "alpha_bits": self.alpha.bit_length() - 1,
            "regime": self.regime,
            "budget": self.budget,
        }


def _split2(d: int) -> tuple:
    """d = odd * 2^e -> (odd, e)."""
    e = (d & -d).bit_length() - 1
    return d >> e, e


def weight_repr(w: Fraction) -> str:
    """Compact text for weights whose denominators carry huge powers of two."""
    odd, e = _split2(w.denominator)
    if w.numerator == 1:
        return f"1/({odd}*2^{e})" if odd > 1 else f"2^-{e}"
    return f"{w.numerator}/({odd}*2^{e})"


def tester_weights(k: int, n_inputs: int, n_polys: int) -> tuple:
    return (
        Fraction(1, 2 ** (2 * k)),
        Fraction(1, 2 ** (2 * k * k)),
        Fraction(1, 2 ** (4 * k + k * k)),
        Fraction(1, 2 ** (n_polys + k + k * k)),
        Fraction(1, 2**k * max(1, n_inputs)),
    )


def step4_alpha(k: int, n_polys: int) -> int:
    """Largest number of step-4 appearances of one table cell.

    An L cell y appears as L(s+x) for x = y+s and as L(x) for x = y, for every
    (r, q); a Q cell likewise for every (r, x).
    """
    return 2 * 2**n_polys * 2 ** max(k, k * k)


def tester_layout(circuit: Circuit, regime: str = "exact", budget: int = 0) -> TesterLayout:
    k, P = circuit.k, circuit.size + 1
    w = tester_weights(k, circuit.n_inputs, P)
    # lcm of the denominators; every odd part is 1 except the input family's
    odd, e = 1, 0
    for x in w:
        o, f = _split2(x.denominator)
        odd, e = odd * o // math.gcd(odd, o), max(e, f)
    N = odd << e
    return TesterLayout(k, circuit.n_inputs, circuit.size, P, w, N, step4_alpha(k, P), regime, budget)


# ---------------------------------------------------------------- exact evaluator


@dataclass(frozen=True)
class TesterScore:
    fractions: dict  # family -> violated fraction of that family
    exact: bool

    @property
    def violated(self) -> Fraction:
        """Violated weight over the five families, normalized to [0, 1]."""
        return sum(self.fractions.values(), Fraction(0)) / len(FAMILIES)


class SmallTester:
    """Vectorized evaluation of the five families for k <= 4.

    All families are exhaustive for k <= 3. At k = 4 the BLR test on Q and
    the tensor test are estimated from ``budget`` uniform constraints drawn
    from a seed-derived stream; the rest stay exhaustive.
    """

    def __init__(self, circuit: Circuit, budget: int = 1 << 16, seed=0):
        if circuit.k > MAX_SMALL_K:
            raise TesterTooLarge(f"k = {circuit.k} exceeds the table cap {MAX_SMALL_K}")
        self.circuit = circuit
        self.k = circuit.k
        self.polys = arithmetize(circuit)
        self.exact = self.k <= EXACT_K
        self.layout = tester_layout(circuit, "exact" if self.exact else "sampled", 0 if self.exact else budget)
        self.budget = budget
        self.seed = seed
        k = self.k
        combos = {}
        for r in itertools.product((0, 1), repeat=len(self.polys)):
            c, lin, quad = combine(self.polys, r)
            key = (c, sum(1 << i for i in lin), sum(1 << (i * k + j) for i, j in quad))
            combos[key] = combos.get(key, 0) + 1
        self.step4 = combos  # (s0, s, t) -> number of r producing it
        x = np.arange(1 << k)
        self.tensor = np.array([[tensor_int(a, b, k) for b in range(1 << k)] for a in range(1 << k)], dtype=np.int64)
        self._x = x

    def _samples(self, tag, count, width):
        rng = random.Random(derive_seed(self.seed, "tester", tag))
        return np.array([[rng.getrandbits(wd) for wd in width] for _ in range(count)], dtype=np.int64)

    def score(self, x_bits, L: np.ndarray, Q: np.ndarray) -> TesterScore:
        k = self.k
        K, KK = 1 << k, 1 << (k * k)
        L = np.asarray(L, dtype=np.uint8)
        Q = np.asarray(Q, dtype=np.uint8)
        x = self._x
        fr = {}
        # 1: BLR on L
        v = L[:, None] ^ L[None, :] ^ L[x[:, None] ^ x[None, :]]
        fr["blr_l"] = Fraction(int(v.sum()), K * K)
        # 2 and 3
        if self.exact:
            q = np.arange(KK)
            v = Q[:, None] ^ Q[None, :] ^ Q[q[:, None] ^ q[None, :]]
            fr["blr_q"] = Fraction(int(v.sum()), KK * KK)
            A = L[x[:, None] ^ x[None, :]] ^ L[None, :]  # A[x, x'] = L(x+x') + L(x')
            rhs1 = np.zeros((K, K), dtype=np.int64)  # count of q with Q(T+q)+Q(q) = 1
            for a in range(K):
                for b in range(K):
                    rhs1[a, b] = int((Q[self.tensor[a, b] ^ q] ^ Q).sum())
            # violations: product 1 needs rhs 1, product 0 needs rhs 0
            bad = 0
            ones = A.astype(np.int64)
            for a in range(K):
                for b in range(K):
                    prod1 = int(ones[a].sum()) * int(ones[b].sum())
                    bad += prod1 * (KK - rhs1[a, b]) + (K * K - prod1) * rhs1[a, b]
            fr["tensor"] = Fraction(bad, K**4 * KK)
        else:
            s = self._samples("blr_q", self.budget, (k * k, k * k))
            v = Q[s[:, 0]] ^ Q[s[:, 1]] ^ Q[s[:, 0] ^ s[:, 1]]
            fr["blr_q"] = Fraction(int(v.sum()), self.budget)
            s = self._samples("tensor", self.budget, (k, k, k, k, k * k))
            xa, xp, ya, yp, qq = (s[:, i] for i in range(5))
            lhs = (L[xa ^ xp] ^ L[xp]) & (L[ya ^ yp] ^ L[yp])
            tens = self.tensor[xa, ya]
            rhs = Q[tens ^ qq] ^ Q[qq]
            fr["tensor"] = Fraction(int((lhs != rhs).sum()), self.budget)
        # 4: circuit equations; separable in x and q
        bad, total = 0, 0
        for (c, smask, tmask), mult in self.step4.items():
            a = L[x ^ smask] ^ L  # over x
            b = Q[np.arange(KK) ^ tmask] ^ Q  # over q
            a1, b1 = int(a.sum()), int(b.sum())
            a0, b0 = K - a1, KK - b1
            viol = a1 * b0 + a0 * b1 if c == 0 else a0 * b0 + a1 * b1
            bad += mult * viol
            total += mult * K * KK
        fr["circuit"] = Fraction(bad, total)
        # 5: inputs against the self-corrected L
        nx = self.circuit.n_inputs
        bad = 0
        for i in range(nx):
            v = L[x ^ (1 << i)] ^ L ^ int(x_bits[i])
            bad += int(v.sum())
        fr["input"] = Fraction(bad, K * max(1, nx)) if nx else Fraction(0)
        return TesterScore(fr, self.exact)

    def score_assignment(self, x_bits, z: int) -> TesterScore:
        L, Q = exact_tables(self.circuit, z)
        return self.score(x_bits, L, Q)


def distance_to_satisfying(circuit: Circuit, x_bits) -> Fraction:
    """min Hamming distance to an accepted input, over the input count (1 if none)."""
    sat = circuit.satisfying_inputs()
    if not sat:
        return Fraction(1)
    d = min(sum(a != b for a, b in zip(x_bits, s)) for s in sat)
    return Fraction(d, max(1, circuit.n_inputs))


# ---------------------------------------------------------------- BLR oracles


def blr_fraction(L) -> Fraction:
    """Fraction of (x, y) pairs with L(x) + L(y) != L(x + y), by enumeration."""
    L = np.asarray(L, dtype=np.uint8)
    K = len(L)
    x = np.arange(K)
    v = L[:, None] ^ L[None, :] ^ L[x[:, None] ^ x[None, :]]
    return Fraction(int(v.sum()), K * K)


def blr_single_flip_fraction(k: int, s: int) -> Fraction:
    """BLR failure fraction of a linear table with cell s flipped (closed form).

    A pair fails iff s occurs an odd number of times among (x, y, x+y).
    """
    K = 1 << k
    bad = 3 * (K - 1) + 1 if s == 0 else 3 * (K - 2)
    return Fraction(bad, K * K)


# ---------------------------------------------------------------- explicit instance


def assignment_tester(circuit: Circuit, cap: int = 10**5) -> tuple:
    """Explicit weighted tester instance for tiny circuits.

    Variables: ``x{i}`` inputs, ``L{s}`` and ``Q{q}`` table cells. Each family
    has total weight 1. Returns ``(instance, layout)``.
    """
    k = circuit.k
    P = arithmetize(circuit)
    nx = circuit.n_inputs
    K, KK = 1 << k, 1 << (k * k)
    counts = [K * K, KK * KK, K**4 * KK, 2 ** len(P) * K * KK, nx * K]
    if sum(counts) > cap:
        raise TesterTooLarge(f"{sum(counts)} tester constraints exceed cap {cap}")
    layout = tester_layout(circuit)
    w1, w2, w3, w4, w5 = layout.weights
    Lv = [f"L{s}" for s in range(K)]
    Qv = [f"Q{q}" for q in range(KK)]
    Xv = [f"x{i}" for i in range(nx)]
    par0 = Parity(0, 3)
    tens = tuples(
        [t for t in itertools.product((0, 1), repeat=6) if ((t[0] ^ t[1]) & (t[2] ^ t[3])) == (t[4] ^ t[5])], 6
    )
    edges = []
    for x in range(K):
        for y in range(K):
            edges.append(Edge((Lv[x], Lv[y], Lv[x ^ y]), par0, w1))
    for x in range(KK):
        for y in range(KK):
            edges.append(Edge((Qv[x], Qv[y], Qv[x ^ y]), par0, w2))
    for x, xp, y, yp in itertools.product(range(K), repeat=4):
        T = tensor_int(x, y, k)
        for q in range(KK):
            edges.append(Edge((Lv[x ^ xp], Lv[xp], Lv[y ^ yp], Lv[yp], Qv[T ^ q], Qv[q]), tens, w3))
    for r in itertools.product((0, 1), repeat=len(P)):
        c, lin, quad = combine(P, r)
        s = sum(1 << i for i in lin)
        t = sum(1 << (i * k + j) for i, j in quad)
        rel = Parity(c, 4)
        for x in range(K):
            for q in range(KK):
                edges.append(Edge((Lv[s ^ x], Lv[x], Qv[t ^ q], Qv[q]), rel, w4))
    for i in range(nx):
        for x in range(K):
            edges.append(Edge((Lv[x ^ (1 << i)], Lv[x], Xv[i]), par0, w5))
    variables = {v: "bit" for v in Xv + Lv + Qv}
    return Instance(variables, {"bit": BOOLEAN}, edges, validate=False), layout


def tester_lift(circuit: Circuit, x_bits) -> dict:
    """Exact Hadamard tables of the wire vector, as an assignment of ``assignment_tester``."""
    z = wires_int(circuit, x_bits)
    L, Q = exact_tables(circuit, z)
    out = {f"x{i}": int(b) for i, b in enumerate(x_bits)}
    out.update({f"L{s}": int(v) for s, v in enumerate(L)})
    out.update({f"Q{q}": int(v) for q, v in enumerate(Q)})
    return out
