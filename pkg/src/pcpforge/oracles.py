"""Ground truth: brute-force optima, GF(2) solving, exact EMD, sensitivity estimates."""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import graphs as gr
from .csp import (
    Assignment,
    Empirical,
    Equality,
    Instance,
    Parity,
    PerVertexProduct,
    PointMass,
    Trivial,
    Tuples,
    delete_constraint,
    hamming,
    swap_constraint,
    tv_distance,
    var_key,
)
from .errors import DomainMismatch, EmptyInstance, SupportTooLarge, TooLarge
from .parallel import derive_seed, pmap

BRUTE_CAP = 2 * 10**7
CHUNK = 1 << 18
SUPPORT_CAP = 256


# ---------------------------------------------------------------- brute force


def _int_masses(instance: Instance):
    masses = [e.mass for e in instance.edges]
    den = 1
    for m in masses:
        den = den * m.denominator // math.gcd(den, m.denominator)
    ints = [int(m * den) for m in masses]
    if sum(ints) >= 2**62:
        raise TooLarge("edge weights are too fine-grained for the vectorized oracle")
    return ints, den


def _scan(instance: Instance, cap: int):
    """Yield ``(offset, score array)`` chunks over all assignments in lexicographic order."""
    if not instance.edges:
        raise EmptyInstance("brute force needs at least one edge")
    order = instance.sorted_variables()
    alph = [instance.alphabet(v) for v in order]
    sizes = tuple(a.size for a in alph)
    total = math.prod(sizes)
    if total > cap:
        raise TooLarge(f"{total} assignments exceed the brute-force cap {cap}")
    pos = {v: i for i, v in enumerate(order)}
    ints, _ = _int_masses(instance)
    tables = {}
    plan = []
    for e, w in zip(instance.edges, ints):
        key = (e.relation, tuple(instance.variables[v] for v in e.vars))
        if key not in tables:
            tables[key] = e.relation.table([instance.alphabet(v) for v in e.vars])
        plan.append(([pos[v] for v in e.vars], tables[key], w))
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        digits = np.unravel_index(idx, sizes) if sizes else ()
        score = np.zeros(len(idx), dtype=np.int64)
        for cols, tbl, w in plan:
            score += w * tbl[tuple(digits[c] for c in cols)]
        yield start, score
    return


def _decode(instance, index):
    order = instance.sorted_variables()
    alph = [instance.alphabet(v) for v in order]
    digits = np.unravel_index(index, tuple(a.size for a in alph))
    return Assignment({v: a.label_at(int(d)) for v, a, d in zip(order, alph, digits)})


def brute_force_opt(instance: Instance, cap: int = BRUTE_CAP) -> tuple[Fraction, Assignment]:
    """Exact optimum and the lexicographically first optimal assignment."""
    ints, _ = _int_masses(instance)
    best, arg = -1, 0
    for start, score in _scan(instance, cap):
        i = int(np.argmax(score))
        if score[i] > best:
            best, arg = int(score[i]), start + i
    return Fraction(best, sum(ints)), _decode(instance, arg)


def satisfying_assignments(instance: Instance, cap: int = BRUTE_CAP, limit: int = 10**5) -> list:
    ints, _ = _int_masses(instance)
    full = sum(ints)
    out = []
    for start, score in _scan(instance, cap):
        for i in np.nonzero(score == full)[0]:
            out.append(_decode(instance, start + int(i)))
            if len(out) > limit:
                raise TooLarge("too many satisfying assignments to list")
    return out


def lexicographic_solver(instance: Instance, rng=None) -> Assignment:
    """Deterministic exact solver: the first optimal assignment in lexicographic order."""
    return brute_force_opt(instance)[1]


# ---------------------------------------------------------------- GF(2)


@dataclass(frozen=True)
class LinearSystem:
    variables: tuple
    rank: int
    consistent: bool
    particular: int
    kernel: tuple

    @property
    def solution_count(self) -> int:
        return 2 ** len(self.kernel) if self.consistent else 0

    def solutions(self, cap: int = 1 << 16):
        if not self.consistent:
            return []
        if self.solution_count > cap:
            raise TooLarge("solution space too large to list")
        out = []
        for mask in range(self.solution_count):
            x = self.particular
            for j, k in enumerate(self.kernel):
                if mask >> j & 1:
                    x ^= k
            out.append(Assignment({v: x >> i & 1 for i, v in enumerate(self.variables)}))
        return out


def solve_parity_system(instance: Instance) -> LinearSystem:
    """Gaussian elimination over GF(2) for instances whose relations are all parities."""
    order = tuple(instance.sorted_variables())
    pos = {v: i for i, v in enumerate(order)}
    rows = []
    for e in instance.edges:
        if not isinstance(e.relation, Parity):
            raise ValueError("solve_parity_system needs parity relations only")
        mask = 0
        for v in e.vars:
            mask ^= 1 << pos[v]
        rows.append((mask, e.relation.b))
    pivots = {}  # pivot bit -> (mask, rhs)
    consistent = True
    for mask, b in rows:
        for bit, (pm, pb) in pivots.items():
            if mask >> bit & 1:
                mask ^= pm
                b ^= pb
        if mask == 0:
            if b:
                consistent = False
            continue
        bit = mask.bit_length() - 1
        for ob, (om, obb) in list(pivots.items()):
            if om >> bit & 1:
                pivots[ob] = (om ^ mask, obb ^ b)
        pivots[bit] = (mask, b)
    particular = 0
    for bit, (mask, b) in pivots.items():
        if b:
            particular |= 1 << bit
    free = [i for i in range(len(order)) if i not in pivots]
    kernel = []
    for f in free:
        x = 1 << f
        for bit, (mask, _) in pivots.items():
            if mask >> f & 1:
                x |= 1 << bit
        kernel.append(x)
    return LinearSystem(order, len(pivots), consistent, particular, tuple(kernel))


# ---------------------------------------------------------------- EMD


@dataclass(frozen=True)
class TransportPlan:
    left: tuple
    right: tuple
    flow: dict = field(hash=False)  # (i, j) -> Fraction
    cost: Fraction = Fraction(0)

    def row_sums(self):
        out = [Fraction(0)] * len(self.left)
        for (i, _), f in self.flow.items():
            out[i] += f
        return out

    def col_sums(self):
        out = [Fraction(0)] * len(self.right)
        for (_, j), f in self.flow.items():
            out[j] += f
        return out


def _support(d):
    if isinstance(d, (PointMass, Empirical)):
        return d.support()
    if isinstance(d, PerVertexProduct):
        return d.support(cap=SUPPORT_CAP)
    if isinstance(d, dict):
        return [(Assignment(d), Fraction(1))]
    return [(Assignment(d), Fraction(1))]


def _min_cost_flow(supply, demand, cost):
    """Successive shortest paths with Johnson potentials on the complete bipartite graph.

    ``supply``/``demand`` are positive Python ints with equal sums; ``cost``
    is a non-negative int64 matrix. Returns a dict ``(i, j) -> flow``.
    A virtual source with potential 0 feeds every row with remaining supply;
    reduced costs c(u, v) + h(u) - h(v) stay non-negative throughout.
    """
    a, b = cost.shape
    n = a + b
    sup = list(supply)
    dem = list(demand)
    flow = {}
    has_flow = np.zeros((a, b), dtype=bool)
    h = np.zeros(n, dtype=np.int64)
    big = np.iinfo(np.int64).max // 4
    while any(sup):
        dist = np.full(n, big, dtype=np.int64)
        prev = np.full(n, -1, dtype=np.int64)
        done = np.zeros(n, dtype=bool)
        for i in range(a):
            if sup[i]:
                dist[i] = -h[i]
        target = -1
        while True:
            cand = np.where(done, big, dist)
            u = int(np.argmin(cand))
            if cand[u] >= big:
                break
            done[u] = True
            if u >= a and dem[u - a] > 0:
                target = u
                break
            if u < a:
                nd = dist[u] + cost[u] + h[u] - h[a:]
                better = (~done[a:]) & (nd < dist[a:])
                idx = np.nonzero(better)[0]
                dist[a + idx] = nd[idx]
                prev[a + idx] = u
            else:
                j = u - a
                rows = np.nonzero(has_flow[:, j])[0]
                if len(rows):
                    nd = dist[u] - cost[rows, j] + h[u] - h[rows]
                    better = (~done[rows]) & (nd < dist[rows])
                    sel = rows[better]
                    dist[sel] = nd[better]
                    prev[sel] = u
        if target < 0:
            raise RuntimeError("transport problem is infeasible")
        h = h + np.where(done, dist, dist[target])
        path = []
        v = target
        while prev[v] >= 0:
            path.append((int(prev[v]), v))
            v = int(prev[v])
        src = v
        amount = min(sup[src], dem[target - a])
        for u, w in path:
            if u >= a:  # backward arc column u -> row w cancels flow (w, u)
                amount = min(amount, flow[(w, u - a)])
        for u, w in path:
            if u < a:
                key = (u, w - a)
                flow[key] = flow.get(key, 0) + amount
                has_flow[key] = True
            else:
                key = (w, u - a)
                flow[key] -= amount
                if flow[key] == 0:
                    del flow[key]
                    has_flow[key] = False
        sup[src] -= amount
        dem[target - a] -= amount
    return flow


def emd_exact(d1, d2, cap: int = SUPPORT_CAP) -> tuple[Fraction, TransportPlan]:
    """Exact earth mover's distance under the Hamming ground metric."""
    s1, s2 = _support(d1), _support(d2)
    if len(s1) > cap or len(s2) > cap:
        raise SupportTooLarge(f"supports {len(s1)} x {len(s2)} exceed cap {cap}")
    vars1 = set(s1[0][0])
    if any(set(a) != vars1 for a, _ in s1 + s2):
        raise DomainMismatch("distributions are over different variable sets")
    den = 1
    for _, p in s1 + s2:
        den = den * p.denominator // math.gcd(den, p.denominator)
    supply = [int(p * den) for _, p in s1]
    demand = [int(p * den) for _, p in s2]
    keys = sorted(vars1, key=var_key)
    cost = np.zeros((len(s1), len(s2)), dtype=np.int64)
    for i, (a, _) in enumerate(s1):
        for j, (b, _) in enumerate(s2):
            cost[i, j] = sum(1 for k in keys if a[k] != b[k])
    raw = _min_cost_flow(supply, demand, cost)
    flow = {k: Fraction(f, den) for k, f in raw.items()}
    total = sum((f * int(cost[k]) for k, f in flow.items()), Fraction(0))
    plan = TransportPlan(tuple(a for a, _ in s1), tuple(b for b, _ in s2), flow, total)
    return total, plan


def emd_upper_product(d1, d2) -> Fraction:
    """Sum of per-vertex TV distances; an upper bound on EMD between product laws."""
    for d in (d1, d2):
        if not isinstance(d, (PerVertexProduct, PointMass)):
            raise TypeError("emd_upper_product needs per-vertex product distributions")
    if d1.variables != d2.variables:
        raise DomainMismatch("distributions are over different variable sets")
    return sum((tv_distance(d1.marginal(v), d2.marginal(v)) for v in d1.variables), Fraction(0))


# ---------------------------------------------------------------- sensitivity


def default_swap(instance: Instance, i: int):
    """A relation that differs from edge i's relation as a predicate."""
    r = instance.edges[i].relation
    if isinstance(r, Parity):
        return Parity(1 - r.b, r.arity)
    if isinstance(r, Trivial):
        return Equality(r.arity)
    alph = instance.edge_alphabets(instance.edges[i])
    acc = r.accepted(alph)
    import itertools

    full = set(itertools.product(*(a.labels() for a in alph)))
    comp = full - acc
    if not comp:
        return Equality(r.arity)
    return Tuples(r.arity, frozenset(comp))


def _run(algorithm, instance, samples, seed, tag):
    return [algorithm(instance, random.Random(derive_seed(seed, tag, s))) for s in range(samples)]


@dataclass
class EdgeSensitivity:
    edge: int
    policy: str
    emd: Fraction
    coupling: float
    coupling_se: float
    samples: int

    def row(self):
        return {
            "edge": self.edge,
            "policy": self.policy,
            "emd": float(self.emd),
            "coupling": self.coupling,
            "coupling_se": self.coupling_se,
            "samples": self.samples,
        }


def _pair_stats(out_a, out_b):
    emd, _ = emd_exact(Empirical.from_samples(out_a), Empirical.from_samples(out_b))
    hams = [hamming(x, y) for x, y in zip(out_a, out_b)]
    mean = statistics.fmean(hams)
    se = statistics.pstdev(hams) / math.sqrt(len(hams)) if len(hams) > 1 else 0.0
    return emd, mean, se


def _neighbor(instance, i, policy, swap_with):
    if policy == "delete":
        return delete_constraint(instance, i)
    rel = swap_with(instance, i) if swap_with else default_swap(instance, i)
    return swap_constraint(instance, i, rel)


def estimate_sensitivity(
    algorithm, instance, policy="delete", samples=64, seed=0, edges=None, swap_with=None
) -> dict:
    """Max over edges of the EMD between output distributions on I and its neighbor.

    Runs with common random numbers: sample s on both instances uses the same
    derived seed, so the paired mean Hamming distance is an upper bound on EMD.
    """
    policy = policy.lower()
    if policy not in ("delete", "swap"):
        raise ValueError("policy must be delete or swap")
    edges = range(instance.m) if edges is None else edges
    base = _run(algorithm, instance, samples, seed, "run")

    def one(i):
        other = _run(algorithm, _neighbor(instance, i, policy, swap_with), samples, seed, "run")
        emd, mean, se = _pair_stats(base, other)
        return EdgeSensitivity(i, policy, emd, mean, se, samples)

    per_edge = pmap(one, list(edges))
    worst = max(per_edge, key=lambda r: (r.emd, -r.edge)) if per_edge else None
    return {
        "policy": policy,
        "samples": samples,
        "seed": seed,
        "sensitivity": worst.emd if worst else Fraction(0),
        "argmax_edge": worst.edge if worst else None,
        "coupling_bound": max((r.coupling for r in per_edge), default=0.0),
        "edges": per_edge,
    }


def swap_vs_deletion_check(algorithm, instance, edge, samples=64, seed=0, swap_with=None) -> dict:
    """Compare swap sensitivity at one edge with deletion sensitivities of both endpoints.

    I and I' = I^{e<-R} share I - e, so with the same samples the empirical
    triangle inequality gives swap <= del(I) + del(I') <= 2 max(del(I), del(I')).
    """
    swapped = _neighbor(instance, edge, "swap", swap_with)
    deleted = delete_constraint(instance, edge)
    a = _run(algorithm, instance, samples, seed, "run")
    b = _run(algorithm, swapped, samples, seed, "run")
    c = _run(algorithm, deleted, samples, seed, "run")
    swap_emd, _, swap_se = _pair_stats(a, b)
    del_a, _, se_a = _pair_stats(a, c)
    del_b, _, se_b = _pair_stats(b, c)
    sens = max(del_a, del_b)
    tol = 3 * math.sqrt(swap_se**2 + se_a**2 + se_b**2)
    return {
        "edge": edge,
        "swap_sens": swap_emd,
        "sens": sens,
        "tolerance": tol,
        "holds": float(swap_emd) <= 2 * float(sens) + tol,
    }


# ---------------------------------------------------------------- powering diagnostics


def _se(xs):
    return statistics.pstdev(xs) / math.sqrt(len(xs)) if len(xs) > 1 else 0.0


def powering_diagnostics(
    instance, sigma, t, B, samples=10**5, seed=0, sigma_prime=None, powered=None
) -> dict:
    """Monte Carlo statistics of faulty steps along after-stopping walks.

    A step a->b along edge (a, b) is faulty for the walk x ~> y when the edge
    is violated by ``sigma`` and both endpoints' opinions agree with sigma:
    d(x, a) <= t and sigma'(x)_a = sigma(a), d(y, b) <= t and sigma'(y)_b =
    sigma(b). ``sigma_prime`` (ball labels of the ``powered`` instance)
    defaults to the ball restriction of ``sigma``.
    ``S`` counts halting rounds (moves + 1), so E[S] = t and
    Pr[S > B] = (1 - 1/t)^B; a walk is kept when it makes at most B moves.
    """
    from .transforms.common import instance_graph

    g, order, edge_map = instance_graph(instance)
    d = g.regular_degree()
    dist = gr.distance_matrix(g)
    violated = set()
    for gi, ei in enumerate(edge_map):
        e = instance.edges[ei]
        if not e.relation.accepts(tuple(sigma[v] for v in e.vars)):
            violated.add(gi)
    sig = [sigma[v] for v in order]

    def opinion(x, a):
        if sigma_prime is None:
            return sig[a]
        alph = powered.alphabet(order[x])
        return sigma_prime[order[x]][alph.ball_position(order[a])]

    def _faulty(walk):
        x, y = walk.start, walk.end
        n = 0
        for a, b, ei in walk.steps():
            if ei not in violated:
                continue
            da, db = dist[x].get(a), dist[y].get(b)
            if da is None or db is None or da > t or db > t:
                continue
            if opinion(x, a) == sig[a] and opinion(y, b) == sig[b]:
                n += 1
        return n

    chunks = 16
    per = [samples // chunks + (1 if c < samples % chunks else 0) for c in range(chunks)]

    def run_chunk(c):
        rng = random.Random(derive_seed(seed, "diag", c))
        rows = []
        for _ in range(per[c]):
            start = rng.randrange(g.n)
            walk = gr.sample_asrw_unbounded(g, t, start, rng)
            n = _faulty(walk)
            keep = walk.moves <= B
            rows.append((walk.moves + 1, n, n if keep else 0))
        return rows

    rows = [r for chunk in pmap(run_chunk, range(chunks)) for r in chunk]
    S = [r[0] for r in rows]
    N = [r[1] for r in rows]
    Ns = [r[2] for r in rows]
    Ns2 = [x * x for x in Ns]
    pos_ = [1 if x > 0 else 0 for x in Ns]
    tail = [1 if s > B else 0 for s in S]
    m1, m2, p = statistics.fmean(Ns), statistics.fmean(Ns2), statistics.fmean(pos_)
    rhs = m1 * m1 / m2 if m2 > 0 else 0.0
    # delta-method standard error of m1^2/m2
    if m2 > 0 and len(rows) > 1:
        cov = np.cov(np.array([Ns, Ns2], dtype=float))
        grad = np.array([2 * m1 / m2, -m1 * m1 / m2**2])
        rhs_se = float(math.sqrt(max(0.0, grad @ cov @ grad) / len(rows)))
    else:
        rhs_se = 0.0
    faulty_edges = len(violated)
    return {
        "t": t,
        "B": B,
        "samples": samples,
        "seed": seed,
        "faulty_edge_count": faulty_edges,
        "E_S": statistics.fmean(S),
        "E_S_se": _se(S),
        "P_S_gt_B": statistics.fmean(tail),
        "P_S_gt_B_se": _se(tail),
        "P_S_gt_B_exact": float((1 - Fraction(1, t)) ** B),
        "E_N": statistics.fmean(N),
        "E_Nstar": m1,
        "E_Nstar_sq": m2,
        "P_Nstar_pos": p,
        "P_Nstar_pos_se": _se(pos_),
        "second_moment_rhs": rhs,
        "second_moment_rhs_se": rhs_se,
        "second_moment_holds": p >= rhs - 3 * math.sqrt(_se(pos_) ** 2 + rhs_se**2),
        "lower_bound_ratio": (
            m1 * 1600 * _alphabet_size(instance) ** 2 * g.m / (t * faulty_edges)
            if faulty_edges
            else None
        ),
        "degree": d,
    }


def _alphabet_size(instance):
    return max(instance.alphabet(v).size for v in instance.variables)
