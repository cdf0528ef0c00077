"""Instance and assignment data model with exact value, cost and swap distance.

Weights are ``fractions.Fraction`` throughout, so value and cost are exact.
Variable ids are ints or strings; labels are ints or (nested) tuples of ints.
"""

from __future__ import annotations

import functools
import hashlib
import itertools
import json
import random
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    ArityMismatch,
    DomainMismatch,
    EmptyInstance,
    HypergraphMismatch,
    ParseError,
    TooLarge,
    UnknownEdge,
    UnknownVariable,
)

ENUM_CAP = 10**6


def var_key(v):
    """Total order on mixed int/str variable ids (ints first, numerically)."""
    if isinstance(v, int):
        return (0, v, "")
    return (1, 0, str(v))


def label_key(x):
    if isinstance(x, tuple):
        return (1, tuple(label_key(y) for y in x))
    return (0, x)


def label_to_json(x):
    if isinstance(x, tuple):
        return [label_to_json(y) for y in x]
    return x


def label_from_json(x):
    if isinstance(x, list):
        return tuple(label_from_json(y) for y in x)
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValueError(f"bad label {x!r}")
    return x


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------- alphabets


@dataclass(frozen=True)
class Alphabet:
    """A finite label domain.

    ``kind`` is one of ``explicit``, ``boolean``, ``product`` (``count``
    copies of ``base``) or ``ball`` (sub-assignments on the vertices in
    ``ball``, listed in sorted order, each coordinate drawn from ``base``).
    """

    kind: str
    labels_: tuple = ()
    base: "Alphabet | None" = None
    count: int = 0
    center: object = None
    radius: int = 0
    ball: tuple = ()

    def __post_init__(self):
        if self.kind == "explicit":
            if not self.labels_:
                raise ValueError("explicit alphabet must be non-empty")
            if len(set(self.labels_)) != len(self.labels_):
                raise ValueError("explicit alphabet has duplicate labels")
        elif self.kind in ("product", "ball"):
            if self.base is None:
                raise ValueError(f"{self.kind} alphabet needs a base")
        elif self.kind != "boolean":
            raise ValueError(f"unknown alphabet kind {self.kind}")

    @functools.cached_property
    def _pos(self):
        return {x: i for i, x in enumerate(self.labels_)}

    @functools.cached_property
    def _ball_pos(self):
        return {v: i for i, v in enumerate(self.ball)}

    @property
    def width(self) -> int:
        return self.count if self.kind == "product" else len(self.ball)

    @property
    def size(self) -> int:
        if self.kind == "explicit":
            return len(self.labels_)
        if self.kind == "boolean":
            return 2
        return self.base.size ** self.width

    def enumerable(self, cap: int = ENUM_CAP) -> bool:
        return self.size <= cap

    def labels(self, cap: int = ENUM_CAP):
        if self.size > cap:
            raise TooLarge(f"alphabet of size {self.size} exceeds enumeration cap {cap}")
        if self.kind == "explicit":
            return list(self.labels_)
        if self.kind == "boolean":
            return [0, 1]
        return list(itertools.product(self.base.labels(cap), repeat=self.width))

    def contains(self, x) -> bool:
        if self.kind == "explicit":
            return not isinstance(x, tuple) and x in self._pos
        if self.kind == "boolean":
            return x in (0, 1) and not isinstance(x, (tuple, bool))
        return (
            isinstance(x, tuple)
            and len(x) == self.width
            and all(self.base.contains(y) for y in x)
        )

    def index(self, x) -> int:
        """Position of ``x`` in enumeration order."""
        if self.kind == "explicit":
            return self._pos[x]
        if self.kind == "boolean":
            return int(x)
        q = self.base.size
        i = 0
        for y in x:
            i = i * q + self.base.index(y)
        return i

    def label_at(self, i: int):
        if self.kind == "explicit":
            return self.labels_[i]
        if self.kind == "boolean":
            return int(i)
        q = self.base.size
        out = []
        for _ in range(self.width):
            i, r = divmod(i, q)
            out.append(self.base.label_at(r))
        return tuple(reversed(out))

    def smallest(self):
        return self.label_at(0)

    def ball_position(self, v) -> int:
        return self._ball_pos[v]

    def to_json(self) -> dict:
        if self.kind == "explicit":
            return {"kind": "explicit", "labels": [label_to_json(x) for x in self.labels_]}
        if self.kind == "boolean":
            return {"kind": "boolean"}
        if self.kind == "product":
            return {"kind": "product", "base": self.base.to_json(), "count": self.count}
        return {
            "kind": "ball",
            "center": self.center,
            "radius": self.radius,
            "ball": list(self.ball),
            "base": self.base.to_json(),
        }

    @staticmethod
    def from_json(d) -> "Alphabet":
        kind = d["kind"]
        if kind == "explicit":
            return explicit([label_from_json(x) for x in d["labels"]])
        if kind == "boolean":
            return BOOLEAN
        if kind == "product":
            return Alphabet("product", base=Alphabet.from_json(d["base"]), count=int(d["count"]))
        if kind == "ball":
            return ball_labeling(
                d["center"], int(d["radius"]), tuple(d["ball"]), Alphabet.from_json(d["base"])
            )
        raise ValueError(f"unknown alphabet kind {kind}")


def explicit(labels) -> Alphabet:
    return Alphabet("explicit", labels_=tuple(labels))


def dense(k: int) -> Alphabet:
    return explicit(range(k))


BOOLEAN = Alphabet("boolean")


def product_alphabet(base: Alphabet, count: int) -> Alphabet:
    return Alphabet("product", base=base, count=count)


def ball_labeling(center, radius: int, ball, base: Alphabet) -> Alphabet:
    return Alphabet(
        "ball", base=base, center=center, radius=radius, ball=tuple(sorted(ball, key=var_key))
    )


# ---------------------------------------------------------------- relations


class Relation:
    """A constraint predicate over ordered positions."""

    def accepts(self, t) -> bool:  # pragma: no cover - interface
        raise NotImplementedError

    def to_json(self) -> dict:  # pragma: no cover - interface
        raise NotImplementedError

    @functools.cached_property
    def fingerprint(self) -> str:
        return hashlib.sha256(_dumps(self.to_json()).encode()).hexdigest()

    def accepted(self, alphabets, cap: int = ENUM_CAP) -> frozenset:
        total = 1
        for a in alphabets:
            total *= a.size
        if total > cap:
            raise TooLarge(f"relation domain of size {total} exceeds cap {cap}")
        return frozenset(
            t for t in itertools.product(*(a.labels() for a in alphabets)) if self.accepts(t)
        )

    def table(self, alphabets) -> np.ndarray:
        """Boolean acceptance table indexed by label positions."""
        shape = tuple(a.size for a in alphabets)
        total = int(np.prod(shape)) if shape else 1
        if total > ENUM_CAP:
            raise TooLarge(f"relation table of size {total} exceeds cap")
        out = np.zeros(shape, dtype=bool)
        for idx, t in zip(
            itertools.product(*(range(s) for s in shape)),
            itertools.product(*(a.labels() for a in alphabets)),
        ):
            if self.accepts(t):
                out[idx] = True
        return out

    def always_true(self) -> bool:
        return False


@dataclass(frozen=True, eq=True)
class Parity(Relation):
    """Boolean linear equation: the entries sum to ``b`` mod 2."""

    b: int
    arity: int = 2

    @property
    def kind(self):
        return "parity2" if self.arity == 2 else "parity"

    def accepts(self, t) -> bool:
        return (sum(t) & 1) == self.b

    def to_json(self):
        if self.arity == 2:
            return {"kind": "parity2", "b": self.b}
        return {"kind": "parity", "b": self.b, "arity": self.arity}


def Parity2(b: int) -> Parity:
    return Parity(b, 2)


@dataclass(frozen=True, eq=True)
class Equality(Relation):
    arity: int = 2
    kind = "eq"

    def accepts(self, t) -> bool:
        return all(x == t[0] for x in t)

    def to_json(self):
        d = {"kind": "eq"}
        if self.arity != 2:
            d["arity"] = self.arity
        return d


@dataclass(frozen=True, eq=True)
class Trivial(Relation):
    arity: int = 2
    kind = "trivial"

    def accepts(self, t) -> bool:
        return True

    def always_true(self) -> bool:
        return True

    def to_json(self):
        d = {"kind": "trivial"}
        if self.arity != 2:
            d["arity"] = self.arity
        return d


@dataclass(frozen=True, eq=True)
class Tuples(Relation):
    arity: int
    accept: frozenset
    kind = "tuples"

    def accepts(self, t) -> bool:
        return tuple(t) in self.accept

    def to_json(self):
        rows = sorted(self.accept, key=label_key)
        return {"kind": "tuples", "arity": self.arity, "accept": [label_to_json(r) for r in rows]}


def tuples(accept, arity: int | None = None) -> Tuples:
    accept = frozenset(tuple(t) for t in accept)
    if arity is None:
        if not accept:
            raise ValueError("arity needed for an empty tuple relation")
        arity = len(next(iter(accept)))
    if any(len(t) != arity for t in accept):
        raise ArityMismatch("tuple of wrong length in relation")
    return Tuples(arity, accept)


@dataclass(frozen=True, eq=True)
class Projection(Relation):
    """Accepts ``(a, mapping[a])``; left labels are dense ints."""

    mapping: tuple
    arity: int = 2
    kind = "projection"

    def accepts(self, t) -> bool:
        a, b = t
        return 0 <= a < len(self.mapping) and self.mapping[a] == b

    def to_json(self):
        return {"kind": "projection", "map": [label_to_json(x) for x in self.mapping]}


@dataclass(frozen=True, eq=True)
class Conjunction(Relation):
    """AND of component relations, each reading the given positions."""

    arity: int
    parts: tuple  # of (positions tuple, Relation)
    kind = "and"

    def accepts(self, t) -> bool:
        return all(r.accepts(tuple(t[i] for i in pos)) for pos, r in self.parts)

    def always_true(self) -> bool:
        return all(r.always_true() for _, r in self.parts)

    def to_json(self):
        return {
            "kind": "and",
            "arity": self.arity,
            "parts": [{"pos": list(pos), "rel": r.to_json()} for pos, r in self.parts],
        }


@functools.lru_cache(maxsize=64)
def _ball_digits(q: int, width: int) -> np.ndarray:
    """Row i lists the base-label indices of ball label i, most significant first."""
    return np.arange(q**width)[:, None] // q ** np.arange(width - 1, -1, -1)[None, :] % q


@functools.lru_cache(maxsize=4096)
def _base_table(r: Relation, base: Alphabet) -> np.ndarray:
    return r.table((base, base))


@dataclass(frozen=True, eq=True)
class WalkConsistency(Relation):
    """Binary relation on ball labels checking each recorded walk edge.

    A check ``(a, b, ia, ib, R)`` requires ``(x[ia], y[ib])`` in ``R`` where
    ``x`` and ``y`` are the left and right sub-assignments.
    """

    checks: tuple
    arity: int = 2
    kind = "walk"

    def accepts(self, t) -> bool:
        x, y = t
        return all(r.accepts((x[ia], y[ib])) for _, _, ia, ib, r in self.checks)

    def always_true(self) -> bool:
        return all(r.always_true() for *_, r in self.checks)

    def table(self, alphabets) -> np.ndarray:
        """Vectorized over ball labels: one lookup in each check's base table."""
        ax, ay = alphabets
        if ax.kind != "ball" or ay.kind != "ball" or ax.base != ay.base:
            return super().table(alphabets)
        total = ax.size * ay.size
        if total > ENUM_CAP:
            raise TooLarge(f"relation table of size {total} exceeds cap")
        base = ax.base
        xs, ys = _ball_digits(base.size, ax.width), _ball_digits(base.size, ay.width)
        out = np.ones((ax.size, ay.size), dtype=bool)
        for _, _, ia, ib, r in self.checks:
            out &= _base_table(r, base)[xs[:, ia][:, None], ys[:, ib][None, :]]
        return out

    def to_json(self):
        return {
            "kind": "walk",
            "checks": [
                {"a": a, "b": b, "ia": ia, "ib": ib, "rel": r.to_json()}
                for a, b, ia, ib, r in self.checks
            ],
        }


@dataclass(frozen=True, eq=True)
class Transposed(Relation):
    """Accepts ``(a, b)`` iff ``inner`` accepts ``(b, a)``."""

    inner: Relation
    arity: int = 2
    kind = "transpose"

    def accepts(self, t) -> bool:
        return self.inner.accepts((t[1], t[0]))

    def always_true(self) -> bool:
        return self.inner.always_true()

    def to_json(self):
        return {"kind": "transpose", "rel": self.inner.to_json()}


def transposed(r: Relation) -> Relation:
    if isinstance(r, Transposed):
        return r.inner
    if isinstance(r, (Parity, Equality, Trivial)):
        return r
    return Transposed(r)


@dataclass(frozen=True, eq=True)
class Disjunction(Relation):
    """Boolean clause: position i is a positive literal when ``signs[i]`` is 1."""

    signs: tuple
    kind = "or"

    @property
    def arity(self):
        return len(self.signs)

    def accepts(self, t) -> bool:
        return any(x == s for x, s in zip(t, self.signs))

    def to_json(self):
        return {"kind": "or", "signs": list(self.signs)}


def relation_from_json(d) -> Relation:
    kind = d["kind"]
    if kind == "parity2":
        return Parity(int(d["b"]), 2)
    if kind == "parity":
        return Parity(int(d["b"]), int(d["arity"]))
    if kind == "eq":
        return Equality(int(d.get("arity", 2)))
    if kind == "trivial":
        return Trivial(int(d.get("arity", 2)))
    if kind == "tuples":
        rows = [tuple(label_from_json(x) for x in row) for row in d["accept"]]
        return tuples(rows, int(d["arity"]) if "arity" in d else None)
    if kind == "projection":
        return Projection(tuple(label_from_json(x) for x in d["map"]))
    if kind == "and":
        parts = tuple((tuple(p["pos"]), relation_from_json(p["rel"])) for p in d["parts"])
        return Conjunction(int(d["arity"]), parts)
    if kind == "walk":
        checks = tuple(
            (c["a"], c["b"], int(c["ia"]), int(c["ib"]), relation_from_json(c["rel"]))
            for c in d["checks"]
        )
        return WalkConsistency(checks)
    if kind == "transpose":
        return Transposed(relation_from_json(d["rel"]))
    if kind == "or":
        return Disjunction(tuple(int(x) for x in d["signs"]))
    raise ValueError(f"unknown relation kind {kind}")


def same_predicate(r1: Relation, r2: Relation, alphabets, cap: int = ENUM_CAP) -> bool:
    """Extensional comparison over the declared alphabets when enumerable."""
    if r1 == r2:
        return True
    if r1.arity != r2.arity:
        return False
    total = 1
    for a in alphabets:
        total *= a.size
    if total <= cap:
        return bool(np.array_equal(r1.table(alphabets), r2.table(alphabets)))
    return r1.fingerprint == r2.fingerprint


# ---------------------------------------------------------------- instances


@dataclass(frozen=True)
class Edge:
    vars: tuple
    relation: Relation
    weight: Fraction = Fraction(1)
    mult: int = 1

    @property
    def mass(self) -> Fraction:
        return self.weight * self.mult


class Instance:
    """A weighted hypergraph CSP.

    ``variables`` maps variable id to an alphabet name declared in
    ``alphabets``. Edges keep the order they were given in; ``canonical()``
    returns the sorted form that serialization writes.
    """

    def __init__(self, variables, alphabets, edges, marked=None, validate=True):
        self.variables = dict(variables)
        self.alphabets = dict(alphabets)
        self.edges = tuple(
            e if isinstance(e, Edge) else Edge(tuple(e[0]), e[1], *e[2:]) for e in edges
        )
        self.marked = None if marked is None else frozenset(marked)
        if validate:
            self._validate()

    def _validate(self):
        for v, a in self.variables.items():
            if a not in self.alphabets:
                raise UnknownVariable(f"variable {v!r} refers to unknown alphabet {a!r}")
        for i, e in enumerate(self.edges):
            for v in e.vars:
                if v not in self.variables:
                    raise UnknownVariable(f"edge {i} uses unknown variable {v!r}")
            if len(e.vars) != e.relation.arity:
                raise ArityMismatch(
                    f"edge {i} has {len(e.vars)} variables but relation arity {e.relation.arity}"
                )
            if not isinstance(e.weight, Fraction):
                object.__setattr__(e, "weight", Fraction(e.weight))
            if e.weight < 0 or e.mult < 1:
                raise ValueError(f"edge {i} has negative weight or non-positive multiplicity")
        if self.marked is not None:
            for v in self.marked:
                if v not in self.variables:
                    raise UnknownVariable(f"marked variable {v!r} is not a variable")

    # basic views
    def alphabet(self, v) -> Alphabet:
        try:
            return self.alphabets[self.variables[v]]
        except KeyError:
            raise UnknownVariable(f"unknown variable {v!r}") from None

    def edge_alphabets(self, e: Edge):
        return [self.alphabet(v) for v in e.vars]

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def total_weight(self) -> Fraction:
        return sum((e.mass for e in self.edges), Fraction(0))

    def is_unweighted(self) -> bool:
        return all(e.weight == 1 for e in self.edges)

    def is_binary(self) -> bool:
        return all(len(e.vars) == 2 for e in self.edges)

    def degrees(self) -> dict:
        """Endpoint counts per variable, with multiplicities expanded."""
        deg = {v: 0 for v in self.variables}
        for e in self.edges:
            for v in e.vars:
                deg[v] += e.mult
        return deg

    def sorted_variables(self):
        return sorted(self.variables, key=var_key)

    def replace(self, **kw) -> "Instance":
        args = dict(
            variables=self.variables, alphabets=self.alphabets, edges=self.edges, marked=self.marked
        )
        args.update(kw)
        return Instance(**args, validate=False)

    def canonical(self) -> "Instance":
        edges = sorted(
            self.edges,
            key=lambda e: (tuple(var_key(v) for v in e.vars), e.relation.fingerprint, e.weight, e.mult),
        )
        variables = {v: self.variables[v] for v in self.sorted_variables()}
        return Instance(variables, self.alphabets, edges, self.marked, validate=False)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return serialize(self) == serialize(other)

    __hash__ = None

    def __repr__(self):
        return f"Instance(n={self.n}, m={self.m}, alphabets={len(self.alphabets)})"


def single_alphabet_instance(variables, alphabet: Alphabet, edges, name="A", marked=None) -> Instance:
    return Instance({v: name for v in variables}, {name: alphabet}, edges, marked)


# ---------------------------------------------------------------- assignments


class Assignment(Mapping):
    """Immutable, hashable map from variable id to label."""

    __slots__ = ("_d", "_key")

    def __init__(self, labels=()):
        d = dict(labels)
        self._d = d
        self._key = tuple(sorted(d.items(), key=lambda kv: var_key(kv[0])))

    def __getitem__(self, v):
        return self._d[v]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        if isinstance(other, Assignment):
            return self._key == other._key
        if isinstance(other, Mapping):
            return self._d == dict(other)
        return NotImplemented

    def items_sorted(self):
        return self._key

    def updated(self, changes) -> "Assignment":
        d = dict(self._d)
        d.update(changes)
        return Assignment(d)

    def restrict(self, keys) -> "Assignment":
        return Assignment({k: self._d[k] for k in keys})

    def to_json(self):
        return [[k, label_to_json(v)] for k, v in self._key]

    @staticmethod
    def from_json(rows) -> "Assignment":
        return Assignment({k: label_from_json(v) for k, v in rows})

    def __repr__(self):
        return f"Assignment({dict(self._key)!r})"


def check_assignment(instance: Instance, sigma: Mapping, labels: bool = True):
    for v in instance.variables:
        if v not in sigma:
            raise UnknownVariable(f"assignment is missing variable {v!r}")
        if labels and not instance.alphabet(v).contains(sigma[v]):
            raise DomainMismatch(f"label {sigma[v]!r} not in the alphabet of {v!r}")


def satisfied(instance: Instance, sigma: Mapping, i: int) -> bool:
    e = instance.edges[i]
    return e.relation.accepts(tuple(sigma[v] for v in e.vars))


def value(instance: Instance, sigma: Mapping, check: bool = True) -> Fraction:
    """Weighted, multiplicity-counted fraction of satisfied constraints."""
    if check:
        check_assignment(instance, sigma)
    total = instance.total_weight
    if not instance.edges or total == 0:
        raise EmptyInstance("value is undefined on an edgeless instance")
    good = Fraction(0)
    for e in instance.edges:
        if e.relation.accepts(tuple(sigma[v] for v in e.vars)):
            good += e.mass
    return good / total


def cost(instance: Instance, sigma: Mapping, check: bool = True) -> Fraction:
    return 1 - value(instance, sigma, check)


def violated_edges(instance: Instance, sigma: Mapping):
    return [i for i, e in enumerate(instance.edges) if not e.relation.accepts(tuple(sigma[v] for v in e.vars))]


def swap_constraint(instance: Instance, i: int, relation: Relation) -> Instance:
    if not 0 <= i < instance.m:
        raise UnknownEdge(f"no edge {i}")
    e = instance.edges[i]
    if relation.arity != len(e.vars):
        raise ArityMismatch("replacement relation has the wrong arity")
    edges = list(instance.edges)
    edges[i] = Edge(e.vars, relation, e.weight, e.mult)
    return instance.replace(edges=tuple(edges))


def delete_constraint(instance: Instance, i: int) -> Instance:
    if not 0 <= i < instance.m:
        raise UnknownEdge(f"no edge {i}")
    return instance.replace(edges=instance.edges[:i] + instance.edges[i + 1 :])


def swap_distance(a: Instance, b: Instance, cap: int = ENUM_CAP) -> int:
    """Number of edge positions whose relations differ as predicates."""
    if a.variables.keys() != b.variables.keys() or any(
        a.alphabet(v) != b.alphabet(v) for v in a.variables
    ):
        raise HypergraphMismatch("instances have different variables or alphabets")
    if a.m != b.m:
        raise HypergraphMismatch("instances have different edge counts")
    dist = 0
    for e, f in zip(a.edges, b.edges):
        if e.vars != f.vars or e.weight != f.weight or e.mult != f.mult:
            raise HypergraphMismatch("instances have different hyperedges")
        if not same_predicate(e.relation, f.relation, a.edge_alphabets(e), cap):
            dist += 1
    return dist


def positional_changes(a: Instance, b: Instance, cap: int = ENUM_CAP) -> int:
    """Edge positions whose scope, weight or predicate differ (equal edge counts required).

    Used where a transform's constraint layout is positionally aligned but
    the touched variables may change, so swap distance is undefined.
    """
    if a.m != b.m:
        raise HypergraphMismatch("instances have different edge counts")
    out = 0
    for e, f in zip(a.edges, b.edges):
        if e.vars != f.vars or e.weight != f.weight or e.mult != f.mult:
            out += 1
        elif not same_predicate(e.relation, f.relation, a.edge_alphabets(e), cap):
            out += 1
    return out


def hamming(s1: Mapping, s2: Mapping) -> int:
    if set(s1) != set(s2):
        raise DomainMismatch("assignments are over different variables")
    return sum(1 for v in s1 if s1[v] != s2[v])


# ---------------------------------------------------------------- distributions


def _check_probs(probs):
    total = sum(probs, Fraction(0))
    if total != 1 or any(p < 0 for p in probs):
        raise ValueError("probabilities must be non-negative and sum to exactly 1")


@dataclass(frozen=True)
class PointMass:
    assignment: Assignment

    @property
    def variables(self):
        return frozenset(self.assignment)

    def support(self, cap: int = ENUM_CAP):
        return [(self.assignment, Fraction(1))]

    def marginal(self, v) -> dict:
        return {self.assignment[v]: Fraction(1)}

    def sample(self, rng) -> Assignment:
        return self.assignment


@dataclass(frozen=True)
class PerVertexProduct:
    """Independent per-variable label distributions (exact)."""

    marginals: dict = field(hash=False)

    def __post_init__(self):
        for v, dist in self.marginals.items():
            _check_probs(list(dist.values()))

    @property
    def variables(self):
        return frozenset(self.marginals)

    def marginal(self, v) -> dict:
        return {a: p for a, p in self.marginals[v].items() if p}

    def support(self, cap: int = ENUM_CAP):
        keys = sorted(self.marginals, key=var_key)
        options = [sorted(self.marginal(v).items(), key=lambda kv: label_key(kv[0])) for v in keys]
        size = 1
        for o in options:
            size *= len(o)
        if size > cap:
            raise TooLarge(f"product support of size {size} exceeds cap")
        out = []
        for combo in itertools.product(*options):
            p = Fraction(1)
            for _, q in combo:
                p *= q
            out.append((Assignment(zip(keys, (a for a, _ in combo))), p))
        return out

    def sample(self, rng: random.Random) -> Assignment:
        out = {}
        for v in sorted(self.marginals, key=var_key):
            items = sorted(self.marginal(v).items(), key=lambda kv: label_key(kv[0]))
            u = rng.random()
            acc = 0.0
            pick = items[-1][0]
            for a, p in items:
                acc += float(p)
                if u < acc:
                    pick = a
                    break
            out[v] = pick
        return Assignment(out)


@dataclass(frozen=True)
class Empirical:
    """Finitely supported distribution given by (assignment, probability) pairs."""

    items: tuple

    def __post_init__(self):
        merged = {}
        for a, p in self.items:
            a = a if isinstance(a, Assignment) else Assignment(a)
            merged[a] = merged.get(a, Fraction(0)) + Fraction(p)
        _check_probs(list(merged.values()))
        rows = tuple(sorted(((a, p) for a, p in merged.items() if p), key=lambda ap: ap[0].items_sorted().__repr__()))
        object.__setattr__(self, "items", rows)

    @staticmethod
    def from_samples(samples) -> "Empirical":
        samples = list(samples)
        n = len(samples)
        counts = {}
        for s in samples:
            s = s if isinstance(s, Assignment) else Assignment(s)
            counts[s] = counts.get(s, 0) + 1
        return Empirical(tuple((a, Fraction(c, n)) for a, c in counts.items()))

    @property
    def variables(self):
        return frozenset(self.items[0][0]) if self.items else frozenset()

    def support(self, cap: int = ENUM_CAP):
        return list(self.items)

    def marginal(self, v) -> dict:
        out = {}
        for a, p in self.items:
            out[a[v]] = out.get(a[v], Fraction(0)) + p
        return out

    def sample(self, rng: random.Random) -> Assignment:
        u = rng.random()
        acc = 0.0
        for a, p in self.items:
            acc += float(p)
            if u < acc:
                return a
        return self.items[-1][0]


def tv_distance(p: dict, q: dict) -> Fraction:
    keys = set(p) | set(q)
    return sum((abs(p.get(k, Fraction(0)) - q.get(k, Fraction(0))) for k in keys), Fraction(0)) / 2


def l1_distance(p: dict, q: dict) -> Fraction:
    return 2 * tv_distance(p, q)


# ---------------------------------------------------------------- serialization

FORMAT_VERSION = 1


def _edge_json(e: Edge) -> dict:
    w = e.weight
    return {
        "vars": list(e.vars),
        "relation": e.relation.to_json(),
        "weight": f"{w.numerator}/{w.denominator}",
        "mult": e.mult,
    }


def to_json(instance: Instance) -> dict:
    c = instance.canonical()
    used = sorted(set(c.variables.values()))
    d = {
        "format": FORMAT_VERSION,
        "alphabets": {name: c.alphabets[name].to_json() for name in used},
        "variables": [{"id": v, "alphabet": a} for v, a in c.variables.items()],
        "edges": [_edge_json(e) for e in c.edges],
    }
    if c.marked is not None:
        d["marked"] = sorted(c.marked, key=var_key)
    return d


def serialize(instance: Instance) -> bytes:
    """Canonical, byte-deterministic JSON encoding."""
    return (_dumps(to_json(instance)) + "\n").encode()


def _parse_weight(s, loc):
    try:
        if isinstance(s, int):
            return Fraction(s)
        p, _, q = str(s).partition("/")
        return Fraction(int(p), int(q) if q else 1)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad weight {s!r}", loc) from None


def from_json(d) -> Instance:
    if not isinstance(d, dict):
        raise ParseError("top level must be an object", "$")
    try:
        alphabets = {}
        for name, a in d.get("alphabets", {}).items():
            try:
                alphabets[name] = Alphabet.from_json(a)
            except (KeyError, ValueError, TypeError) as exc:
                raise ParseError(str(exc), f"alphabets.{name}") from None
        variables = {}
        for i, row in enumerate(d["variables"]):
            loc = f"variables[{i}]"
            vid = row["id"]
            if isinstance(vid, bool) or not isinstance(vid, (int, str)):
                raise ParseError("variable id must be int or string", loc)
            if vid in variables:
                raise ParseError(f"duplicate variable {vid!r}", loc)
            if row["alphabet"] not in alphabets:
                raise ParseError(f"unknown alphabet {row['alphabet']!r}", loc)
            variables[vid] = row["alphabet"]
        edges = []
        for i, row in enumerate(d["edges"]):
            loc = f"edges[{i}]"
            vars_ = tuple(row["vars"])
            for v in vars_:
                if v not in variables:
                    raise ParseError(f"unknown variable {v!r}", loc)
            try:
                rel = relation_from_json(row["relation"])
            except (KeyError, ValueError, TypeError, ArityMismatch) as exc:
                raise ParseError(f"bad relation: {exc}", loc + ".relation") from None
            if rel.arity != len(vars_):
                raise ParseError("relation arity does not match the hyperedge", loc)
            alph = [alphabets[variables[v]] for v in vars_]
            if isinstance(rel, Tuples):
                for t in rel.accept:
                    if not all(a.contains(x) for a, x in zip(alph, t)):
                        raise ParseError(f"tuple {t!r} lies outside the declared alphabets", loc)
            if isinstance(rel, Projection):
                if not all(alph[1].contains(x) for x in rel.mapping):
                    raise ParseError("projection image outside the right alphabet", loc)
            mult = int(row.get("mult", 1))
            if mult < 1:
                raise ParseError("multiplicity must be positive", loc)
            w = _parse_weight(row.get("weight", "1/1"), loc + ".weight")
            if w < 0:
                raise ParseError("weight must be non-negative", loc + ".weight")
            edges.append(Edge(vars_, rel, w, mult))
        marked = d.get("marked")
        if marked is not None:
            for v in marked:
                if v not in variables:
                    raise ParseError(f"marked variable {v!r} unknown", "marked")
    except KeyError as exc:
        raise ParseError(f"missing key {exc}", "$") from None
    return Instance(variables, alphabets, edges, marked, validate=False)


def deserialize(text) -> Instance:
    if isinstance(text, bytes):
        text = text.decode()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return from_json(d)


def content_hash(instance: Instance) -> str:
    return hashlib.sha256(serialize(instance)).hexdigest()
