"""Expanderization: superimpose a certified expander carrying trivial constraints."""

from __future__ import annotations

from ..csp import Edge, Instance, Trivial
from ..errors import NotRegular
from ..graphs import Graph, build_expander, superimpose
from .common import instance_graph


def expander_for(instance: Instance, d0: int, seed=0) -> Graph:
    """The expander ``expanderize`` adds, on the sorted-variable vertex order."""
    return build_expander(instance.n, d0, seed)


def expanderize(instance: Instance, d0: int, seed=0) -> Instance:
    """Add an (n, d0, d0/2) expander on the variables with Trivial relations.

    Input must be a d-regular binary instance; the output is (d + d0)-regular
    with n(d + d0)/2 edges. New edges have unit weight.
    """
    g, order, _ = instance_graph(instance)
    if not g.is_regular():
        raise NotRegular("expanderization needs a regular instance")
    h = expander_for(instance, d0, seed)
    triv = Trivial()
    added = [Edge((order[a], order[b]), triv) for a, b in h.edges]
    return instance.replace(edges=instance.edges + tuple(added))


def expanderized_graph(instance: Instance, d0: int, seed=0) -> Graph:
    g, _, _ = instance_graph(instance)
    return superimpose(g, expander_for(instance, d0, seed))
