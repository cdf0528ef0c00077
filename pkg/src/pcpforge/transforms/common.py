"""Helpers shared by the instance transforms."""

from __future__ import annotations

from ..csp import Instance
from ..errors import NonBinaryInstance
from ..graphs import Graph


def instance_graph(instance: Instance):
    """Underlying multigraph of a binary instance.

    Returns ``(graph, order, edge_map)``: vertex i is ``order[i]`` (sorted
    variable order) and graph edge j comes from instance edge ``edge_map[j]``.
    An edge of multiplicity k becomes k parallel graph edges.
    """
    if not instance.is_binary():
        raise NonBinaryInstance("the underlying graph needs binary constraints")
    order = instance.sorted_variables()
    pos = {v: i for i, v in enumerate(order)}
    edges, edge_map = [], []
    for i, e in enumerate(instance.edges):
        for _ in range(e.mult):
            edges.append((pos[e.vars[0]], pos[e.vars[1]]))
            edge_map.append(i)
    return Graph(len(order), tuple(edges)), order, edge_map
