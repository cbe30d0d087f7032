"""Labellings and circuit structures on graphs.

A labelling assigns an index in ``1..m`` to both ends of every edge: edge ``e``
carries ``labels[e] = (at_tail, at_head)``. A circuit structure orders, at every
vertex, the incoming and the outgoing edges; it is stored as
``circuit[v] = (in_order, out_order)`` with edge ids. Label and circuit are
compatible when labels ascend along each order.

Graphs in A_n have no nontrivial automorphism once a circuit structure is
fixed: every vertex is reached from an external vertex along out-edges, and the
out-orders pin down every edge on the way. Decorated classes therefore get a
canonical form from a plain traversal, with no search.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

from .enumeration import enumerate_graphs
from .graphs import Graph, total_weight

Labelling = tuple[tuple[int, int], ...]
CircuitStructure = tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]


@dataclass(frozen=True)
class DecoratedGraph:
    graph: Graph
    labels: Labelling
    m: int
    circuit: CircuitStructure | None = None

    def __post_init__(self):
        if len(self.labels) != len(self.graph.edges):
            raise ValueError("labelling must cover every edge")
        for e, (s, r) in enumerate(self.labels):
            if not (1 <= s <= self.m and 1 <= r <= self.m):
                raise ValueError(f"label of edge {e} outside 1..{self.m}")
        if self.circuit is not None and not is_compatible(self.graph, self.labels, self.circuit):
            raise ValueError("circuit structure is not compatible with the labelling")

    @property
    def n_external(self) -> int:
        return self.graph.n_external

    def label(self, v: int, e: int) -> int:
        t, h = self.graph.edges[e]
        if v == t:
            return self.labels[e][0]
        if v == h:
            return self.labels[e][1]
        raise KeyError(f"edge {e} is not incident to vertex {v}")

    def weight(self) -> int:
        return total_weight(self.graph)


def enumerate_labellings(g: Graph, m: int) -> Iterator[Labelling]:
    """All ``m ** (2 |E|)`` labellings of ``g``."""
    if m < 1:
        raise ValueError(f"dimension must be positive, got m={m}")
    flat = itertools.product(range(1, m + 1), repeat=2 * len(g.edges))
    for values in flat:
        yield tuple(zip(values[0::2], values[1::2]))


def incidence_multi_indices(g: Graph, labels: Labelling, v: int,
                            m: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Label occurrence counts ``(alpha, beta)`` on the in- and out-edges of ``v``."""
    if not 0 <= v < g.n_vertices:
        raise KeyError(f"unknown vertex {v!r}")
    alpha = [0] * m
    beta = [0] * m
    for e, (t, h) in enumerate(g.edges):
        if h == v:
            alpha[labels[e][1] - 1] += 1
        if t == v:
            beta[labels[e][0] - 1] += 1
    return tuple(alpha), tuple(beta)


def multi_factorial(alpha) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def compatible_circuit_count(g: Graph, labels: Labelling, m: int | None = None) -> int:
    """C(G, l): product over vertices of alpha! beta!."""
    if m is None:
        m = max((max(p) for p in labels), default=1)
    return math.prod(
        multi_factorial(a) * multi_factorial(b)
        for a, b in (incidence_multi_indices(g, labels, v, m) for v in g.vertex_ids())
    )


def _ordered_choices(edge_ids: list[int], key) -> list[tuple[int, ...]]:
    """Orders of ``edge_ids`` that are ascending in ``key``, ties in every order."""
    blocks = [list(grp) for _, grp in itertools.groupby(sorted(edge_ids, key=key), key=key)]
    per_block = [list(itertools.permutations(b)) for b in blocks]
    return [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*per_block)]


def enumerate_compatible_circuits(g: Graph, labels: Labelling) -> list[CircuitStructure]:
    per_vertex = []
    for v in g.vertex_ids():
        ins = _ordered_choices(g.in_edges(v), key=lambda e: labels[e][1])
        outs = _ordered_choices(g.out_edges(v), key=lambda e: labels[e][0])
        per_vertex.append([(i, o) for i in ins for o in outs])
    return [tuple(c) for c in itertools.product(*per_vertex)]


def all_circuits(g: Graph) -> list[CircuitStructure]:
    """Every circuit structure of ``g``, ignoring labels."""
    return enumerate_compatible_circuits(g, tuple((1, 1) for _ in g.edges))


def is_compatible(g: Graph, labels: Labelling, circuit: CircuitStructure) -> bool:
    if len(circuit) != g.n_vertices:
        return False
    for v, (ins, outs) in enumerate(circuit):
        if sorted(ins) != sorted(g.in_edges(v)) or sorted(outs) != sorted(g.out_edges(v)):
            return False
        in_labels = [labels[e][1] for e in ins]
        out_labels = [labels[e][0] for e in outs]
        if in_labels != sorted(in_labels) or out_labels != sorted(out_labels):
            return False
    return True


# -- canonical forms of decorated graphs ----------------------------------------


def _traversal_order(g: Graph, circuit: CircuitStructure) -> list[int]:
    """Canonical vertex numbering: externals first, then discovery order."""
    order = {v: v for v in range(g.n_external)}
    queue = list(range(g.n_external))
    i = 0
    while i < len(queue):
        v = queue[i]
        i += 1
        for e in circuit[v][1]:
            h = g.edges[e][1]
            if h not in order:
                order[h] = len(order)
                queue.append(h)
    if len(order) != g.n_vertices:
        raise ValueError("decorated graph has vertices unreachable from the externals")
    return [order[v] for v in range(g.n_vertices)]


def decorated_key(d: DecoratedGraph, free_at: frozenset[int] = frozenset()) -> bytes:
    """Canonical encoding of a labelled circuit graph.

    Args:
        d: decorated graph with a circuit structure.
        free_at: vertices whose incoming order is ignored (used for the
            equivalence that forgets the order at the second external vertex).
    """
    if d.circuit is None:
        raise ValueError("canonical form needs a circuit structure")
    g, circuit = d.graph, d.circuit
    order = _traversal_order(g, circuit)
    pos_in = {}
    pos_out = {}
    for v, (ins, outs) in enumerate(circuit):
        for i, e in enumerate(ins):
            pos_in[e] = -1 if v in free_at else i
        for i, e in enumerate(outs):
            pos_out[e] = i
    weights = [None] * g.n_vertices
    for v in g.internal_ids():
        weights[order[v]] = g.weight(v)
    rows = sorted(
        (order[t], pos_out[e], order[h], pos_in[e], d.labels[e][0], d.labels[e][1])
        for e, (t, h) in enumerate(g.edges)
    )
    w = ",".join(str(x) for x in weights[g.n_external:])
    body = ";".join(",".join(str(x) for x in row) for row in rows)
    return f"LC1|n={g.n_external}|m={d.m}|w={w}|e={body}".encode()


def canonical_decorated(d: DecoratedGraph) -> DecoratedGraph:
    """Representative of ``d``'s class with vertices and edges in canonical order."""
    g, circuit = d.graph, d.circuit
    order = _traversal_order(g, circuit)
    pos_in = {e: i for ins, _ in circuit for i, e in enumerate(ins)}
    pos_out = {e: i for _, outs in circuit for i, e in enumerate(outs)}
    edge_order = sorted(range(len(g.edges)),
                        key=lambda e: (order[g.edges[e][0]], pos_out[e],
                                       order[g.edges[e][1]], pos_in[e]))
    new_id = {e: i for i, e in enumerate(edge_order)}
    weights = [0] * len(g.weights)
    for v in g.internal_ids():
        weights[order[v] - g.n_external] = g.weight(v)
    edges = tuple((order[g.edges[e][0]], order[g.edges[e][1]]) for e in edge_order)
    labels = tuple(d.labels[e] for e in edge_order)
    new_circuit = [None] * g.n_vertices
    for v, (ins, outs) in enumerate(circuit):
        new_circuit[order[v]] = (tuple(new_id[e] for e in ins), tuple(new_id[e] for e in outs))
    return DecoratedGraph(Graph(g.n_external, tuple(weights), edges), labels, d.m,
                          tuple(new_circuit))


def decorations_of(g: Graph, m: int) -> Iterator[DecoratedGraph]:
    """Every (labelling, compatible circuit) pair on ``g``."""
    for labels in enumerate_labellings(g, m):
        for circuit in enumerate_compatible_circuits(g, labels):
            yield DecoratedGraph(g, labels, m, circuit)


def labelled_circuit_classes_of(g: Graph, m: int) -> dict[bytes, DecoratedGraph]:
    classes: dict[bytes, DecoratedGraph] = {}
    for d in decorations_of(g, m):
        key = decorated_key(d)
        if key not in classes:
            classes[key] = canonical_decorated(d)
    return classes


def enumerate_labelled_circuit_classes(n: int, k: int, m: int) -> dict[bytes, DecoratedGraph]:
    """L^C_n(k) for dimension ``m``: one representative per decorated class."""
    if m < 1:
        raise ValueError(f"dimension must be positive, got m={m}")
    classes: dict[bytes, DecoratedGraph] = {}
    for g in enumerate_graphs(n, k):
        classes.update(labelled_circuit_classes_of(g, m))
    return dict(sorted(classes.items()))


def circuit_count(d: DecoratedGraph) -> int:
    """C(G) of a decorated graph: the number of circuits compatible with its labels."""
    return compatible_circuit_count(d.graph, d.labels, d.m)
