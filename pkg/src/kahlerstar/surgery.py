"""Graph rewrites: fusion and defusion of labelled circuit graphs, budding.

Fusion grafts the loose ends left by cutting out the second external vertex of
``g1`` onto ``g2``, either at a vertex (the circuit order there is extended in
every compatible way) or onto an edge (a new vertex of weight -1 splits the
edge; its two new incidences take any labels). Loose ends are attached one at a
time, so later ends may land on vertices and edge pieces created by earlier
ones. The externals of ``g2`` become the second and third externals of the
result.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .decorations import (
    DecoratedGraph,
    canonical_decorated,
    decorated_key,
    incidence_multi_indices,
    multi_factorial,
)
from .graphs import Graph, is_valid, successors


class DomainError(ValueError):
    """Raised when a rewrite is applied outside the set it is defined on."""


@dataclass(frozen=True)
class EquivClass:
    """Class of a two-external labelled circuit graph up to reordering at ext2."""

    representative: DecoratedGraph
    size: int

    @property
    def key(self) -> bytes:
        return equivalence_key(self.representative)


@dataclass(frozen=True)
class FusionResult:
    classes: dict[bytes, DecoratedGraph]

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes.values())


def _check_lc2(d: DecoratedGraph, name: str) -> None:
    if d.n_external != 2:
        raise DomainError(f"{name} must have two external vertices")
    if d.circuit is None:
        raise DomainError(f"{name} needs a circuit structure")
    if not is_valid(d.graph):
        raise DomainError(f"{name} is not a valid graph")


def equivalence_key(d: DecoratedGraph) -> bytes:
    """Canonical key of ``d`` forgetting the incoming order at the second external."""
    return decorated_key(d, free_at=frozenset({d.n_external - 1}))


def equivalence_class(d: DecoratedGraph) -> EquivClass:
    _check_lc2(d, "graph")
    alpha, _ = incidence_multi_indices(d.graph, d.labels, 1, d.m)
    return EquivClass(canonical_decorated(d), multi_factorial(alpha))


class _Work:
    """Mutable decorated multigraph used while attaching loose ends."""

    def __init__(self, kinds, edges, ins, outs):
        self.kinds = kinds      # per vertex: ('e', pos) or ('i', weight)
        self.edges = edges      # per edge: [tail, head, label_at_tail, label_at_head]
        self.ins = ins          # per vertex: list of edge ids
        self.outs = outs

    def copy(self) -> "_Work":
        return _Work(list(self.kinds), [list(e) for e in self.edges],
                     [list(x) for x in self.ins], [list(x) for x in self.outs])

    def to_decorated(self, m: int) -> DecoratedGraph:
        n = sum(1 for kind, _ in self.kinds if kind == "e")
        index = {}
        for v, (kind, val) in enumerate(self.kinds):
            if kind == "e":
                index[v] = val - 1
        weights = []
        for v, (kind, val) in enumerate(self.kinds):
            if kind == "i":
                index[v] = n + len(weights)
                weights.append(val)
        g = Graph(n, tuple(weights), tuple((index[t], index[h]) for t, h, _, _ in self.edges))
        labels = tuple((s, r) for _, _, s, r in self.edges)
        circuit = [None] * len(self.kinds)
        for v in range(len(self.kinds)):
            circuit[index[v]] = (tuple(self.ins[v]), tuple(self.outs[v]))
        return DecoratedGraph(g, labels, m, tuple(circuit))


def fuse(g1: DecoratedGraph, g2: DecoratedGraph) -> FusionResult:
    """The set F(g1, g2) of decorated classes obtainable by fusing g1 onto g2."""
    _check_lc2(g1, "g1")
    _check_lc2(g2, "g2")
    if g1.m != g2.m:
        raise DomainError("fused graphs must share the dimension m")
    m = g1.m

    # vertex layout: g1.ext1, g2.ext1, g2.ext2, g1 internals, g2 internals
    a, b = g1.graph, g2.graph
    map1 = {0: 0}
    map2 = {0: 1, 1: 2}
    kinds = [("e", 1), ("e", 2), ("e", 3)]
    for v in a.internal_ids():
        map1[v] = len(kinds)
        kinds.append(("i", a.weight(v)))
    for v in b.internal_ids():
        map2[v] = len(kinds)
        kinds.append(("i", b.weight(v)))
    n_vertices = len(kinds)

    edges: list[list[int]] = []
    ins: list[list[int]] = [[] for _ in range(n_vertices)]
    outs: list[list[int]] = [[] for _ in range(n_vertices)]
    id1: dict[int, int] = {}
    loose: list[int] = []
    for e, (t, h) in enumerate(a.edges):
        id1[e] = len(edges)
        if h == 1:
            edges.append([map1[t], -1, *g1.labels[e]])
            loose.append(id1[e])
        else:
            edges.append([map1[t], map1[h], *g1.labels[e]])
    id2: dict[int, int] = {}
    for e, (t, h) in enumerate(b.edges):
        id2[e] = len(edges)
        edges.append([map2[t], map2[h], *g2.labels[e]])
    for v in a.vertex_ids():
        if v == 1:
            continue
        in_order, out_order = g1.circuit[v]
        ins[map1[v]] = [id1[e] for e in in_order]
        outs[map1[v]] = [id1[e] for e in out_order]
    for v in b.vertex_ids():
        in_order, out_order = g2.circuit[v]
        ins[map2[v]] = [id2[e] for e in in_order]
        outs[map2[v]] = [id2[e] for e in out_order]

    start = _Work(kinds, edges, ins, outs)
    targets_v = set(map2.values())
    targets_e = set(id2.values())
    states = [(start, frozenset(targets_v), frozenset(targets_e))]

    for le in loose:
        r = start.edges[le][3]
        nxt = []
        for state, tv, te in states:
            for v in sorted(tv):
                labels_in = [state.edges[e][3] for e in state.ins[v]]
                lo = sum(1 for x in labels_in if x < r)
                hi = sum(1 for x in labels_in if x <= r)
                for pos in range(lo, hi + 1):
                    s = state.copy()
                    s.edges[le][1] = v
                    s.ins[v].insert(pos, le)
                    nxt.append((s, tv, te))
            for e in sorted(te):
                for p, q in itertools.product(range(1, m + 1), repeat=2):
                    orders = []
                    if p <= r:
                        orders.append("edge-first")
                    if r <= p:
                        orders.append("loose-first")
                    for order in orders:
                        s = state.copy()
                        x = len(s.kinds)
                        s.kinds.append(("i", -1))
                        tail, head, lt, lh = s.edges[e]
                        # e becomes tail -> x; a new edge x -> head replaces it at head
                        e2 = len(s.edges)
                        s.edges[e] = [tail, x, lt, p]
                        s.edges.append([x, head, q, lh])
                        s.ins[head][s.ins[head].index(e)] = e2
                        s.edges[le][1] = x
                        s.ins.append([e, le] if order == "edge-first" else [le, e])
                        s.outs.append([e2])
                        nxt.append((s, tv | {x}, te | {e2}))
        states = nxt

    classes: dict[bytes, DecoratedGraph] = {}
    for state, _, _ in states:
        d = state.to_decorated(m)
        key = decorated_key(d)
        if key not in classes:
            classes[key] = canonical_decorated(d)
    return FusionResult(dict(sorted(classes.items())))


def defuse(d: DecoratedGraph) -> tuple[EquivClass, DecoratedGraph]:
    """Recover ``([g1], g2)`` with ``d`` in F(g1, g2).

    ``g2`` keeps the second external vertex of ``d``, all its successors and the
    third external vertex; weight -1 vertices left with one in- and one
    out-edge are removed and their edges spliced. ``g1`` is the rest, its
    dangling edges gathered at a fresh second external vertex.
    """
    g = d.graph
    if g.n_external != 3 or d.circuit is None:
        raise DomainError("defusion needs a labelled circuit graph with three externals")
    part2 = {1, 2} | successors(g, 1)

    # -- g2 -----------------------------------------------------------------
    kinds2 = {}
    for v in part2:
        kinds2[v] = ("e", v) if g.is_external(v) else ("i", g.weight(v))
    edges2 = {e: [t, h, *d.labels[e]] for e, (t, h) in enumerate(g.edges)
              if t in part2 and h in part2}
    ins2 = {v: [e for e in d.circuit[v][0] if e in edges2] for v in part2}
    outs2 = {v: [e for e in d.circuit[v][1] if e in edges2] for v in part2}
    changed = True
    while changed:
        changed = False
        for x in sorted(part2):
            if kinds2.get(x) == ("i", -1) and len(ins2[x]) == 1 and len(outs2[x]) == 1:
                e1, e2 = ins2[x][0], outs2[x][0]
                tail, head = edges2[e1][0], edges2[e2][1]
                edges2[e1] = [tail, head, edges2[e1][2], edges2[e2][3]]
                ins2[head][ins2[head].index(e2)] = e1
                del edges2[e2], kinds2[x], ins2[x], outs2[x]
                part2.discard(x)
                changed = True
                break
    g2 = _assemble(kinds2, edges2, ins2, outs2, d.m)

    # -- g1 -----------------------------------------------------------------
    rest = [v for v in g.vertex_ids() if v not in ({1, 2} | successors(g, 1))]
    kinds1 = {v: (("e", 1) if v == 0 else ("i", g.weight(v))) for v in rest}
    sink = "sink"
    kinds1[sink] = ("e", 2)
    edges1 = {}
    for e, (t, h) in enumerate(g.edges):
        if t in kinds1 and t != sink:
            edges1[e] = [t, h if h in kinds1 else sink, *d.labels[e]]
    ins1 = {v: [e for e in d.circuit[v][0] if e in edges1] for v in rest}
    outs1 = {v: list(d.circuit[v][1]) for v in rest}
    ins1[sink] = sorted((e for e, row in edges1.items() if row[1] == sink),
                        key=lambda e: (edges1[e][3], e))
    outs1[sink] = []
    g1 = _assemble(kinds1, edges1, ins1, outs1, d.m)
    return equivalence_class(g1), g2


def _assemble(kinds: dict, edges: dict, ins: dict, outs: dict, m: int) -> DecoratedGraph:
    """Build a canonical decorated graph from dict-based pieces.

    External kinds are ``('e', pos)`` with positions renumbered by rank.
    """
    ext = sorted((val, v) for v, (kind, val) in kinds.items() if kind == "e")
    index = {v: i for i, (_, v) in enumerate(ext)}
    n = len(ext)
    weights = []
    for v in sorted((v for v in kinds if kinds[v][0] == "i"), key=str):
        index[v] = n + len(weights)
        weights.append(kinds[v][1])
    eid = {e: i for i, e in enumerate(sorted(edges))}
    g = Graph(n, tuple(weights),
              tuple((index[edges[e][0]], index[edges[e][1]]) for e in sorted(edges)))
    labels = tuple((edges[e][2], edges[e][3]) for e in sorted(edges))
    circuit = [None] * len(index)
    for v, i in index.items():
        circuit[i] = (tuple(eid[e] for e in ins[v]), tuple(eid[e] for e in outs[v]))
    return canonical_decorated(DecoratedGraph(g, labels, m, tuple(circuit)))


# -- budding ------------------------------------------------------------------


def bud(g: Graph, weight: int) -> Graph:
    """Turn the first external vertex into an internal vertex of the given weight,
    fed by a single edge from a new first external vertex."""
    if g.n_external != 2:
        raise DomainError("budding is defined on graphs with two external vertices")
    if weight < -1:
        raise DomainError(f"weight must be at least -1, got {weight}")
    deg = g.out_degrees[0]
    if deg == 0:
        raise DomainError("cannot bud a graph whose first external vertex is isolated")
    if weight == -1 and deg == 1:
        raise DomainError("weight -1 budding needs first-external degree > 1")
    u = g.n_vertices
    remap = {v: v for v in g.vertex_ids()}
    remap[0] = u
    edges = [(0, u)] + [(remap[t], remap[h]) for t, h in g.edges]
    return Graph(2, g.weights + (weight,), tuple(edges))


def debud(g: Graph) -> tuple[Graph, int]:
    """Inverse of :func:`bud` on graphs whose first external vertex has degree one."""
    if g.n_external != 2:
        raise DomainError("debudding is defined on graphs with two external vertices")
    first = g.out_edges(0)
    if len(first) != 1:
        raise DomainError("first external vertex must have exactly one edge")
    u = g.edges[first[0]][1]
    if g.is_external(u):
        raise DomainError("the neighbour of the first external vertex must be internal")
    if g.in_degrees[u] != 1:
        raise DomainError("the budded vertex must have a single incoming edge")
    weight = g.weight(u)
    internals = [v for v in g.internal_ids() if v != u]
    remap = {u: 0, 1: 1}
    for i, v in enumerate(internals):
        remap[v] = 2 + i
    edges = tuple((remap[t], remap[h]) for e, (t, h) in enumerate(g.edges) if e != first[0])
    return Graph(2, tuple(g.weight(v) for v in internals), edges), weight
