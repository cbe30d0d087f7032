"""Weighted acyclic graphs with numbered external vertices.

Vertices are integers. The first ``n_external`` of them are the external
vertices (vertex ``i`` is external number ``i + 1``); the rest are internal and
carry a weight from ``{-1, 0, 1, ...}``. Edges are ``(tail, head)`` pairs and an
edge's id is its position in ``Graph.edges``. Parallel edges are allowed.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple

CANONICAL_VERSION = "KS1"


class Vertex(NamedTuple):
    id: int
    position: int | None  # 1-based external number, None for internal vertices
    weight: int | None  # None for external vertices

    @property
    def external(self) -> bool:
        return self.position is not None


class Edge(NamedTuple):
    id: int
    tail: int
    head: int


@dataclass(frozen=True)
class Violation:
    rule: str
    where: str

    def __str__(self) -> str:
        return f"{self.rule} ({self.where})"


@dataclass(frozen=True)
class Graph:
    n_external: int
    weights: tuple[int, ...] = ()
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "edges", tuple((int(t), int(h)) for t, h in self.edges))

    @property
    def n_vertices(self) -> int:
        return self.n_external + len(self.weights)

    def vertex_ids(self) -> range:
        return range(self.n_vertices)

    def internal_ids(self) -> range:
        return range(self.n_external, self.n_vertices)

    def is_external(self, v: int) -> bool:
        return 0 <= v < self.n_external

    def weight(self, v: int) -> int:
        if self.is_external(v):
            raise ValueError(f"vertex {v} is external and has no weight")
        return self.weights[v - self.n_external]

    def vertices(self) -> list[Vertex]:
        out = [Vertex(i, i + 1, None) for i in range(self.n_external)]
        out += [Vertex(self.n_external + i, None, w) for i, w in enumerate(self.weights)]
        return out

    def edge_list(self) -> list[Edge]:
        return [Edge(i, t, h) for i, (t, h) in enumerate(self.edges)]

    @cached_property
    def in_degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n_vertices
        for _, h in self.edges:
            deg[h] += 1
        return tuple(deg)

    @cached_property
    def out_degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n_vertices
        for t, _ in self.edges:
            deg[t] += 1
        return tuple(deg)

    def degree(self, v: int) -> int:
        return self.in_degrees[v] + self.out_degrees[v]

    def in_edges(self, v: int) -> list[int]:
        return [i for i, (_, h) in enumerate(self.edges) if h == v]

    def out_edges(self, v: int) -> list[int]:
        return [i for i, (t, _) in enumerate(self.edges) if t == v]

    def __str__(self) -> str:
        return describe(self)


def vertex_name(g: Graph, v: int) -> str:
    if g.is_external(v):
        return f"ext{v + 1}"
    return f"u{v - g.n_external + 1}"


def describe(g: Graph) -> str:
    """Short human readable rendering, e.g. ``ext1->u1(-1), u1=>ext2``."""
    if not g.edges:
        return f"<{g.n_external} isolated externals>"
    parts = []
    for (t, h), mult in sorted(Counter(g.edges).items()):
        arrow = "->" if mult == 1 else f"={mult}>"
        def name(v):
            if g.is_external(v):
                return vertex_name(g, v)
            return f"{vertex_name(g, v)}({g.weight(v)})"
        parts.append(f"{name(t)}{arrow}{name(h)}")
    return ", ".join(parts)


def validate(g: Graph) -> Violation | None:
    """Return the first violated graph rule, or ``None`` if ``g`` is valid."""
    if g.n_external < 1:
        return Violation("no-externals", "graph")
    for v in g.internal_ids():
        if g.weight(v) < -1:
            return Violation("weight<-1", vertex_name(g, v))
    for i, (t, h) in enumerate(g.edges):
        if not (0 <= t < g.n_vertices and 0 <= h < g.n_vertices):
            return Violation("unknown-vertex", f"edge {i}")
        if t == h:
            return Violation("loop", f"edge {i} at {vertex_name(g, t)}")
    if topological_order(g) is None:
        return Violation("cycle", "graph")
    ins, outs = g.in_degrees, g.out_degrees
    for v in g.internal_ids():
        if ins[v] == 0:
            return Violation("internal-source", vertex_name(g, v))
        if outs[v] == 0:
            return Violation("internal-sink", vertex_name(g, v))
    if ins[0] != 0:
        return Violation("first-external-not-source", "ext1")
    last = g.n_external - 1
    if outs[last] != 0:
        return Violation("last-external-not-sink", vertex_name(g, last))
    for v in g.internal_ids():
        if g.weight(v) == -1 and ins[v] + outs[v] < 3:
            return Violation("degree<3 at weight -1", vertex_name(g, v))
    return None


def is_valid(g: Graph) -> bool:
    return validate(g) is None


def topological_order(g: Graph) -> list[int] | None:
    """Kahn ordering of the vertices, or ``None`` when ``g`` has a cycle."""
    indeg = list(g.in_degrees)
    succ: list[list[int]] = [[] for _ in g.vertex_ids()]
    for t, h in g.edges:
        succ[t].append(h)
    queue = deque(v for v in g.vertex_ids() if indeg[v] == 0)
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for h in succ[v]:
            indeg[h] -= 1
            if indeg[h] == 0:
                queue.append(h)
    return order if len(order) == g.n_vertices else None


def total_weight(g: Graph) -> int:
    return len(g.edges) + sum(g.weights)


def successors(g: Graph, v: int) -> set[int]:
    """All vertices reachable from ``v`` along a directed path of length >= 1."""
    if not 0 <= v < g.n_vertices:
        raise KeyError(f"unknown vertex {v!r}")
    succ: list[list[int]] = [[] for _ in g.vertex_ids()]
    for t, h in g.edges:
        succ[t].append(h)
    seen: set[int] = set()
    stack = list(succ[v])
    while stack:
        u = stack.pop()
        if u not in seen:
            seen.add(u)
            stack.extend(succ[u])
    return seen


# -- canonical forms ---------------------------------------------------------


@dataclass(frozen=True, order=True)
class CanonicalForm:
    """Versioned byte encoding of an isomorphism class of graphs."""

    data: bytes

    def __str__(self) -> str:
        return self.data.decode()

    def to_graph(self) -> Graph:
        return graph_from_canonical(self)


def _refine(colors: list[int], out_nb: list[list[tuple[int, int]]],
            in_nb: list[list[tuple[int, int]]]) -> list[int]:
    """Colour refinement on a directed multigraph until the partition is stable."""
    n_cells = len(set(colors))
    while True:
        sigs = [
            (colors[v],
             tuple(sorted((colors[u], m) for u, m in out_nb[v])),
             tuple(sorted((colors[u], m) for u, m in in_nb[v])))
            for v in range(len(colors))
        ]
        rank = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [rank[s] for s in sigs]
        if len(rank) == n_cells:
            return new
        colors, n_cells = new, len(rank)


def search_leaves(keys: list, edges: Iterable[tuple[int, int]]):
    """Yield every leaf ordering of the individualisation-refinement tree.

    ``keys`` are sortable initial vertex invariants. Each leaf is a list mapping
    vertex -> rank. The multiset of leaves is equivariant, so leaves giving the
    same encoding differ by an automorphism.
    """
    n = len(keys)
    mult = Counter(edges)
    out_nb: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    in_nb: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for (t, h), m in mult.items():
        out_nb[t].append((h, m))
        in_nb[h].append((t, m))
    rank = {k: i for i, k in enumerate(sorted(set(keys)))}
    start = _refine([rank[k] for k in keys], out_nb, in_nb)

    def walk(colors):
        cells = Counter(colors)
        target = min((c for c, size in cells.items() if size > 1), default=None)
        if target is None:
            yield colors
            return
        for v in range(n):
            if colors[v] == target:
                trial = [2 * c for c in colors]
                trial[v] -= 1
                yield from walk(_refine(trial, out_nb, in_nb))

    yield from walk(start)


def _initial_keys(g: Graph) -> list[tuple]:
    ins, outs = g.in_degrees, g.out_degrees
    keys = [(0, i, 0, 0) for i in range(g.n_external)]
    keys += [(1, w, ins[v], outs[v]) for v, w in zip(g.internal_ids(), g.weights)]
    return keys


def _encode(g: Graph, order: list[int]) -> tuple:
    weights = [0] * len(g.weights)
    for v in g.internal_ids():
        weights[order[v] - g.n_external] = g.weight(v)
    edges = tuple(sorted((order[t], order[h]) for t, h in g.edges))
    return tuple(weights), edges


@lru_cache(maxsize=200_000)
def _canonical_data(g: Graph) -> tuple[tuple, int]:
    best = None
    count = 0
    for leaf in search_leaves(_initial_keys(g), g.edges):
        enc = _encode(g, leaf)
        if best is None or enc < best:
            best, count = enc, 1
        elif enc == best:
            count += 1
    return best, count


def canonical_form(g: Graph) -> CanonicalForm:
    (weights, edges), _ = _canonical_data(g)
    w = ",".join(str(x) for x in weights)
    e = ",".join(f"{t}>{h}" for t, h in edges)
    return CanonicalForm(f"{CANONICAL_VERSION};n={g.n_external};w={w};e={e}".encode())


def canonical_graph(g: Graph) -> Graph:
    """The representative of ``g``'s class with vertices in canonical order."""
    (weights, edges), _ = _canonical_data(g)
    return Graph(g.n_external, weights, edges)


def graph_from_canonical(form: CanonicalForm) -> Graph:
    version, n, w, e = str(form).split(";")
    if version != CANONICAL_VERSION:
        raise ValueError(f"unsupported canonical form version {version!r}")
    weights = tuple(int(x) for x in w[2:].split(",") if x)
    edges = tuple(tuple(int(x) for x in pair.split(">")) for pair in e[2:].split(",") if pair)
    return Graph(int(n[2:]), weights, edges)


def vertex_automorphism_count(g: Graph) -> int:
    return _canonical_data(g)[1]


def automorphism_count(g: Graph) -> int:
    """|Aut(G)| counting vertex and edge bijections; parallel edges permute freely."""
    parallel = math.prod(math.factorial(m) for m in Counter(g.edges).values())
    return vertex_automorphism_count(g) * parallel


def isomorphic(a: Graph, b: Graph) -> bool:
    return a.n_external == b.n_external and canonical_form(a) == canonical_form(b)


def relabel(g: Graph, perm: list[int], edge_perm: list[int] | None = None) -> Graph:
    """Copy of ``g`` with internal vertices permuted by ``perm`` and edges reordered.

    ``perm`` maps old vertex -> new vertex and must fix the external vertices.
    """
    n = g.n_external
    if any(perm[i] != i for i in range(n)):
        raise ValueError("relabelling must fix external vertices")
    weights = [0] * len(g.weights)
    for v in g.internal_ids():
        weights[perm[v] - n] = g.weight(v)
    edges = [(perm[t], perm[h]) for t, h in g.edges]
    if edge_perm is not None:
        edges = [edges[i] for i in edge_perm]
    return Graph(n, tuple(weights), tuple(edges))


# -- constructors used throughout -----------------------------------------------


def edgeless(n: int = 2) -> Graph:
    return Graph(n)


def parallel_edges(k: int, n: int = 2) -> Graph:
    return Graph(n, (), ((0, n - 1),) * k)


def chain(weights: Iterable[int] = (0,), n: int = 2) -> Graph:
    """ext1 -> u1 -> ... -> ur -> ext_n with the given internal weights."""
    weights = tuple(weights)
    path = [0] + [n + i for i in range(len(weights))] + [n - 1]
    return Graph(n, weights, tuple(zip(path, path[1:])))
