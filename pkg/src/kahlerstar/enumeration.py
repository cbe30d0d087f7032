"""Exhaustive enumeration of the graph classes A_n(k).

Graphs are grown one vertex at a time in a topological order: every new vertex
receives its in-edges from vertices already present, so in-degrees are final on
creation and only out-degrees grow. Partial graphs are deduplicated by canonical
form after every step, which is sound because isomorphic partial graphs have
isomorphic sets of completions.

Pruning uses the deficit bound: a partial graph of weight W whose internal
vertices still need ``d`` more out-edges in total can only complete to graphs of
weight at least ``W + d`` (every vertex added later contributes
``weight + out-degree >= 0``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .graphs import (
    CanonicalForm,
    Graph,
    automorphism_count,
    canonical_form,
    canonical_graph,
    is_valid,
    total_weight,
)

UNBOUNDED = 10**9


@dataclass(frozen=True)
class DegreeFilter:
    """Restricts which vertex shapes may appear.

    ``internal`` maps an allowed internal weight to ``(max_in, max_out)``;
    weights missing from the map are forbidden. ``None`` allows every weight
    with unbounded degrees. ``external`` maps an external position to
    ``(max_in, max_out)``; missing positions are unbounded.

    Used to skip graphs whose partition function vanishes identically, e.g.
    graphs with a vertex of weight ``w`` when the potential of weight ``w`` is
    zero, or vertices that differentiate a polynomial past its degree.
    """

    internal: dict[int, tuple[int, int]] | None = None
    external: dict[int, tuple[int, int]] = field(default_factory=dict)

    def internal_bounds(self, w: int) -> tuple[int, int] | None:
        if self.internal is None:
            return (UNBOUNDED, UNBOUNDED)
        return self.internal.get(w)

    def external_bounds(self, pos: int) -> tuple[int, int]:
        return self.external.get(pos, (UNBOUNDED, UNBOUNDED))

    def allows(self, g: Graph) -> bool:
        ins, outs = g.in_degrees, g.out_degrees
        for v in g.vertex_ids():
            if g.is_external(v):
                bound = self.external_bounds(v + 1)
            else:
                bound = self.internal_bounds(g.weight(v))
                if bound is None:
                    return False
            if ins[v] > bound[0] or outs[v] > bound[1]:
                return False
        return True

    def key(self) -> tuple:
        internal = None if self.internal is None else tuple(sorted(self.internal.items()))
        return internal, tuple(sorted(self.external.items()))


NO_FILTER = DegreeFilter()


class _Partial:
    """Mutable growth state; ``kinds`` entries are ('e', pos) or ('i', weight)."""

    __slots__ = ("kinds", "edges", "ins", "outs")

    def __init__(self, kinds, edges, ins, outs):
        self.kinds = kinds
        self.edges = edges
        self.ins = ins
        self.outs = outs

    def weight(self) -> int:
        return len(self.edges) + sum(w for kind, w in self.kinds if kind == "i")

    def deficit(self, v: int) -> int:
        kind, w = self.kinds[v]
        if kind == "e":
            return 0
        need = 1 - self.outs[v]
        if w == -1:
            need = max(need, 3 - self.ins[v] - self.outs[v])
        return max(need, 0)

    def max_out(self, v: int, filt: DegreeFilter) -> int:
        kind, w = self.kinds[v]
        if kind == "e":
            return filt.external_bounds(w)[1]
        return filt.internal_bounds(w)[1]

    def to_graph(self, n_external: int) -> Graph:
        """Graph view with absent externals dropped; used for partial dedup."""
        order = sorted(range(len(self.kinds)), key=lambda v: (self.kinds[v][0] != "e", v))
        ext = [v for v in order if self.kinds[v][0] == "e"]
        # externals keep their number: pad absent ones as isolated vertices
        index = {}
        for v in ext:
            index[v] = self.kinds[v][1] - 1
        nxt = n_external
        weights = []
        for v in order:
            if self.kinds[v][0] == "i":
                index[v] = nxt
                nxt += 1
                weights.append(self.kinds[v][1])
        edges = tuple((index[t], index[h]) for t, h in self.edges)
        return Graph(n_external, tuple(weights), edges)


def _in_edge_choices(state: _Partial, slack: int, max_in: int, min_in: int,
                     filt: DegreeFilter) -> Iterator[tuple[list[int], int]]:
    """Multiplicity vectors over existing vertices for a new vertex's in-edges.

    Yields ``(multiplicities, cost)`` where cost counts edges that do not
    reduce a deficit. Total cost is kept within ``slack``.
    """
    n = len(state.kinds)
    deficits = [state.deficit(v) for v in range(n)]
    room = [state.max_out(v, filt) - state.outs[v] for v in range(n)]
    mult = [0] * n

    def rec(i, total, cost):
        if i == n:
            if total >= min_in:
                yield list(mult), cost
            return
        for m in range(0, room[i] + 1):
            if total + m > max_in:
                break
            c = cost + max(0, m - deficits[i])
            if c > slack:
                break
            mult[i] = m
            yield from rec(i + 1, total + m, c)
        mult[i] = 0

    yield from rec(0, 0, 0)


def _extend(state: _Partial, kind: tuple, mult: list[int]) -> _Partial:
    v = len(state.kinds)
    edges = list(state.edges)
    outs = list(state.outs)
    for u, m in enumerate(mult):
        edges.extend([(u, v)] * m)
        outs[u] += m
    return _Partial(state.kinds + [kind], edges, state.ins + [sum(mult)], outs + [0])


def _state_key(state: _Partial, n: int) -> tuple:
    placed = tuple(sorted(w for kind, w in state.kinds if kind == "e"))
    return canonical_form(state.to_graph(n)), placed


def enumerate_graphs(n: int, k: int, filt: DegreeFilter = NO_FILTER) -> list[Graph]:
    """All classes of A_n(k) (optionally restricted by ``filt``), canonically ordered.

    Args:
        n: number of external vertices, at least 2.
        k: total weight, at least 0.
        filt: vertex shape restriction.

    Returns:
        One canonical representative per isomorphism class, sorted by
        canonical form.
    """
    if n < 2:
        raise ValueError(f"need at least two external vertices, got n={n}")
    if k < 0:
        raise ValueError(f"total weight must be non-negative, got k={k}")

    results: dict[CanonicalForm, Graph] = {}
    start = _Partial([("e", 1)], [], [0], [0])
    level = {_state_key(start, n): start}
    last_bounds = filt.external_bounds(n)
    allowed_weights = range(-1, k + 1)

    while level:
        nxt: dict[tuple, _Partial] = {}
        for state in level.values():
            W = state.weight()
            lower = W + sum(state.deficit(v) for v in range(len(state.kinds)))
            if lower > k:
                continue
            placed = {w for kind, w in state.kinds if kind == "e"}
            missing = [p for p in range(2, n) if p not in placed]

            # close off with the last external vertex
            if not missing:
                need = k - W
                for mult, _ in _in_edge_choices(state, UNBOUNDED, min(need, last_bounds[0]),
                                                need, filt):
                    if sum(mult) != need:
                        continue
                    done = _extend(state, ("e", n), mult)
                    if any(done.deficit(v) for v in range(len(done.kinds))):
                        continue
                    g = done.to_graph(n)
                    if is_valid(g):
                        results.setdefault(canonical_form(g), canonical_graph(g))

            slack = k - lower
            # middle external vertices: any in-degree, no deficit
            for pos in missing:
                bounds = filt.external_bounds(pos)
                for mult, _ in _in_edge_choices(state, slack, bounds[0], 0, filt):
                    child = _extend(state, ("e", pos), mult)
                    nxt.setdefault(_state_key(child, n), child)

            # internal vertices
            for w in allowed_weights:
                bounds = filt.internal_bounds(w)
                if bounds is None:
                    continue
                # a new vertex of weight w >= 0 raises the bound by at least w + 1
                base = w + 1 if w >= 0 else 0
                if base > slack:
                    continue
                for mult, cost in _in_edge_choices(state, slack - base, bounds[0], 1, filt):
                    a = sum(mult)
                    own_def = max(1, 3 - a) if w == -1 else 1
                    if w == -1 and cost + (own_def - 1) > slack:
                        continue
                    if bounds[1] < (own_def if w == -1 else 1):
                        continue
                    child = _extend(state, ("i", w), mult)
                    nxt.setdefault(_state_key(child, n), child)
        level = nxt

    graphs = [results[key] for key in sorted(results)]
    for g in graphs:
        assert total_weight(g) == k
    return graphs


def enumerate_acyclic(n: int, k: int) -> list[CanonicalForm]:
    """Canonical forms of A_n(k), one per isomorphism class."""
    return [canonical_form(g) for g in enumerate_graphs(n, k)]


def graph_table(n: int, k: int, filt: DegreeFilter = NO_FILTER) -> list[tuple[Graph, int]]:
    """Pairs ``(graph, |Aut|)`` for A_n(k)."""
    return [(g, automorphism_count(g)) for g in enumerate_graphs(n, k, filt)]
