"""Partition functions of graphs and the star product they assemble.

Every vertex of a graph carries a tensor: the k-th external vertex gets the
derivatives of the k-th argument, an internal vertex of weight ``w`` gets minus
the derivatives of ``Phi_w``. A vertex with ``p`` incoming and ``q`` outgoing
edges is differentiated ``p`` times holomorphically and ``q`` times
anti-holomorphically. Each edge contracts the anti-holomorphic slot at its tail
with the holomorphic slot at its head through the inverse metric
``g^{qbar p}``. All values are jets at one chart point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .decorations import DecoratedGraph, circuit_count, enumerate_labelled_circuit_classes
from .enumeration import NO_FILTER, UNBOUNDED, DegreeFilter, enumerate_graphs
from .expr import ScalarField, as_field
from .geometry import KahlerChart, _as_point, inverse_metric_jet
from .graphs import CanonicalForm, Graph, automorphism_count, canonical_form, total_weight
from .jets import Jet, JetError, JetMatrix
from .series import FormalSeries


@lru_cache(maxsize=None)
def _graph_table(n: int, k: int, filt_key: tuple) -> tuple[tuple[Graph, int], ...]:
    internal, external = filt_key
    filt = DegreeFilter(None if internal is None else dict(internal), dict(external))
    return tuple((g, automorphism_count(g)) for g in enumerate_graphs(n, k, filt))


def graph_table(n: int, k: int, filt: DegreeFilter = NO_FILTER) -> tuple[tuple[Graph, int], ...]:
    """Memoised ``(graph, |Aut|)`` pairs of A_n(k), restricted by ``filt``."""
    return _graph_table(n, k, filt.key())


def vanishing_filter(chart: KahlerChart, degrees: Sequence[tuple[int, int] | None]) -> DegreeFilter:
    """Filter dropping graphs whose partition function is identically zero.

    A vertex tensor vanishes when its weight has no potential, or when it
    differentiates a polynomial beyond its holomorphic or anti-holomorphic
    degree. ``degrees`` gives the bidegree of each argument (``None`` when not
    polynomial).
    """
    internal = {}
    for w in chart.active_weights():
        deg = chart.potential(w).degrees()
        internal[w] = (UNBOUNDED, UNBOUNDED) if deg is None else deg
    external = {}
    for pos, deg in enumerate(degrees, start=1):
        if deg is not None:
            external[pos] = deg
    return DegreeFilter(internal, external)


class Evaluator:
    """Chart data at one point: potential jets and inverse metric, memoised."""

    def __init__(self, chart: KahlerChart, point):
        self.chart = chart
        self.m = chart.m
        self.point = _as_point(point, chart.m)
        self._inverse: dict[int, JetMatrix] = {}
        self._potentials: dict[tuple[int, int], Jet] = {}

    def inverse_metric(self, depth: int) -> JetMatrix:
        if depth not in self._inverse:
            self._inverse[depth] = inverse_metric_jet(self.chart, self.point, depth)
        return self._inverse[depth]

    def potential_jet(self, w: int, depth: int) -> Jet | None:
        f = self.chart.potential(w)
        if f is None:
            return None
        key = (w, depth)
        if key not in self._potentials:
            self._potentials[key] = f.jet(self.point, depth, self.m)
        return self._potentials[key]

    def argument_jet(self, f, depth: int) -> Jet:
        if isinstance(f, Jet):
            if f.depth < depth:
                raise JetError(f"argument jet has depth {f.depth}, need {depth}")
            return f.truncate(depth)
        return as_field(f).jet(self.point, depth, self.m)


def _degree_needs(graphs: Sequence[Graph], n: int) -> tuple[list[int], dict[int, int]]:
    ext = [0] * n
    internal: dict[int, int] = {}
    for g in graphs:
        for v in g.vertex_ids():
            deg = g.degree(v)
            if g.is_external(v):
                ext[v] = max(ext[v], deg)
            else:
                w = g.weight(v)
                internal[w] = max(internal.get(w, 0), deg)
    return ext, internal


def _vertex_sources(g: Graph, args: Sequence[Jet], ev: Evaluator, depth: int):
    """Per vertex ``(jet, sign)``; ``None`` if some vertex tensor is identically zero."""
    sources = []
    for v in g.vertex_ids():
        need = depth + g.degree(v)
        if g.is_external(v):
            jet = args[v]
            if jet.depth < need:
                raise JetError(f"argument {v + 1} has jet depth {jet.depth}, need {need}")
            sources.append((jet, 1))
        else:
            jet = ev.potential_jet(g.weight(v), need)
            if jet is None:
                return None
            sources.append((jet, -1))
    return sources


class _VertexTensors:
    """Memoised derivative entries of each vertex tensor, truncated to ``depth``."""

    def __init__(self, g: Graph, sources, m: int, depth: int):
        self.g = g
        self.sources = sources
        self.m = m
        self.depth = depth
        self.memo: dict[tuple, Jet] = {}

    def entry(self, v: int, hol: tuple[int, ...], anti: tuple[int, ...]) -> Jet:
        key = (v, hol, anti)
        out = self.memo.get(key)
        if out is None:
            jet, sign = self.sources[v]
            out = jet.derive(hol, anti).truncate(self.depth)
            if sign < 0:
                out = -out
            self.memo[key] = out
        return out


def _labelled_product(g: Graph, labels, tensors: _VertexTensors, H: JetMatrix) -> Jet:
    """Lambda for one labelling (0-based labels ``(at_tail, at_head)`` per edge)."""
    m = tensors.m
    hol = [[0] * m for _ in g.vertex_ids()]
    anti = [[0] * m for _ in g.vertex_ids()]
    acc = None
    for e, (t, h) in enumerate(g.edges):
        s, r = labels[e]
        anti[t][s] += 1
        hol[h][r] += 1
        factor = H[s, r]
        acc = factor if acc is None else acc * factor
    for v in g.vertex_ids():
        factor = tensors.entry(v, tuple(hol[v]), tuple(anti[v]))
        acc = factor if acc is None else acc * factor
    return acc


def gamma(g: Graph, chart: KahlerChart, args: Sequence, point, depth: int = 0,
          evaluator: Evaluator | None = None) -> Jet:
    """Partition function Gamma_G(f_1, ..., f_n) as a jet of the given depth.

    Arguments may be fields or jets; jets must be deep enough for the
    derivatives the graph takes.
    """
    if len(args) != g.n_external:
        raise ValueError(f"graph has {g.n_external} external vertices, got {len(args)} arguments")
    ev = evaluator or Evaluator(chart, point)
    jets = [ev.argument_jet(f, depth + g.degree(v)) if not isinstance(f, Jet) else f
            for v, f in enumerate(args)]
    return _gamma(g, jets, ev, depth)


def _gamma(g: Graph, jets: Sequence[Jet], ev: Evaluator, depth: int) -> Jet:
    m = ev.m
    sources = _vertex_sources(g, jets, ev, depth)
    if sources is None:
        return Jet(m, depth)
    tensors = _VertexTensors(g, sources, m, depth)
    H = ev.inverse_metric(depth)
    if m == 1 or not g.edges:
        return _labelled_product(g, [(0, 0)] * len(g.edges), tensors, H) \
            if g.edges or g.n_vertices else Jet.constant(m, depth, 1.0)

    pairs = [(s, r) for s in range(m) for r in range(m) if not H[s, r].is_zero()]
    total = Jet(m, depth)
    for labels in itertools.product(pairs, repeat=len(g.edges)):
        total = total + _labelled_product(g, labels, tensors, H)
    return total


def lambda_value(d: DecoratedGraph, chart: KahlerChart, args: Sequence, point,
                 depth: int = 0, evaluator: Evaluator | None = None) -> Jet:
    """Lambda^l_G: the single term of Gamma_G picked out by the labelling of ``d``."""
    g = d.graph
    if d.m != chart.m:
        raise ValueError(f"labelling is for m={d.m}, chart has m={chart.m}")
    if len(args) != g.n_external:
        raise ValueError(f"graph has {g.n_external} external vertices, got {len(args)} arguments")
    ev = evaluator or Evaluator(chart, point)
    jets = [ev.argument_jet(f, depth + g.degree(v)) if not isinstance(f, Jet) else f
            for v, f in enumerate(args)]
    sources = _vertex_sources(g, jets, ev, depth)
    if sources is None:
        return Jet(ev.m, depth)
    tensors = _VertexTensors(g, sources, ev.m, depth)
    labels = [(s - 1, r - 1) for s, r in d.labels]
    if not g.edges:
        return _labelled_product(g, [], tensors, ev.inverse_metric(depth))
    return _labelled_product(g, labels, tensors, ev.inverse_metric(depth))


# -- operators D_k -------------------------------------------------------------


def _arg_degrees(args) -> list[tuple[int, int] | None]:
    out = []
    for f in args:
        out.append(f.degrees() if isinstance(f, ScalarField) else None)
    return out


def operator_coefficient(k: int, chart: KahlerChart, args: Sequence, point, depth: int = 0,
                         evaluator: Evaluator | None = None,
                         filt: DegreeFilter | None = None) -> Jet:
    """D_k(f_1, ..., f_n) = sum over A_n(k) of Gamma_G / |Aut(G)|."""
    if k < 0:
        raise ValueError(f"order must be non-negative, got {k}")
    args = [f if isinstance(f, Jet) else as_field(f) for f in args]
    n = len(args)
    ev = evaluator or Evaluator(chart, point)
    if filt is None:
        filt = vanishing_filter(chart, _arg_degrees(args))
    table = graph_table(n, k, filt)
    if not table:
        return Jet(chart.m, depth)
    ext_need, _ = _degree_needs([g for g, _ in table], n)
    jets = [ev.argument_jet(f, depth + ext_need[i]) for i, f in enumerate(args)]
    total = Jet(chart.m, depth)
    for g, aut in table:
        value = _gamma(g, jets, ev, depth)
        total = total + value * float(Fraction(1, aut))
    return total


def star_coefficient(k: int, chart: KahlerChart, f1, f2, point, depth: int = 0) -> Jet:
    """D_k(f1, f2)."""
    return operator_coefficient(k, chart, [f1, f2], point, depth)


def _as_series(f, order: int) -> FormalSeries:
    if isinstance(f, FormalSeries):
        return f
    return FormalSeries(0, (f,), order + 10**6)


def apply_operator(chart: KahlerChart, args: Sequence, point, order: int,
                   depth: int = 0, evaluator: Evaluator | None = None) -> FormalSeries:
    """The n-argument operator D applied to fields, jets or formal series in h.

    Series arguments are expanded multilinearly. The result keeps orders up to
    ``order`` for which every contributing coefficient is known.
    """
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    n = len(args)
    if n < 2:
        raise ValueError("the operator takes at least two arguments")
    ev = evaluator or Evaluator(chart, point)
    series = [_as_series(f, order) for f in args]
    leads = [s.leading for s in series]
    limit = order
    for a, s in enumerate(series):
        others = sum(min(l, 0) for b, l in enumerate(leads) if b != a)
        limit = min(limit, s.truncation + others)

    terms: dict[int, Jet] = {}
    for combo in itertools.product(*[list(s.items()) for s in series]):
        base = sum(i for i, _ in combo)
        coeffs = [c for _, c in combo]
        if any(isinstance(c, int) and c == 0 for c in coeffs):
            continue
        for k in range(0, limit - base + 1):
            value = operator_coefficient(k, chart, coeffs, point, depth, ev)
            j = base + k
            terms[j] = terms[j] + value if j in terms else value
    return FormalSeries.from_dict(terms, limit, zero=Jet(chart.m, depth))


def star_product(chart: KahlerChart, f1, f2, point, order: int, depth: int = 0,
                 evaluator: Evaluator | None = None) -> FormalSeries:
    """``f1 * f2`` through ``h^order`` as a series of jets at ``point``."""
    return apply_operator(chart, [f1, f2], point, order, depth, evaluator)


def multi_D(chart: KahlerChart, args: Sequence, point, order: int, depth: int = 0,
            evaluator: Evaluator | None = None, experimental: bool = False) -> FormalSeries:
    """``D(f_1, ..., f_n)`` through ``h^order``.

    Only ``n <= 3`` is backed by the associativity identity; larger ``n`` must
    be requested with ``experimental=True``.
    """
    if len(args) > 3 and not experimental:
        raise ValueError(f"multi_D with {len(args)} arguments is experimental; "
                         "pass experimental=True")
    return apply_operator(chart, args, point, order, depth, evaluator)


def star_circuit_form(chart: KahlerChart, f1, f2, point, order: int,
                      depth: int = 0, m: int | None = None) -> FormalSeries:
    """The star product summed over labelled circuit classes with weights 1/C(G).

    A cross-check only: the number of classes grows quickly with ``m``.
    """
    if m is not None and m != chart.m:
        raise ValueError(f"chart has m={chart.m}, got m={m}")
    ev = Evaluator(chart, point)
    terms = {}
    for k in range(order + 1):
        classes = enumerate_labelled_circuit_classes(2, k, chart.m)
        ext_need, _ = _degree_needs([d.graph for d in classes.values()], 2)
        jets = [ev.argument_jet(f, depth + ext_need[i]) for i, f in enumerate((f1, f2))]
        total = Jet(chart.m, depth)
        for d in classes.values():
            total = total + lambda_value(d, chart, jets, point, depth, ev) \
                * float(Fraction(1, circuit_count(d)))
        terms[k] = total
    return FormalSeries.from_dict(terms, order)


def required_depth(n: int, k_max: int, position: int, filt: DegreeFilter = NO_FILTER) -> int:
    """Largest degree of external vertex ``position`` over A_n(0..k_max)."""
    best = 0
    for k in range(k_max + 1):
        for g, _ in graph_table(n, k, filt):
            best = max(best, g.degree(position - 1))
    return best


# -- symbolic emission -----------------------------------------------------------

_INDEX_NAMES = "pqrstuvwxyabcdefgjklmno"


def _index_name(i: int) -> str:
    base = _INDEX_NAMES[i % len(_INDEX_NAMES)]
    return base if i < len(_INDEX_NAMES) else f"{base}{i // len(_INDEX_NAMES)}"


@dataclass(frozen=True)
class SymbolicTerm:
    graph: CanonicalForm
    coefficient: Fraction
    weight: int
    text: str
    latex: str

    def to_json(self) -> dict:
        return {
            "graph": str(self.graph),
            "coefficient": str(self.coefficient),
            "weight": self.weight,
            "text": self.text,
            "latex": self.latex,
        }


def render_term(g: Graph) -> tuple[str, str]:
    """Abstract-index rendering of Gamma_G in plain text and LaTeX."""
    head = {e: _index_name(2 * e) for e in range(len(g.edges))}
    tail = {e: _index_name(2 * e + 1) for e in range(len(g.edges))}
    bar = "̄"
    text, latex = [], []
    for e in range(len(g.edges)):
        text.append(f"g^{{{tail[e]}{bar}{head[e]}}}")
        latex.append(f"g^{{\\bar{{{tail[e]}}} {head[e]}}}")

    def factor(v):
        hol = [head[e] for e in g.in_edges(v)]
        anti = [tail[e] for e in g.out_edges(v)]
        t = "".join(f"∂_{i}" for i in hol) + "".join(f"∂_{i}{bar}" for i in anti)
        lx = "".join(f"\\partial_{{{i}}}" for i in hol) \
            + "".join(f"\\partial_{{\\bar{{{i}}}}}" for i in anti)
        if g.is_external(v):
            name, lname = f"f{v + 1}", f"f_{{{v + 1}}}"
            return (f"{t} {name}" if t else name), (f"{lx} {lname}" if lx else lname)
        w = g.weight(v)
        return f"(-{t} Φ_{{{w}}})", f"\\left(-{lx} \\Phi_{{{w}}}\\right)"

    for v in g.vertex_ids():
        t, lx = factor(v)
        text.append(t)
        latex.append(lx)
    return " ".join(text), " ".join(latex)


def emit_symbolic(k: int, n: int = 2) -> list[SymbolicTerm]:
    """One abstract-index term per graph of A_n(k), with coefficient 1/|Aut|."""
    if k < 0:
        raise ValueError(f"order must be non-negative, got {k}")
    out = []
    for g, aut in graph_table(n, k):
        text, latex = render_term(g)
        out.append(SymbolicTerm(canonical_form(g), Fraction(1, aut), total_weight(g), text, latex))
    return out


def format_latex(terms: Sequence[SymbolicTerm], k: int) -> str:
    parts = []
    for t in terms:
        c = t.coefficient
        coeff = "" if c == 1 else f"\\frac{{{c.numerator}}}{{{c.denominator}}} "
        parts.append(coeff + t.latex)
    return f"D_{{{k}}} = " + (" + ".join(parts) if parts else "0")


def format_text(terms: Sequence[SymbolicTerm], k: int) -> str:
    parts = []
    for t in terms:
        c = t.coefficient
        parts.append(t.text if c == 1 else f"({c}) {t.text}")
    return f"D_{k} = " + (" + ".join(parts) if parts else "0")
