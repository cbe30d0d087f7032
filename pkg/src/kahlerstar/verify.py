"""Executable checks of the star product identities, with structured reports.

Each check draws random polynomial arguments and chart points from a seeded
generator, evaluates both sides of an identity and reports the largest
residual relative to the largest magnitude among the compared values.
"""

from __future__ import annotations

import json
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .decorations import (
    circuit_count,
    enumerate_compatible_circuits,
    enumerate_labelled_circuit_classes,
)
from .enumeration import enumerate_graphs
from .expr import parse_expression, random_polynomial
from .geometry import KahlerChart, builtin_chart, poisson_bracket
from .graphs import Graph, automorphism_count, canonical_form, validate
from .jets import Jet
from .operator import (
    Evaluator,
    _gamma,
    graph_table,
    lambda_value,
    multi_D,
    operator_coefficient,
    required_depth,
    star_circuit_form,
    star_product,
)
from .series import FormalSeries
from .surgery import DomainError, bud, debud, equivalence_key, fuse

DEFAULT_SEED = 20240607

SUITES = ("structure", "wick", "first-order", "assoc", "circuit-form", "fusion",
          "budding", "karabegov")


@dataclass
class CheckReport:
    """Outcome of one check; ``passed`` holds iff ``max_residual <= tolerance``."""

    name: str
    parameters: dict
    max_residual: float
    tolerance: float
    passed: bool
    runtime: float
    seed: int | None = None
    details: dict = field(default_factory=dict)

    def to_json(self, timings: bool = False) -> str:
        """One JSON line. Runtime is left out unless asked for, so reports
        from identical runs are byte-identical."""
        data = asdict(self)
        if not timings:
            data.pop("runtime")
        return json.dumps(data, sort_keys=True, default=str)


class _Residual:
    """Running maximum of ``|a - b| / max(1, |a|, |b|)`` over compared values."""

    def __init__(self):
        self.value = 0.0
        self.raw = 0.0

    def add(self, a: complex, b: complex, scale: float | None = None) -> None:
        diff = abs(complex(a) - complex(b))
        ref = max(1.0, abs(a), abs(b)) if scale is None else max(1.0, scale)
        self.raw = max(self.raw, diff)
        self.value = max(self.value, diff / ref)


def _value(x) -> complex:
    if isinstance(x, Jet):
        return x.value
    return complex(x)


def _report(name, params, residual: float, tol, start, seed=None, **details) -> CheckReport:
    if math.isnan(residual):
        residual = math.inf
    return CheckReport(name, params, float(residual), tol, residual <= tol,
                       time.perf_counter() - start, seed, details)


def random_point(rng, m: int, radius: float = 0.5) -> tuple[complex, ...]:
    """A point with every coordinate of modulus below ``radius / sqrt(m)``."""
    out = []
    for _ in range(m):
        r = radius / math.sqrt(m) * math.sqrt(rng.random())
        a = 2 * math.pi * rng.random()
        out.append(complex(round(r * math.cos(a), 6), round(r * math.sin(a), 6)))
    return tuple(out)


def deformed_chart(name: str, m: int = 1, **extra: str) -> KahlerChart:
    """Built-in chart plus deformation potentials given as ``phi0="..."`` etc.

    The special text ``"same"`` copies the weight -1 potential.
    """
    chart = builtin_chart(name, m)
    for key, text in extra.items():
        w = int(key.removeprefix("phi"))
        f = chart.potentials[-1] if text == "same" else parse_expression(text, m)
        chart = chart.with_potential(w, f)
    label = ",".join(f"{k}={v}" for k, v in sorted(extra.items()))
    return KahlerChart(chart.m, chart.potentials, chart.truncation,
                       f"{name}[{label}]" if label else name)


# -- structure -------------------------------------------------------------------


def check_structure(kmax: int = 4) -> CheckReport:
    """Separation of variables and normalization, read off the enumeration."""
    start = time.perf_counter()
    violations = []
    counts = {}
    for k in range(kmax + 1):
        graphs = enumerate_graphs(2, k)
        counts[k] = len(graphs)
        for g in graphs:
            problems = []
            if validate(g) is not None:
                problems.append(str(validate(g)))
            if g.in_degrees[0] != 0:
                problems.append("ext1 has in-edges")
            if g.out_degrees[1] != 0:
                problems.append("ext2 has out-edges")
            if k >= 1 and (g.degree(0) == 0 or g.degree(1) == 0):
                problems.append("isolated external vertex")
            if problems:
                violations.append(f"{canonical_form(g)}: {'; '.join(problems)}")
    return _report("structure", {"kmax": kmax}, float(len(violations)), 0.0, start,
                   counts={str(k): v for k, v in counts.items()}, violations=violations[:10])


# -- Wick oracle -------------------------------------------------------------------


def _multi_indices(m: int, k: int):
    if m == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _multi_indices(m - 1, k - first):
            yield (first,) + rest


def wick_coefficient(f1, f2, point, k: int, m: int) -> complex:
    """Closed-form flat coefficient ``sum_{|a|=k} dbar^a f1 d^a f2 / a!``."""
    a = f1.jet(point, k, m)
    b = f2.jet(point, k, m)
    zero = (0,) * m
    total = 0j
    for alpha in _multi_indices(m, k):
        weight = math.prod(math.factorial(x) for x in alpha)
        total += a.derive(zero, alpha).value * b.derive(alpha, zero).value / weight
    return total


def check_wick(m: int = 1, order: int = 6, trials: int = 4, seed: int = DEFAULT_SEED,
               tolerance: float = 1e-12) -> CheckReport:
    """Flat chart, trivial deformation: graph expansion against the Wick product."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    chart = builtin_chart("flat", m, truncation=order)
    res = _Residual()
    for _ in range(trials):
        f1 = random_polynomial(rng, m, max_degree=order)
        f2 = random_polynomial(rng, m, max_degree=order)
        p = random_point(rng, m)
        series = star_product(chart, f1, f2, p, order)
        for k in range(order + 1):
            res.add(_value(series[k]), wick_coefficient(f1, f2, p, k, m))
    return _report("wick", {"m": m, "order": order, "trials": trials}, res.value,
                   tolerance, start, seed)


# -- first order ----------------------------------------------------------------------


def check_first_order(chart: KahlerChart, trials: int = 20, seed: int = DEFAULT_SEED,
                      tolerance: float = 1e-10) -> CheckReport:
    """``D_1(f1, f2) - D_1(f2, f1) = -i {f1, f2}`` on random polynomial pairs."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    res = _Residual()
    m = chart.m
    for _ in range(trials):
        f1 = random_polynomial(rng, m)
        f2 = random_polynomial(rng, m)
        p = random_point(rng, m)
        ev = Evaluator(chart, p)
        lhs = (operator_coefficient(1, chart, [f1, f2], p, 0, ev)
               - operator_coefficient(1, chart, [f2, f1], p, 0, ev)).value
        rhs = -1j * poisson_bracket(chart, f1, f2, p, 0).value
        res.add(lhs, rhs)
    return _report("first-order", {"chart": chart.name, "m": m, "trials": trials},
                   res.value, tolerance, start, seed)


# -- associativity ----------------------------------------------------------------------


def check_associativity(chart: KahlerChart, order: int = 3, trials: int = 5, points: int = 3,
                        seed: int = DEFAULT_SEED, tolerance: float = 1e-8) -> CheckReport:
    """Both nestings of the star product against the three-argument operator."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    m = chart.m
    inner_depth = max(required_depth(2, order, 1), required_depth(2, order, 2))
    res = _Residual()
    for _ in range(trials):
        f1, f2, f3 = (random_polynomial(rng, m) for _ in range(3))
        for _ in range(points):
            p = random_point(rng, m)
            ev = Evaluator(chart, p)
            inner_r = star_product(chart, f2, f3, p, order, inner_depth, ev)
            left = star_product(chart, f1, inner_r, p, order, 0, ev)
            inner_l = star_product(chart, f1, f2, p, order, inner_depth, ev)
            right = star_product(chart, inner_l, f3, p, order, 0, ev)
            triple = multi_D(chart, [f1, f2, f3], p, order, 0, ev)
            for k in range(order + 1):
                a, b, c = _value(left[k]), _value(right[k]), _value(triple[k])
                scale = max(abs(a), abs(b), abs(c))
                res.add(a, c, scale)
                res.add(b, c, scale)
    return _report("assoc", {"chart": chart.name, "order": order, "trials": trials,
                             "points": points}, res.value, tolerance, start, seed)


# -- circuit form --------------------------------------------------------------------------


def check_circuit_form(m: int = 1, order: int = 2, trials: int = 3, seed: int = DEFAULT_SEED,
                       chart: KahlerChart | None = None, tolerance: float = 1e-10) -> CheckReport:
    """Sum over A_2 with 1/|Aut| against the sum over labelled circuit classes with 1/C."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    chart = chart or deformed_chart("fubini-study", m, phi0="same")
    res = _Residual()
    for _ in range(trials):
        f1, f2 = random_polynomial(rng, m), random_polynomial(rng, m)
        p = random_point(rng, m)
        a = star_product(chart, f1, f2, p, order)
        b = star_circuit_form(chart, f1, f2, p, order)
        for k in range(order + 1):
            res.add(_value(a[k]), _value(b[k]))
    return _report("circuit-form", {"chart": chart.name, "m": m, "order": order,
                                    "trials": trials}, res.value, tolerance, start, seed)


# -- fusion -------------------------------------------------------------------------------


def _reorderings_at_sink(d) -> int:
    """Number of compatible in-orders at the second external vertex."""
    n_in = len(d.graph.in_edges(1))
    if n_in == 0:
        return 1
    return sum(1 for c in enumerate_compatible_circuits(d.graph, d.labels)
               if all(c[v] == d.circuit[v] for v in d.graph.vertex_ids() if v != 1)
               and c[1][1] == d.circuit[1][1])


def check_fusion_partition(k: int = 2, m: int = 1, seed: int = DEFAULT_SEED,
                           tolerance: float = 1e-10) -> CheckReport:
    """Fusion outputs over ([G1], G2) partition L^C_3(k); the weighted Lambda identity holds."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    chart = deformed_chart("fubini-study", m, phi0="same")
    f1, f2, f3 = (random_polynomial(rng, m) for _ in range(3))
    p = random_point(rng, m)
    ev = Evaluator(chart, p)
    problems = []
    res = _Residual()
    pairs = 0
    for total in range(k + 1):
        target = enumerate_labelled_circuit_classes(3, total, m)
        produced: Counter = Counter()
        for k1 in range(total + 1):
            reps = {}
            for d in enumerate_labelled_circuit_classes(2, k1, m).values():
                reps.setdefault(equivalence_key(d), d)
            seconds = enumerate_labelled_circuit_classes(2, total - k1, m)
            for g1 in reps.values():
                alpha_size = _reorderings_at_sink(g1)
                for g2 in seconds.values():
                    pairs += 1
                    result = fuse(g1, g2)
                    produced.update(result.classes.keys())
                    depth = g1.graph.degree(1)
                    inner = lambda_value(g2, chart, [f2, f3], p, depth, ev)
                    lhs = lambda_value(g1, chart, [f1, inner], p, 0, ev).value \
                        * alpha_size / (circuit_count(g1) * circuit_count(g2))
                    rhs = sum((lambda_value(g, chart, [f1, f2, f3], p, 0, ev).value
                               / circuit_count(g) for g in result.classes.values()), 0j)
                    res.add(lhs, rhs)
        duplicates = sum(c - 1 for c in produced.values() if c > 1)
        missing = len(set(target) - set(produced))
        extra = len(set(produced) - set(target))
        if duplicates or missing or extra:
            problems.append({"k": total, "duplicates": duplicates, "missing": missing,
                             "extra": extra})
    residual = res.value if not problems else math.inf
    return _report("fusion", {"k": k, "m": m}, residual, tolerance, start, seed,
                   pairs=pairs, partition_problems=problems)


# -- budding ------------------------------------------------------------------------------


def budding_domain(k: int) -> list[tuple[Graph, int]]:
    """Domain of the budding map onto A_2^1(k+1): ``(graph, weight)`` pairs."""
    out = [(g, -1) for g in enumerate_graphs(2, k + 1) if g.degree(0) > 1]
    for l in range(0, k):
        out.extend((g, l) for g in enumerate_graphs(2, k - l))
    return out


def _psi_jets(chart: KahlerChart, point, r: int, depth: int) -> dict[int, Jet]:
    ev = Evaluator(chart, point)
    out = {}
    for w in chart.active_weights():
        out[w] = ev.potential_jet(w, depth + 1).d(r, True)
    return out


def budding_chart() -> KahlerChart:
    return deformed_chart("fubini-study", 1, phi0="same", phi1="z1^2*zb1^2", phi2="z1*zb1^3")


def check_budding(kmax: int = 3, seed: int = DEFAULT_SEED, chart: KahlerChart | None = None,
                  tolerance: float = 1e-8) -> CheckReport:
    """Budding is a bijection preserving |Aut|; the Gamma identity and telescoping sums vanish."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    chart = chart or budding_chart()
    m = chart.m
    p = random_point(rng, m)
    ev = Evaluator(chart, p)
    problems = []
    res = _Residual()
    depth = required_depth(2, kmax + 1, 1) + 1
    for k in range(1, kmax + 1):
        target = {canonical_form(g): g for g in enumerate_graphs(2, k + 1) if g.degree(0) == 1}
        images = Counter()
        for g, w in budding_domain(k):
            b = bud(g, w)
            form = canonical_form(b)
            images[form] += 1
            if automorphism_count(b) != automorphism_count(g):
                problems.append(f"|Aut| changed for {canonical_form(g)}")
            back, w_back = debud(b)
            if w_back != w or canonical_form(back) != canonical_form(g):
                problems.append(f"debud does not invert bud for {canonical_form(g)}")
        if set(images) != set(target) or any(c != 1 for c in images.values()):
            problems.append(f"k={k}: budding is not a bijection")
        for r in range(m):
            psi = _psi_jets(chart, p, r, depth)
            for s in range(m):
                z = parse_expression(f"z{s + 1}", m)
                zj = z.jet(p, depth, m)
                for g, w in budding_domain(k):
                    lhs = _gamma(bud(g, w), [psi[-1], zj], ev, 0).value
                    rhs = -_gamma(g, [psi[w], zj], ev, 0).value if w in psi else 0j
                    res.add(lhs, rhs)
                total = 0j
                scale = 0.0
                for l in range(-1, k):
                    if l not in psi:
                        continue
                    term = operator_coefficient(k - l, chart, [psi[l], zj], p, 0, ev).value
                    total += term
                    scale = max(scale, abs(term))
                res.add(total, 0j, scale)
    residual = res.value if not problems else math.inf
    return _report("budding", {"chart": chart.name, "kmax": kmax}, residual, tolerance, start,
                   seed, problems=problems[:10])


# -- Karabegov -----------------------------------------------------------------------------


def karabegov_commutator(chart: KahlerChart, point, r: int, s: int, order: int) -> FormalSeries:
    """``Psi^r * z^s - z^s * Psi^r`` through ``h^order``."""
    m = chart.m
    depth = max(required_depth(2, order + 1, 1), required_depth(2, order + 1, 2)) + 1
    ev = Evaluator(chart, point)
    psi = FormalSeries.from_dict(_psi_jets(chart, point, r, depth), order + 1,
                                 zero=Jet(m, depth))
    z = parse_expression(f"z{s + 1}", m)
    return star_product(chart, psi, z, point, order, 0, ev) \
        - star_product(chart, z, psi, point, order, 0, ev)


def check_karabegov(chart: KahlerChart, order: int = 3, seed: int = DEFAULT_SEED,
                    point=None, tolerance: float = 1e-8) -> CheckReport:
    """``Psi^r * z^s - z^s * Psi^r = delta^{rs}`` order by order."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    m = chart.m
    p = point if point is not None else random_point(rng, m)
    res = _Residual()
    for r in range(m):
        for s in range(m):
            comm = karabegov_commutator(chart, p, r, s, order)
            for k in range(-1, order + 1):
                expected = 1.0 if (k == 0 and r == s) else 0.0
                res.add(_value(comm[k]), expected)
    return _report("karabegov", {"chart": chart.name, "m": m, "order": order},
                   res.value, tolerance, start, seed)


# -- suites -------------------------------------------------------------------------------


def suite_jobs(suite: str = "all", seed: int = DEFAULT_SEED,
               order: int | None = None, chart: KahlerChart | None = None
               ) -> list[tuple[str, Callable[[], CheckReport]]]:
    """Named check closures for a suite at default (acceptance) parameters."""
    fs = builtin_chart("fubini-study")
    disc = builtin_chart("hyperbolic-disc")
    flat = builtin_chart("flat")
    jobs: list[tuple[str, Callable[[], CheckReport]]] = []

    def want(name):
        return suite in ("all", name)

    if want("structure"):
        jobs.append(("structure", lambda: check_structure(4)))
    if want("wick"):
        for m in (1, 2):
            jobs.append((f"wick/m={m}", lambda m=m: check_wick(m, order or 6, seed=seed)))
    if want("first-order"):
        for c in ([chart] if chart else [flat, fs, disc]):
            jobs.append((f"first-order/{c.name}", lambda c=c: check_first_order(c, seed=seed)))
    if want("assoc"):
        charts = [chart] if chart else [fs, disc, deformed_chart("hyperbolic-disc", phi0="same")]
        for c in charts:
            jobs.append((f"assoc/{c.name}",
                         lambda c=c: check_associativity(c, order or 3, seed=seed)))
    if want("circuit-form"):
        for m in (1, 2):
            jobs.append((f"circuit-form/m={m}",
                         lambda m=m: check_circuit_form(m, min(order or 2, 2), seed=seed)))
    if want("fusion"):
        jobs.append(("fusion", lambda: check_fusion_partition(2, 1, seed=seed)))
    if want("budding"):
        jobs.append(("budding", lambda: check_budding(3, seed=seed)))
    if want("karabegov"):
        charts = [chart] if chart else [flat, builtin_chart("flat", 2), fs,
                                        deformed_chart("fubini-study", phi1="same")]
        for c in charts:
            jobs.append((f"karabegov/{c.name}/m={c.m}",
                         lambda c=c: check_karabegov(c, order or 3, seed=seed,
                                                     point=(0.3 + 0.1j,) * c.m)))
    if not jobs:
        raise ValueError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)}")
    return jobs


def run_suite(suite: str = "all", seed: int = DEFAULT_SEED, order: int | None = None,
              chart: KahlerChart | None = None,
              progress: Callable[[CheckReport], None] | None = None) -> list[CheckReport]:
    reports = []
    for _, job in suite_jobs(suite, seed, order, chart):
        report = job()
        reports.append(report)
        if progress:
            progress(report)
    return reports


def write_jsonl(reports: Iterable[CheckReport], path, timings: bool = False) -> None:
    with open(path, "w") as fh:
        for r in reports:
            fh.write(r.to_json(timings) + "\n")


def summary_table(reports: Sequence[CheckReport]) -> str:
    rows = [("check", "parameters", "residual", "tolerance", "result", "seconds")]
    for r in reports:
        params = " ".join(f"{k}={v}" for k, v in r.parameters.items())
        rows.append((r.name, params, f"{r.max_residual:.3e}", f"{r.tolerance:.0e}",
                     "pass" if r.passed else "FAIL", f"{r.runtime:.2f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
