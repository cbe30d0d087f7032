from fractions import Fraction

import numpy as np
import pytest

from kahlerstar.decorations import DecoratedGraph, enumerate_labellings
from kahlerstar.enumeration import enumerate_graphs
from kahlerstar.expr import parse_expression, random_polynomial
from kahlerstar.geometry import builtin_chart, poisson_bracket
from kahlerstar.graphs import Graph, automorphism_count, chain, parallel_edges
from kahlerstar.jets import JetError
from kahlerstar.operator import (
    Evaluator,
    emit_symbolic,
    format_latex,
    format_text,
    gamma,
    lambda_value,
    multi_D,
    operator_coefficient,
    star_circuit_form,
    star_coefficient,
    star_product,
    vanishing_filter,
)

from oracles import wick_coefficient_direct

P = (0.25 - 0.15j,)


def test_single_edge_flat():
    flat = builtin_chart("flat")
    val = gamma(parallel_edges(1), flat, [parse_expression("zb1"), parse_expression("z1")], 0)
    assert val.value == pytest.approx(1.0)


def test_single_edge_matches_metric_formula():
    chart = builtin_chart("fubini-study", 2)
    rng = np.random.default_rng(0)
    f1, f2 = random_polynomial(rng, 2), random_polynomial(rng, 2)
    p = (0.1 + 0.2j, -0.3 + 0.05j)
    ev = Evaluator(chart, p)
    a, b = f1.jet(p, 1, 2), f2.jet(p, 1, 2)
    h = ev.inverse_metric(0)
    expected = sum(h[q, r].value * a.d(q, False).value * b.d(r, True).value
                   for q in range(2) for r in range(2))
    assert gamma(parallel_edges(1), chart, [f1, f2], p).value == pytest.approx(expected)


def test_zero_potential_kills_graph():
    chart = builtin_chart("fubini-study")
    args = [parse_expression("zb1^2"), parse_expression("z1^2")]
    assert gamma(chain((0,)), chart, args, P).value == 0
    assert gamma(chain((0,)), chart.with_potential(0, chart.potentials[-1]), args, P).value != 0


def test_arity_mismatch():
    with pytest.raises(ValueError):
        gamma(parallel_edges(1), builtin_chart("flat"), [parse_expression("z1")], 0)


def test_lambda_rejects_labels_beyond_dimension():
    with pytest.raises(ValueError):
        DecoratedGraph(parallel_edges(1), ((1, 2),), 1)
    d = DecoratedGraph(parallel_edges(1), ((1, 2),), 2)
    with pytest.raises(ValueError):
        lambda_value(d, builtin_chart("flat"), ["zb1", "z1"], P)


@pytest.mark.parametrize("m", [1, 2])
def test_gamma_is_label_sum_of_lambda(m):
    chart = builtin_chart("hyperbolic-disc", m).with_potential(0, parse_expression(
        " + ".join(f"z{k}^2*zb{k}" for k in range(1, m + 1)), m))
    rng = np.random.default_rng(11)
    f1, f2 = random_polynomial(rng, m), random_polynomial(rng, m)
    p = tuple(0.2 - 0.1j * k for k in range(m))
    ev = Evaluator(chart, p)
    for k in range(3):
        for g in enumerate_graphs(2, k):
            total = sum(lambda_value(DecoratedGraph(g, l, m), chart, [f1, f2], p, 0, ev).value
                        for l in enumerate_labellings(g, m))
            assert total == pytest.approx(gamma(g, chart, [f1, f2], p, 0, ev).value, abs=1e-10)


def test_d0_is_pointwise_product():
    chart = builtin_chart("fubini-study")
    f1, f2 = parse_expression("z1*zb1 + 2"), parse_expression("zb1^3 - z1")
    d0 = star_coefficient(0, chart, f1, f2, P)
    assert d0.value == pytest.approx(f1.jet(P, 0, 1).value * f2.jet(P, 0, 1).value)


def test_first_order_antisymmetry():
    chart = builtin_chart("hyperbolic-disc")
    f1, f2 = parse_expression("z1^2*zb1"), parse_expression("zb1^2 + z1*zb1")
    lhs = star_coefficient(1, chart, f1, f2, P).value - star_coefficient(1, chart, f2, f1, P).value
    assert lhs == pytest.approx(-1j * poisson_bracket(chart, f1, f2, P, 0).value, abs=1e-12)


def test_zbar_star_z_flat():
    s = star_product(builtin_chart("flat"), "zb1", "z1", (0.5 + 0.5j,), 4)
    assert s[0].value == pytest.approx(0.5)
    assert s[1].value == pytest.approx(1.0)
    assert all(s[k].value == 0 for k in range(2, 5))


def test_flat_wick_against_direct_oracle():
    f1_terms = {(1, 3): 0.5, (0, 2): 1j, (2, 1): -1.0}
    f2_terms = {(3, 1): 2.0, (2, 0): 1.0, (1, 2): 0.3j}
    text = lambda terms: " + ".join(f"({c})*z1^{a}*zb1^{b}" for (a, b), c in terms.items())
    f1, f2 = parse_expression(text(f1_terms)), parse_expression(text(f2_terms))
    z = 0.3 - 0.4j
    s = star_product(builtin_chart("flat"), f1, f2, (z,), 4)
    for k in range(5):
        assert s[k].value == pytest.approx(wick_coefficient_direct(f1_terms, f2_terms, z, k))


def test_normalization_and_separation_of_variables():
    chart = builtin_chart("fubini-study").with_potential(0, parse_expression("log(1 + z1*zb1)"))
    f = parse_expression("z1^2*zb1 + zb1^3")
    one = parse_expression("1")
    hol = parse_expression("z1^3 + 2*z1")
    anti = parse_expression("zb1^2")
    for left, right in ((one, f), (f, one), (hol, f), (f, anti)):
        s = star_product(chart, left, right, P, 3)
        prod = left.jet(P, 0, 1).value * right.jet(P, 0, 1).value
        assert s[0].value == pytest.approx(prod)
        assert all(abs(s[k].value) < 1e-12 for k in range(1, 4))


def test_gauge_invariance_of_internal_vertices():
    base = builtin_chart("fubini-study").with_potential(0, parse_expression("z1^2*zb1^2"))
    shifted = base.with_potential(0, parse_expression("z1^3 + zb1^2 + 4"))
    shifted = shifted.with_potential(-1, parse_expression("z1^2 + 2*zb1"))
    rng = np.random.default_rng(5)
    f1, f2 = random_polynomial(rng, 1), random_polynomial(rng, 1)
    for k in range(4):
        for g in enumerate_graphs(2, k):
            a = gamma(g, base, [f1, f2], P).value
            b = gamma(g, shifted, [f1, f2], P).value
            assert a == pytest.approx(b, abs=1e-10)


def test_multi_d_special_cases():
    chart = builtin_chart("fubini-study")
    f1, f2, f3 = parse_expression("zb1^2"), parse_expression("z1*zb1"), parse_expression("z1^2")
    two = multi_D(chart, [f1, f2], P, 2)
    star = star_product(chart, f1, f2, P, 2)
    assert all(two[k].value == star[k].value for k in range(3))
    three = multi_D(chart, [f1, f2, f3], P, 0)
    expected = np.prod([f.jet(P, 0, 1).value for f in (f1, f2, f3)])
    assert three[0].value == pytest.approx(expected)
    with pytest.raises(ValueError, match="experimental"):
        multi_D(chart, [f1, f2, f3, f1], P, 1)
    four = multi_D(chart, [f1, f2, f3, f1], P, 1, experimental=True)
    assert four[0].value == pytest.approx(expected * f1.jet(P, 0, 1).value)


def test_circuit_form_agrees():
    chart = builtin_chart("fubini-study", 2).with_potential(0, parse_expression("z1*zb2 + z2*zb1", 2))
    rng = np.random.default_rng(9)
    f1, f2 = random_polynomial(rng, 2), random_polynomial(rng, 2)
    p = (0.1 + 0.1j, 0.2 - 0.1j)
    a = star_product(chart, f1, f2, p, 2)
    b = star_circuit_form(chart, f1, f2, p, 2, m=2)
    for k in range(3):
        assert a[k].value == pytest.approx(b[k].value, abs=1e-10)


def test_insufficient_jet_depth_is_reported():
    chart = builtin_chart("flat")
    shallow = parse_expression("zb1^2").jet(P, 0, 1)
    with pytest.raises(JetError):
        gamma(parallel_edges(1), chart, [shallow, parse_expression("z1")], P)


def test_vanishing_filter():
    chart = builtin_chart("flat").with_potential(1, parse_expression("z1^2*zb1"))
    filt = vanishing_filter(chart, [(0, 2), None])
    assert filt.internal == {-1: (1, 1), 1: (2, 1)}
    assert filt.external == {1: (0, 2)}


def test_emit_symbolic():
    (t0,) = emit_symbolic(0)
    assert t0.text == "f1 f2" and t0.coefficient == 1
    (t1,) = emit_symbolic(1)
    assert t1.text == "g^{q̄p} ∂_q̄ f1 ∂_p f2"
    assert t1.coefficient == 1 and t1.weight == 1
    terms = emit_symbolic(2)
    assert len(terms) == 5
    double = [t for t in terms if t.text == "g^{q̄p} g^{s̄r} ∂_q̄∂_s̄ f1 ∂_p∂_r f2"]
    assert len(double) == 1 and double[0].coefficient == Fraction(1, 2)
    for t in emit_symbolic(3):
        assert t.coefficient.denominator == automorphism_count(t.graph.to_graph())
    assert format_latex(terms, 2).startswith("D_{2} = ")
    assert format_text([t1], 1) == "D_1 = g^{q̄p} ∂_q̄ f1 ∂_p f2"
    assert "\\Phi_{-1}" in emit_symbolic(2)[0].latex


def test_star_product_with_series_argument_tracks_orders():
    chart = builtin_chart("flat")
    z = parse_expression("z1")
    ev = Evaluator(chart, P)
    zb = parse_expression("zb1").jet(P, 3, 1)
    from kahlerstar.series import FormalSeries

    psi = FormalSeries(-1, (zb,), 2)
    s = star_product(chart, psi, z, P, 2, evaluator=ev)
    assert s.leading == -1
    assert s[-1].value == pytest.approx(P[0] * P[0].conjugate())
    assert s[0].value == pytest.approx(1.0)
    assert operator_coefficient(2, chart, [zb, z], P, 0, ev).value == 0
