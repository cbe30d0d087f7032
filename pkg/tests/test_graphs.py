import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerstar.enumeration import enumerate_graphs
from kahlerstar.graphs import (
    CanonicalForm,
    Graph,
    automorphism_count,
    canonical_form,
    chain,
    edgeless,
    graph_from_canonical,
    isomorphic,
    parallel_edges,
    relabel,
    successors,
    topological_order,
    total_weight,
    validate,
    vertex_automorphism_count,
)


def test_total_weight_counts_edges_and_internal_weights():
    g = Graph(2, (0,), ((0, 2), (2, 1)))
    assert total_weight(g) == 2
    assert total_weight(edgeless()) == 0
    assert total_weight(Graph(2, (-1,), ((0, 2), (0, 2), (2, 1)))) == 2


@pytest.mark.parametrize(
    "graph, rule",
    [
        (Graph(2, (-2,), ((0, 2), (2, 1))), "weight<-1"),
        (Graph(2, (), ((0, 5),)), "unknown-vertex"),
        (Graph(2, (0,), ((2, 2), (0, 2), (2, 1))), "loop"),
        (Graph(2, (0, 0), ((0, 2), (2, 3), (3, 2), (3, 1))), "cycle"),
        (Graph(2, (0,), ((2, 1),)), "internal-source"),
        (Graph(2, (0,), ((0, 2),)), "internal-sink"),
        (Graph(2, (), ((1, 0),)), "first-external-not-source"),
        (Graph(2, (-1,), ((0, 2), (2, 1))), "degree<3 at weight -1"),
    ],
)
def test_validate_reports_the_broken_rule(graph, rule):
    violation = validate(graph)
    assert violation is not None
    assert violation.rule == rule


def test_last_external_must_be_sink():
    g = Graph(3, (), ((0, 1), (2, 1)))
    assert validate(g).rule == "last-external-not-sink"


def test_valid_graphs_have_no_violation():
    assert validate(parallel_edges(3)) is None
    assert validate(chain((0,))) is None
    assert validate(Graph(2, (-1,), ((0, 2), (2, 1), (2, 1)))) is None


def test_topological_order_and_successors():
    g = Graph(2, (0, 0), ((0, 2), (2, 3), (3, 1)))
    order = topological_order(g)
    assert order.index(0) < order.index(2) < order.index(3) < order.index(1)
    assert successors(g, 0) == {1, 2, 3}
    assert successors(g, 1) == set()
    with pytest.raises(KeyError):
        successors(g, 9)


def test_parallel_edges_automorphisms():
    for k in range(5):
        assert automorphism_count(parallel_edges(k)) == __import__("math").factorial(k)


def test_vertex_symmetric_chain():
    # ext1 -> u1, u1 => u2, u2 -> ext2 has the double edge as its only symmetry
    g = Graph(2, (-1, -1), ((0, 2), (2, 3), (2, 3), (3, 1)))
    assert vertex_automorphism_count(g) == 1
    assert automorphism_count(g) == 2


def test_swapping_internal_twins_is_an_automorphism():
    g = Graph(2, (0, 0), ((0, 2), (0, 3), (2, 1), (3, 1)))
    assert vertex_automorphism_count(g) == 2
    assert automorphism_count(g) == 2


def test_canonical_form_round_trip():
    for g in enumerate_graphs(2, 3):
        form = canonical_form(g)
        assert isinstance(form, CanonicalForm)
        assert str(form).startswith("KS1;n=2;")
        back = graph_from_canonical(form)
        assert canonical_form(back) == form
        assert automorphism_count(back) == automorphism_count(g)


def test_canonical_form_rejects_unknown_version():
    with pytest.raises(ValueError):
        graph_from_canonical(CanonicalForm(b"KS0;n=2;w=;e=0>1"))


def test_canonical_forms_distinguish_classes():
    forms = [canonical_form(g) for g in enumerate_graphs(2, 3)]
    assert len(set(forms)) == len(forms)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_canonical_form_is_relabelling_invariant(data):
    graphs = enumerate_graphs(2, 3)
    g = graphs[data.draw(st.integers(0, len(graphs) - 1))]
    internals = list(g.internal_ids())
    shuffled = data.draw(st.permutations(internals))
    perm = list(range(g.n_external)) + list(shuffled)
    edge_perm = data.draw(st.permutations(range(len(g.edges))))
    h = relabel(g, perm, list(edge_perm))
    assert canonical_form(h) == canonical_form(g)
    assert isomorphic(g, h)
    assert automorphism_count(h) == automorphism_count(g)


def test_automorphism_count_matches_permutation_search():
    for g in enumerate_graphs(2, 3):
        internals = list(g.internal_ids())
        base = sorted(g.edges)
        count = 0
        for perm in itertools.permutations(internals):
            remap = dict(zip(internals, perm))
            if all(g.weight(v) == g.weight(remap[v]) for v in internals):
                mapped = sorted((remap.get(t, t), remap.get(h, h)) for t, h in g.edges)
                count += mapped == base
        assert count == vertex_automorphism_count(g)
