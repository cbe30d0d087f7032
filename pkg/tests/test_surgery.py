import pytest

from kahlerstar.decorations import (
    DecoratedGraph,
    canonical_decorated,
    decorated_key,
    enumerate_compatible_circuits,
    enumerate_labelled_circuit_classes,
)
from kahlerstar.enumeration import enumerate_graphs
from kahlerstar.graphs import (
    Graph,
    automorphism_count,
    canonical_form,
    chain,
    edgeless,
    parallel_edges,
    total_weight,
    validate,
)
from kahlerstar.surgery import (
    DomainError,
    bud,
    debud,
    defuse,
    equivalence_class,
    equivalence_key,
    fuse,
)


def decorate(g, labels=None, m=1):
    labels = labels if labels is not None else ((1, 1),) * len(g.edges)
    return DecoratedGraph(g, labels, m, enumerate_compatible_circuits(g, labels)[0])


EDGE = decorate(parallel_edges(1))


def test_fuse_two_edges_gives_five_classes():
    result = fuse(EDGE, EDGE)
    assert len(result) == 5
    for d in result:
        assert validate(d.graph) is None
        assert total_weight(d.graph) == 2
        assert d.graph.n_external == 3
    shapes = sorted((d.graph.weights, len(d.graph.edges)) for d in result)
    # chain 1->2->3, two orders of the double in-edge at ext3, two orders at an inserted vertex
    assert shapes == [((), 2), ((), 2), ((), 2), ((-1,), 3), ((-1,), 3)]


def test_fuse_with_edgeless_left_factor_prepends_isolated_vertex():
    g2 = decorate(chain((0,)))
    (only,) = fuse(decorate(edgeless()), g2)
    assert only.graph.degree(0) == 0
    assert only.graph.weights == (0,)
    assert len(only.graph.edges) == 2


def test_fuse_rejects_missing_circuit():
    with pytest.raises(DomainError):
        fuse(DecoratedGraph(parallel_edges(1), ((1, 1),), 1), EDGE)


def test_equivalence_class_sizes():
    assert equivalence_class(EDGE).size == 1
    assert equivalence_class(decorate(parallel_edges(2))).size == 2
    d = decorate(parallel_edges(4), ((1, 1), (1, 1), (1, 2), (1, 2)), m=2)
    assert equivalence_class(d).size == 4


def test_equivalence_ignores_order_at_second_external():
    g = parallel_edges(2)
    labels = ((1, 1), (2, 1))
    circuits = enumerate_compatible_circuits(g, labels)
    keys = {equivalence_key(DecoratedGraph(g, labels, 2, c)) for c in circuits}
    exact = {decorated_key(canonical_decorated(DecoratedGraph(g, labels, 2, c))) for c in circuits}
    assert len(circuits) == 2 and len(keys) == 1 and len(exact) == 2


def test_defuse_chain():
    g = Graph(3, (), ((0, 1), (1, 2)))
    cls, g2 = defuse(decorate(g))
    assert canonical_form(cls.representative.graph) == canonical_form(parallel_edges(1))
    assert canonical_form(g2.graph) == canonical_form(parallel_edges(1))


def test_defuse_with_isolated_middle_vertex():
    g = Graph(3, (), ((0, 2),))
    cls, g2 = defuse(decorate(g))
    assert canonical_form(g2.graph) == canonical_form(edgeless())
    assert canonical_form(cls.representative.graph) == canonical_form(parallel_edges(1))


@pytest.mark.parametrize("m, kmax", [(1, 2), (2, 1)])
def test_fusion_partitions_three_external_classes(m, kmax):
    for k in range(kmax + 1):
        target = set(enumerate_labelled_circuit_classes(3, k, m))
        produced = []
        for k1 in range(k + 1):
            reps = {}
            for d in enumerate_labelled_circuit_classes(2, k1, m).values():
                reps.setdefault(equivalence_key(d), d)
            for g1 in reps.values():
                for g2 in enumerate_labelled_circuit_classes(2, k - k1, m).values():
                    produced.extend(fuse(g1, g2).classes)
        assert len(produced) == len(set(produced))
        assert set(produced) == target


def test_defuse_round_trip():
    for key, d in enumerate_labelled_circuit_classes(3, 2, 1).items():
        cls, g2 = defuse(d)
        assert key in fuse(cls.representative, g2).classes


def test_bud_examples():
    b = bud(parallel_edges(1), 0)
    assert canonical_form(b) == canonical_form(chain((0,)))
    b = bud(parallel_edges(2), -1)
    assert canonical_form(b) == canonical_form(Graph(2, (-1,), ((0, 2), (2, 1), (2, 1))))
    # weight -1 budding keeps the total weight: one edge added, one -1 vertex
    assert total_weight(b) == 2
    with pytest.raises(DomainError):
        bud(parallel_edges(1), -1)
    with pytest.raises(DomainError):
        bud(edgeless(), 0)


def test_debud_examples():
    g, w = debud(chain((0,)))
    assert w == 0 and canonical_form(g) == canonical_form(parallel_edges(1))
    g, w = debud(Graph(2, (-1,), ((0, 2), (2, 1), (2, 1))))
    assert w == -1 and canonical_form(g) == canonical_form(parallel_edges(2))
    with pytest.raises(DomainError):
        debud(parallel_edges(2))
    with pytest.raises(DomainError):
        debud(parallel_edges(1))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_budding_is_an_automorphism_preserving_bijection(k):
    target = {canonical_form(g) for g in enumerate_graphs(2, k + 1) if g.degree(0) == 1}
    domain = [(g, -1) for g in enumerate_graphs(2, k + 1) if g.degree(0) > 1]
    for l in range(k):
        domain += [(g, l) for g in enumerate_graphs(2, k - l)]
    images = [canonical_form(bud(g, l)) for g, l in domain]
    assert len(images) == len(set(images))
    assert set(images) == target
    for g, l in domain:
        b = bud(g, l)
        assert total_weight(b) == total_weight(g) + 1 + l
        assert automorphism_count(b) == automorphism_count(g)
        back, w = debud(b)
        assert w == l and canonical_form(back) == canonical_form(g)
