import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navalg.graph import (
    Graph,
    GraphFormatError,
    GraphSchemaError,
    MarkedGraph,
    Relation,
    adom,
    bitops,
    converse_graph,
    load_graph,
    render_graph,
    render_relation,
)

from randgen import random_graph


def test_adom_single_edge():
    assert adom(Graph({"R": [("a", "b")]})) == {"a", "b"}


def test_adom_without_edges_is_empty():
    assert adom(Graph({"R": []})) == frozenset()


def test_adom_unions_labels():
    g = Graph({"R": [("a", "b")], "S": [("c", "b")]})
    assert adom(g) == {"a", "b", "c"}


def test_load_graph_basic():
    g = load_graph("R a b\nR b c")
    assert g.edges["R"] == {("a", "b"), ("b", "c")}


def test_load_graph_self_loop_and_duplicates():
    g = load_graph("R a a\nR a a\n")
    assert g.edges["R"] == {("a", "a")}
    assert g.size == 1


def test_load_graph_two_labels_with_comments():
    g = load_graph("# remark graph\nR a b\n\nS c b\n")
    assert g.labels == ("R", "S")
    assert g.edges["S"] == {("c", "b")}


def test_load_graph_bad_line_reports_line_number():
    with pytest.raises(GraphFormatError) as exc:
        load_graph("R a b\nR a\n")
    assert exc.value.line == 2


def test_load_graph_without_labels():
    with pytest.raises(GraphSchemaError):
        load_graph("# nothing\n")


def test_graph_needs_a_label():
    with pytest.raises(GraphSchemaError):
        Graph({})


def test_converse_graph():
    g = Graph({"R": [("a", "b")]})
    assert converse_graph(g).edges["R"] == {("b", "a")}
    cyc = Graph({"R": [("a", "b"), ("b", "a")]})
    assert converse_graph(cyc) == cyc


def test_marked_graph_requires_adom_members():
    g = Graph({"R": [("a", "b")]})
    MarkedGraph(g, "a", "b")
    with pytest.raises(ValueError):
        MarkedGraph(g, "a", "z")


def test_render_is_sorted():
    g = Graph({"S": [("b", "a")], "R": [("c", "a"), ("a", "b")]})
    assert render_graph(g) == "R a b\nR c a\nS b a\n"


def test_render_relation():
    g = load_graph("R a b\nR b c")
    assert render_relation(g, g.relation("R")) == "a b\nb c\n"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_round_trip_and_converse_adom(seed):
    g = random_graph(random.Random(seed), labels=("R", "S"))
    back = load_graph(render_graph(g))
    # the text format cannot mention a label without edges
    assert back.edges == {lab: es for lab, es in g.edges.items() if es}
    assert adom(converse_graph(g)) == adom(g)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 7), st.data())
def test_bit_and_pair_views_agree(n, data):
    pairs = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))))
    rel = Relation.from_pairs(n, pairs)
    assert rel.pairs() == frozenset(pairs)
    m = rel.matrix()
    assert {(int(i), int(j)) for i, j in zip(*np.nonzero(m))} == set(pairs)
    assert Relation.from_matrix(m) == rel
    assert len(rel) == len(pairs)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.data())
def test_kernels_match_set_definitions(n, data):
    cell = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    a = data.draw(st.sets(cell))
    b = data.draw(st.sets(cell))
    ops = bitops(n)
    A, B = ops.from_pairs(a), ops.from_pairs(b)
    comp = {(i, k) for i, j in a for j2, k in b if j == j2}
    assert set(ops.pairs(ops.compose(A, B))) == comp
    assert set(ops.pairs(ops.converse(A))) == {(j, i) for i, j in a}
    assert set(ops.pairs(ops.proj1(A))) == {(i, i) for i, _ in a}
    assert set(ops.pairs(ops.proj2(A))) == {(j, j) for _, j in a}
    dom = set(range(n))
    assert set(ops.pairs(ops.coproj1(A))) == {(i, i) for i in dom - {i for i, _ in a}}
