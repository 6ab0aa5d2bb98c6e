import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navalg import cq
from navalg.evaluator import boolean, evaluate
from navalg.expr import parse
from navalg.graph import Graph

from randgen import random_expr, random_graph


def test_self_loop_homomorphism():
    f = cq.find_homomorphism({("R", "x", "y")}, {("R", "z", "z")})
    assert f == {"x": "z", "y": "z"}


def test_no_homomorphism_into_disjoint_edges():
    path = {("R", "x", "y"), ("R", "y", "z")}
    assert cq.find_homomorphism(path, {("R", "a", "b"), ("R", "c", "d")}) is None


def test_enumerate_homomorphisms_count():
    edge = {("R", "x", "y")}
    triangle = {("R", "a", "b"), ("R", "b", "c"), ("R", "c", "a")}
    maps = cq.enumerate_homomorphisms(edge, triangle)
    assert len(maps) == 3
    assert all(cq.is_homomorphism(f, edge, triangle) for f in maps)


def test_compose_and_identity():
    f = {"x": "a", "y": "b"}
    g = {"a": "p", "b": "p"}
    assert cq.compose_maps(f, g) == {"x": "p", "y": "p"}
    assert cq.is_identity({"a": "a"}) and not cq.is_identity(f)


def test_chain_detection():
    fig = [("1", "2"), ("2", "3"), ("4", "5"), ("4", "3"), ("6", "5"), ("7", "6")]
    assert cq.is_chain({("R", a, b) for a, b in fig})
    assert not cq.is_chain({("R", "a", "a")})
    assert not cq.is_chain({("R", "a", "b"), ("R", "b", "c"), ("R", "c", "a")})
    assert not cq.is_chain({("R", "a", "b"), ("R", "a", "c"), ("R", "a", "d")})
    two = {("R", "a", "b"), ("R", "c", "d")}
    assert cq.is_disjoint_union_of_chains(two) and not cq.is_chain(two)


def test_expr_to_cq_shapes():
    q = cq.expr_to_cq(parse("R . conv(R)"))
    assert q.head == ("x", "y")
    assert q.atoms == {("R", "x", "z0"), ("R", "y", "z0")}
    q = cq.expr_to_cq(parse("R . id . R"))
    assert len(q.variables) == 3
    q = cq.expr_to_cq(parse("R . di"))
    assert q.neqs == {frozenset({"z0", "y"})}
    with pytest.raises(cq.CQError):
        cq.expr_to_cq(parse("R | R"))
    with pytest.raises(cq.CQError):
        cq.expr_to_cq(parse("0 . R"))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_expr_to_cq_agrees_with_evaluator(seed):
    rng = random.Random(seed)
    e = random_expr(rng, rng.randint(1, 9), ("R", "S"), ("conv",), ("compose",), empty=False)
    g = random_graph(rng, max_nodes=5, labels=("R", "S"))
    q = cq.expr_to_cq(e)
    assert cq.match_cq(q, g) == g.decode(evaluate(e, g))


def test_bzzz_shape():
    atoms = cq.bzzz_atoms()
    assert len(atoms) == 33
    assert len(cq.body_variables(atoms)) == 34
    g = cq.bzzz_graph()
    assert g.size == 34 and g.edge_count() == 33


def test_bzzz_is_rigid():
    endos = cq.enumerate_endomorphisms(cq.bzzz_atoms())
    assert len(endos) == 1 and cq.is_identity(endos[0])


def test_zzz_expressions_agree():
    g = cq.bzzz_graph()
    assert boolean(cq.q_zzz_pi_expr(), g)
    assert boolean(cq.q_zzz_conv_expr(), g)
    assert cq.match_cq(cq.q_zzz(), g) == {()}
    # a long path folds every zigzag back onto itself; a short one has no R^4
    long_path = Graph.single([(str(i), str(i + 1)) for i in range(12)])
    assert boolean(cq.q_zzz_pi_expr(), long_path)
    short_path = Graph.single([(str(i), str(i + 1)) for i in range(3)])
    assert not boolean(cq.q_zzz_pi_expr(), short_path)


def test_union_free_enumeration_size():
    assert sum(1 for _ in cq.union_free_conv_di(3)) == 4 + 16 + 64


def test_verify_zzz_small():
    rep = cq.verify_zzz_separation(max_length=4)
    assert rep.ok, rep.lines()
    assert rep.checked_expressions == 4 + 16 + 64 + 256
    assert rep.nonempty_expressions > 0


def test_neq_requires_distinct_values():
    g = Graph.single([("a", "a"), ("a", "b")])
    q = cq.CQ(("x", "y"), {("R", "x", "y")}, {frozenset({"x", "y"})})
    assert cq.match_cq(q, g) == {("a", "b")}


def test_head_variable_outside_atoms_ranges_over_adom():
    g = Graph.single([("a", "b")])
    q = cq.CQ(("x", "w"), {("R", "x", "y")})
    assert cq.match_cq(q, g) == {("a", "a"), ("a", "b")}


def test_body_round_trip():
    text = "head x y\nR x z\nR z y\nneq x y\n"
    q = cq.load_cq(text)
    assert cq.render_cq(q) == text
    assert cq.load_cq(cq.render_cq(q)) == q


def test_body_format_errors():
    with pytest.raises(cq.CQFormatError) as exc:
        cq.load_cq("R x y\nR x\n")
    assert exc.value.line == 2
    with pytest.raises(cq.CQFormatError):
        cq.load_cq("neq x x\n")
