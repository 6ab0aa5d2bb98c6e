import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navalg.evaluator import boolean, evaluate
from navalg.expr import (
    ID,
    Compose,
    Converse,
    Feature,
    Intersect,
    Label,
    Proj1,
    Proj2,
    Union,
    contains_union,
    features_used,
    parse,
    parse_features,
    render,
    size,
    walk,
)
from navalg.graph import Graph
from navalg.lattice import ALL_FEATURE_SETS, closure_bar
from navalg.rewriter import (
    PreconditionError,
    RewriteTarget,
    UnreachableTargetError,
    desugar_path_equality,
    eliminate_converse_boolean,
    eliminate_derivable,
    hoist_unions,
    push_converse_to_atoms,
    rewrite,
    simplify,
    translate_pi,
)

from randgen import random_expr, random_graph

R, S = Label("R"), Label("S")
_UNARY = {Feature.CONV: ("conv",), Feature.PI: ("pi1", "pi2"), Feature.COPI: ("copi1", "copi2")}
_BINARY = {Feature.CAP: "cap", Feature.DIFF: "diff"}


def expr_over(rng, fs, n, labels=("R",)):
    unary = tuple(op for f, ops in _UNARY.items() if f in fs for op in ops)
    binary = ("compose", "union") + tuple(op for f, op in _BINARY.items() if f in fs)
    return random_expr(rng, n, labels, unary, binary, di=Feature.DI in fs)


def test_projection_via_conv_and_cap():
    out = eliminate_derivable(parse("pi1(R)"), parse_features("conv,cap"))
    assert out == parse("(R . conv(R)) & id")


def test_projection_via_di_and_cap():
    out = eliminate_derivable(parse("pi2(R)"), parse_features("di,cap"))
    assert out == parse("((id | di) . R) & id")


def test_cap_via_diff():
    assert eliminate_derivable(parse("R & S"), parse_features("diff")) == parse("R - (R - S)")


def test_coprojection_via_diff():
    # cap itself is rewritten away with difference
    assert eliminate_derivable(parse("copi1(R)"), parse_features("di,diff")) == parse(
        "id - (R . (id | di) - (R . (id | di) - id))"
    )


def test_unreachable_target():
    with pytest.raises(UnreachableTargetError) as exc:
        eliminate_derivable(parse("conv(R)"), parse_features("di,diff"))
    assert exc.value.missing == {Feature.CONV}
    with pytest.raises(PreconditionError):
        eliminate_derivable(parse("R"), RewriteTarget(frozenset(), "bool"))


@settings(max_examples=250, deadline=None)
@given(st.integers(0, 10**6))
def test_eliminate_derivable_is_pointwise_equal(seed):
    rng = random.Random(seed)
    target = rng.choice(ALL_FEATURE_SETS)
    e = expr_over(rng, closure_bar(target), rng.randint(1, 10), labels=("R", "S"))
    out = eliminate_derivable(e, target)
    assert features_used(out) <= target
    for _ in range(4):
        g = random_graph(rng, max_nodes=7, labels=("R", "S"))
        assert evaluate(out, g) == evaluate(e, g)


def test_push_converse():
    e = parse("conv(R . pi1(S) . conv(S))")
    assert push_converse_to_atoms(e) == parse("S . (pi1(S) . conv(R))")


def test_hoist_unions_small():
    parts = hoist_unions(parse("(R | S) . (R | id)"))
    assert [render(p) for p in parts] == ["(R . R)", "(R . id)", "(S . R)", "(S . id)"]
    with pytest.raises(PreconditionError):
        hoist_unions(parse("(R | S) & R"))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_hoist_unions_preserves_semantics(seed):
    rng = random.Random(seed)
    e = random_expr(rng, rng.randint(1, 9), ("R", "S"), ("conv", "pi1", "pi2"), ("compose", "union"))
    parts = hoist_unions(e)
    assert all(not contains_union(p) for p in parts)
    g = random_graph(rng, labels=("R", "S"))
    acc = 0
    for p in parts:
        acc |= evaluate(p, g).bits
    assert acc == evaluate(e, g).bits


def test_worked_example_projection():
    e1 = parse("R^3 . conv(R) . R^3")
    assert eliminate_converse_boolean(e1) == parse("pi1(R^3 . pi2(pi1(R^3) . R))")


def test_worked_example_coprojection():
    e2 = parse("R . copi2((R . S) | (conv(R) . S))")
    assert eliminate_converse_boolean(e2) == parse("pi1(R . copi2(R . S) . copi2(pi1(R) . S))")


def test_converse_elimination_rejects_cap():
    with pytest.raises(PreconditionError):
        eliminate_converse_boolean(parse("conv(R) & R"))


def test_empty_inside_composition():
    assert translate_pi(parse("0 . R")) == parse("0")
    assert eliminate_converse_boolean(parse("copi1(0 . conv(R))")) == ID


@settings(max_examples=250, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_translate_pi_pointwise(seed, side):
    rng = random.Random(seed)
    e = random_expr(rng, rng.randint(1, 10), ("R", "S"), ("conv", "pi1", "pi2", "copi1", "copi2"), ("compose", "union"))
    out = translate_pi(e, side)
    assert not any(isinstance(n, Converse) for n in walk(out))
    P = Proj1 if side == 1 else Proj2
    for _ in range(3):
        g = random_graph(rng, labels=("R", "S"))
        assert evaluate(out, g) == evaluate(P(e), g)


def test_path_equality():
    target_pi = parse_features("pi,cap")
    assert desugar_path_equality(R, S, target_pi) == Proj1(Intersect(R, S))
    assert desugar_path_equality(R, S, parse_features("conv,cap")) == Intersect(
        Compose(R, Converse(S)), ID
    )
    # a target that only derives pi gets the pi form rewritten into it
    out = desugar_path_equality(R, S, parse_features("di,cap"))
    assert features_used(out) <= parse_features("di,cap")
    with pytest.raises(UnreachableTargetError):
        desugar_path_equality(R, S, parse_features("di,conv"))


def test_intersection_form_is_not_path_equality():
    # (e1 & conv(e2)) & id only keeps loops; the common endpoint may be elsewhere
    g = Graph({"R": [("a", "b")], "S": [("a", "b")]})
    literal = Intersect(Intersect(R, Converse(S)), ID)
    assert evaluate(literal, g).is_empty()
    assert g.decode(evaluate(desugar_path_equality(R, S, parse_features("pi,cap")), g)) == {("a", "a")}


def test_path_equality_forms_agree():
    rng = random.Random(3)
    for _ in range(200):
        g = random_graph(rng, labels=("R", "S"))
        a = evaluate(desugar_path_equality(R, S, parse_features("pi,cap")), g)
        b = evaluate(desugar_path_equality(R, S, parse_features("conv,cap")), g)
        assert a == b


def test_rewrite_modes():
    e = parse("R . conv(R)")
    with pytest.raises(UnreachableTargetError):
        rewrite(e, parse_features("pi"))
    out = rewrite(e, parse_features("pi"), "bool")
    assert Feature.CONV not in features_used(out)
    with pytest.raises(UnreachableTargetError):
        rewrite(parse("conv(R) & R"), parse_features("pi,copi"), "bool")


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_bool_rewrite_preserves_nonemptiness(seed):
    rng = random.Random(seed)
    e = expr_over(rng, parse_features("di,conv,pi,copi"), rng.randint(2, 10))
    out = rewrite(e, parse_features("di,pi,copi"), "bool")
    for _ in range(3):
        g = random_graph(rng)
        assert boolean(out, g) == boolean(e, g)


def test_blow_up_recurrences():
    T = Label("T")
    e, prev = T, 1
    for n in range(1, 8):
        e = Proj1(Compose(Union(R, T), e))
        assert size(e) == 1 + 5 * n
        cur = size(translate_pi(e))
        assert cur == 2 * prev + 7
        prev = cur


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_simplify_is_sound(seed):
    rng = random.Random(seed)
    e = random_expr(rng, rng.randint(1, 12), ("R", "S"))
    out = simplify(e)
    assert size(out) <= size(e)
    g = random_graph(rng, labels=("R", "S"))
    assert evaluate(out, g) == evaluate(e, g)
