import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navalg.evaluator import EvalConfig, OperatorProfile, boolean, evaluate
from navalg.expr import degree, parse, size
from navalg.graph import Graph, MarkedGraph, Relation
from navalg.separation import (
    BudgetExceeded,
    bisim_fixpoint,
    bisim_levels,
    bisim_relation,
    bisimilar_k,
    bisimulation_violations,
    brute_force_closure,
    check_nonexpressibility_condition,
    distinguishable,
    expression_enumerator,
    reachable_pairs_by_degree,
)

from randgen import random_graph

DI_DIFF = OperatorProfile(di=True, diff=True)


def g(*pairs):
    return Graph.single(pairs)


def test_two_cycle_vs_three_cycle():
    a, b = g(("a", "b"), ("b", "a")), g(("a", "b"), ("b", "c"), ("c", "a"))
    assert not distinguishable(a, b, OperatorProfile.parse("di,conv,pi,copi"))
    res = distinguishable(a, b, OperatorProfile.parse("cap"))
    assert res and boolean(res.witness, a) != boolean(res.witness, b)


def test_loops_need_diversity():
    a, b = g(("a", "a"), ("b", "b")), g(("c", "c"))
    assert not distinguishable(a, b, OperatorProfile.parse("conv,cap,diff,pi,copi"))
    assert distinguishable(a, b, OperatorProfile.parse("di"))


def test_vocabularies_must_match():
    with pytest.raises(ValueError):
        brute_force_closure(g(("a", "b")), Graph({"S": [("a", "b")]}), OperatorProfile())


def test_budget_error_is_not_a_verdict():
    a = g(("a", "b"), ("c", "d"))
    with pytest.raises(BudgetExceeded) as exc:
        brute_force_closure(a, a, DI_DIFF, budget=10)
    assert not exc.value.partial.complete
    assert len(exc.value.partial.pairs) == 10


def test_single_edge_closure_is_small():
    a = g(("a", "b"))
    res = brute_force_closure(a, a, DI_DIFF)
    assert res.complete and not res.distinguishable
    # every relation on a 2-node domain that the language can reach
    assert len(res.pairs) <= 16


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_closure_witnesses_evaluate_to_their_pairs(seed):
    rng = random.Random(seed)
    profile = rng.choice([OperatorProfile(), OperatorProfile.parse("conv,pi"), DI_DIFF])
    # difference reaches almost every relation pair; keep those graphs tiny
    n = 2 if profile.diff else 3
    a, b = random_graph(rng, max_nodes=n), random_graph(rng, max_nodes=n)
    res = brute_force_closure(a, b, profile, with_witnesses=True, budget=50_000)
    cfg = EvalConfig(profile)
    for key, e in res.witnesses.items():
        assert (evaluate(e, a, cfg).bits, evaluate(e, b, cfg).bits) == key


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_closure_contains_every_small_expression(seed):
    # independent oracle: enumerate expressions and evaluate them directly
    rng = random.Random(seed)
    profile = rng.choice([OperatorProfile(), OperatorProfile.parse("conv,pi,cap"), DI_DIFF])
    n = 2 if profile.diff else 3
    a, b = random_graph(rng, max_nodes=n), random_graph(rng, max_nodes=n)
    pairs = set(brute_force_closure(a, b, profile, budget=100_000).pairs)
    for e in expression_enumerator(profile, max_degree=3, max_size=5):
        key = (evaluate(e, a).bits, evaluate(e, b).bits)
        assert key in pairs or key == (0, 0)


def test_enumerator_respects_bounds():
    es = list(expression_enumerator(DI_DIFF, max_degree=2, max_size=5))
    assert all(size(e) <= 5 and degree(e) <= 2 for e in es)
    assert len(es) == len(set(es))
    assert parse("(R . R) - R") in es


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_dp_matches_enumeration(seed):
    rng = random.Random(seed)
    a, b = random_graph(rng, max_nodes=3), random_graph(rng, max_nodes=3)
    want = {}
    for e in expression_enumerator(DI_DIFF, 2, 6):
        key = (evaluate(e, a).bits, evaluate(e, b).bits)
        want[key] = min(want.get(key, 99), degree(e))
    assert reachable_pairs_by_degree(a, b, DI_DIFF, 2, 6) == want


def test_bisim_levels_shrink():
    rng = random.Random(5)
    for _ in range(20):
        a, b = random_graph(rng, max_nodes=4), random_graph(rng, max_nodes=4)
        levels = bisim_levels(a, b, 4)
        for lo, hi in zip(levels, levels[1:]):
            assert not (hi & ~lo).any()


def test_bisim_self_identity():
    a = g(("a", "b"), ("b", "c"), ("c", "a"), ("a", "a"))
    rel = bisim_fixpoint(a, a)
    for x in a.nodes:
        for y in a.nodes:
            assert rel.holds(x, y, x, y)


def test_atoms_separate_loops_from_edges():
    a, b = g(("a", "a")), g(("a", "b"))
    rel = bisim_relation(a, b, 0)
    # the only pair of G1 is a loop; G2 has none
    assert rel.count() == 0
    assert not check_nonexpressibility_condition(a, b, 0)
    rel = bisim_relation(b, b, 0)
    assert rel.holds("a", "b", "a", "b") and not rel.holds("a", "b", "b", "a")


def test_bisimilar_k_marks():
    two, three = g(("a", "b"), ("b", "a")), g(("x", "y"), ("y", "z"), ("z", "x"))
    m2, m3 = MarkedGraph(two, "a", "b"), MarkedGraph(three, "x", "y")
    assert bisimilar_k(m2, m3, 0)
    # R & R.R.R holds on (a, b) but not on (x, y); degree 2
    e = parse("R & R.R.R")
    assert (("a", "b") in two.decode(evaluate(e, two))) and ("x", "y") not in three.decode(evaluate(e, three))
    assert not bisimilar_k(m2, m3, 2)
    assert not bisimilar_k(MarkedGraph(two, "a", "b"), MarkedGraph(three, "x", "x"), 0)


def test_condition_on_cycles():
    two, three = g(("a", "b"), ("b", "a")), g(("x", "y"), ("y", "z"), ("z", "x"))
    # R.R & id is expressible in N(di,diff) only through cap, which is derivable
    assert not check_nonexpressibility_condition(two, three)


def test_condition_with_empty_first_graph():
    assert check_nonexpressibility_condition(Graph({"R": []}), g(("a", "b")), 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_no_violations_on_random_pairs(seed):
    rng = random.Random(seed)
    a, b = random_graph(rng, max_nodes=4), random_graph(rng, max_nodes=4)
    assert bisimulation_violations(a, b, max_degree=2, max_size=7) == []


def test_lower_levels_are_caught():
    """Checking degree-d pairs against Z_{d-1} must produce violations somewhere."""
    rng = random.Random(11)
    found = False
    for _ in range(200):
        a, b = random_graph(rng, max_nodes=4), random_graph(rng, max_nodes=4)
        levels = bisim_levels(a, b, 2)
        for (r1, r2), d in reachable_pairs_by_degree(a, b, DI_DIFF, 2, 7).items():
            if d == 0:
                continue
            m1 = Relation(a.size, r1).matrix()[:, :, None, None]
            m2 = Relation(b.size, r2).matrix()[None, None, :, :]
            if (levels[d - 1] & (m1 != m2)).any():
                found = True
                break
        if found:
            break
    assert found


def test_quadruple_listing():
    a = g(("a", "b"))
    rel = bisim_fixpoint(a, a)
    quads = set(rel.quadruples())
    assert ("a", "b", "a", "b") in quads
    assert ("a", "b", "b", "a") not in quads
    assert rel.count() == len(quads) == int(np.count_nonzero(rel.related))
