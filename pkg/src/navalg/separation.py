"""Distinguishability of graph pairs.

Two engines live here: the pairwise brute-force closure over result
relations, and the arrow-logic bisimulation for N(diff, di) computed as a
refinement sequence over quadruples ``(a1, b1, a2, b2)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .evaluator import OperatorProfile
from .expr import (
    DI,
    EMPTY,
    ID,
    Compose,
    Converse,
    Coproj1,
    Coproj2,
    Diff,
    Expr,
    Intersect,
    Label,
    Proj1,
    Proj2,
    Union,
    degree,
)
from .graph import Graph, MarkedGraph, Relation

DEFAULT_BUDGET = 5_000_000

PairKey = Tuple[int, int]


class BudgetExceeded(RuntimeError):
    """The closure grew past its budget; ``partial`` holds what was found."""

    def __init__(self, budget: int, partial: "ClosureResult"):
        self.budget = budget
        self.partial = partial
        super().__init__(
            f"brute-force closure exceeded budget of {budget} pairs "
            f"({len(partial.pairs)} stored); no verdict"
        )


@dataclass(frozen=True)
class RelationPair:
    r1: Relation
    r2: Relation

    def separates(self) -> bool:
        return self.r1.is_empty() != self.r2.is_empty()


@dataclass
class ClosureResult:
    g1: Graph
    g2: Graph
    pairs: List[PairKey]
    witnesses: Optional[Dict[PairKey, Expr]] = None
    witness: Optional[Expr] = None
    complete: bool = True

    @property
    def distinguishable(self) -> bool:
        return self.witness is not None or any(
            (a == 0) != (b == 0) for a, b in self.pairs
        )

    @property
    def verdict(self) -> str:
        return "distinguishable" if self.distinguishable else "indistinguishable"

    def relation_pairs(self) -> List[RelationPair]:
        n1, n2 = self.g1.size, self.g2.size
        return [RelationPair(Relation(n1, a), Relation(n2, b)) for a, b in self.pairs]

    def __len__(self) -> int:
        return len(self.pairs)


def _check_vocab(g1: Graph, g2: Graph) -> None:
    if g1.labels != g2.labels:
        raise ValueError(
            f"graphs have different vocabularies: {g1.labels} vs {g2.labels}"
        )


def _unary_ops(profile: OperatorProfile) -> List[Tuple[Callable[[Expr], Expr], str]]:
    out = []
    for flag, ctor, kernel in (
        ("conv", Converse, "converse"),
        ("pi1", Proj1, "proj1"),
        ("pi2", Proj2, "proj2"),
        ("copi1", Coproj1, "coproj1"),
        ("copi2", Coproj2, "coproj2"),
    ):
        if getattr(profile, flag):
            out.append((ctor, kernel))
    return out


def _binary_ops(profile: OperatorProfile):
    # (constructor, kernel(ops, a, b), commutative)
    ops = [
        (Compose, lambda o, a, b: o.compose(a, b), False),
        (Union, lambda o, a, b: a | b, True),
    ]
    if profile.cap:
        ops.append((Intersect, lambda o, a, b: a & b, True))
    if profile.diff:
        ops.append((Diff, lambda o, a, b: a & ~b, False))
    return ops


def brute_force_closure(
    g1: Graph,
    g2: Graph,
    profile: OperatorProfile,
    with_witnesses: bool = False,
    budget: int = DEFAULT_BUDGET,
    stop_on_separation: bool = False,
) -> ClosureResult:
    """All pairs ``(e(G1), e(G2))`` for ``e`` in the language of ``profile``.

    Seeds are id, di (only when the profile has it) and every label.  The
    worklist is FIFO; each newly dequeued pair is combined with every pair
    processed before it, in both argument orders, and with itself.
    """
    _check_vocab(g1, g2)
    o1, o2 = g1.ops, g2.ops
    seeds: List[Tuple[PairKey, Expr]] = [((o1.identity, o2.identity), ID)]
    if profile.di:
        seeds.append(((o1.diversity, o2.diversity), DI))
    for lab in g1.labels:
        seeds.append(((g1.relation(lab).bits, g2.relation(lab).bits), Label(lab)))

    seen: Dict[PairKey, Optional[Expr]] = {}
    order: List[PairKey] = []
    queue: deque = deque()
    result = ClosureResult(g1, g2, order, None)
    unary = _unary_ops(profile)
    binary = _binary_ops(profile)

    def add(key: PairKey, make: Callable[[], Expr]) -> bool:
        if key in seen:
            return False
        if len(order) >= budget:
            _finish(result, seen, with_witnesses, complete=False)
            raise BudgetExceeded(budget, result)
        expr = make()
        seen[key] = expr
        order.append(key)
        queue.append(key)
        if (key[0] == 0) != (key[1] == 0):
            if result.witness is None:
                result.witness = expr
            if stop_on_separation:
                return True
        return False

    def expr_of(key: PairKey) -> Expr:
        return seen[key]

    for key, expr in seeds:
        if add(key, lambda expr=expr: expr):
            return _finish(result, seen, with_witnesses, complete=False)

    # constructing expressions are always kept so a separating pair can be named
    processed: List[PairKey] = []

    while queue:
        p = queue.popleft()
        for ctor, kernel in unary:
            key = (getattr(o1, kernel)(p[0]), getattr(o2, kernel)(p[1]))
            if add(key, lambda p=p, ctor=ctor: ctor(expr_of(p))):
                return _finish(result, seen, with_witnesses, complete=False)
        processed.append(p)
        for q in processed:
            for ctor, kernel, comm in binary:
                key = (kernel(o1, p[0], q[0]), kernel(o2, p[1], q[1]))
                if add(key, lambda p=p, q=q, ctor=ctor: ctor(expr_of(p), expr_of(q))):
                    return _finish(result, seen, with_witnesses, complete=False)
                if comm or q == p:
                    continue
                key = (kernel(o1, q[0], p[0]), kernel(o2, q[1], p[1]))
                if add(key, lambda p=p, q=q, ctor=ctor: ctor(expr_of(q), expr_of(p))):
                    return _finish(result, seen, with_witnesses, complete=False)
    return _finish(result, seen, with_witnesses, complete=True)


def _finish(result: ClosureResult, seen, with_witnesses: bool, complete: bool):
    result.complete = complete
    if with_witnesses:
        result.witnesses = dict(seen)
    return result


@dataclass(frozen=True)
class Distinction:
    distinguishable: bool
    witness: Optional[Expr]
    pairs_explored: int

    def __bool__(self) -> bool:
        return self.distinguishable


def distinguishable(
    g1: Graph,
    g2: Graph,
    profile: OperatorProfile,
    budget: int = DEFAULT_BUDGET,
) -> Distinction:
    """Whether some expression over ``profile`` is nonempty on exactly one graph."""
    res = brute_force_closure(
        g1, g2, profile, with_witnesses=True, budget=budget, stop_on_separation=True
    )
    return Distinction(res.witness is not None, res.witness, len(res.pairs))


# ---------------------------------------------------------------------------
# bisimulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BisimRelation:
    """Quadruples related up to ``depth`` (``None`` for the fixpoint)."""

    g1: Graph
    g2: Graph
    depth: Optional[int]
    related: np.ndarray = field(repr=False)
    rounds: int = 0

    def holds(self, a1: str, b1: str, a2: str, b2: str) -> bool:
        i1, i2 = self.g1.index, self.g2.index
        return bool(self.related[i1[a1], i1[b1], i2[a2], i2[b2]])

    def quadruples(self) -> Iterator[Tuple[str, str, str, str]]:
        n1, n2 = self.g1.nodes, self.g2.nodes
        for a1, b1, a2, b2 in zip(*np.nonzero(self.related)):
            yield n1[a1], n1[b1], n2[a2], n2[b2]

    def count(self) -> int:
        return int(self.related.sum())


def _adjacency(g: Graph, label: str) -> np.ndarray:
    return g.relation(label).matrix()


def bisim_atoms(g1: Graph, g2: Graph) -> np.ndarray:
    """Quadruples satisfying the Atoms clause."""
    _check_vocab(g1, g2)
    n1, n2 = g1.size, g2.size
    eq1 = np.eye(n1, dtype=bool)[:, :, None, None]
    eq2 = np.eye(n2, dtype=bool)[None, None, :, :]
    z = eq1 == eq2
    for lab in g1.labels:
        r1 = _adjacency(g1, lab)[:, :, None, None]
        r2 = _adjacency(g2, lab)[None, None, :, :]
        z &= r1 == r2
    return z


def bisim_step(z: np.ndarray, atoms: np.ndarray) -> np.ndarray:
    """One refinement round: Atoms plus Forth and Back over ``z``."""
    n1, _, n2, _ = z.shape
    forth = np.ones_like(z)
    for c1 in range(n1):
        # left[a1, a2, c2] = z[a1, c1, a2, c2]; right[b1, c2, b2] = z[c1, b1, c2, b2]
        left = z[:, c1, :, :][:, None, :, None, :]
        right = z[c1, :, :, :].transpose(0, 2, 1)[None, :, None, :, :]
        forth &= (left & right).any(axis=4)
    back = np.ones_like(z)
    for c2 in range(n2):
        left = z[:, :, :, c2].transpose(0, 2, 1)[:, None, :, None, :]
        right = z[:, :, c2, :].transpose(1, 2, 0)[None, :, None, :, :]
        back &= (left & right).any(axis=4)
    return atoms & forth & back


def bisim_levels(g1: Graph, g2: Graph, depth: Optional[int] = None) -> List[np.ndarray]:
    """``[Z_0, Z_1, ...]`` up to ``depth`` or until the sequence stabilizes."""
    atoms = bisim_atoms(g1, g2)
    levels = [atoms]
    while depth is None or len(levels) <= depth:
        nxt = bisim_step(levels[-1], atoms)
        if np.array_equal(nxt, levels[-1]):
            if depth is None:
                break
            # stable: the remaining levels are identical
            levels.extend([nxt] * (depth + 1 - len(levels)))
            break
        levels.append(nxt)
    return levels


def bisim_relation(g1: Graph, g2: Graph, depth: int) -> BisimRelation:
    return BisimRelation(g1, g2, depth, bisim_levels(g1, g2, depth)[depth], depth)


def bisim_fixpoint(g1: Graph, g2: Graph) -> BisimRelation:
    levels = bisim_levels(g1, g2)
    return BisimRelation(g1, g2, None, levels[-1], len(levels) - 1)


def bisimilar_k(m1: MarkedGraph, m2: MarkedGraph, k: int) -> bool:
    rel = bisim_relation(m1.graph, m2.graph, k)
    return rel.holds(m1.a, m1.b, m2.a, m2.b)


def check_nonexpressibility_condition(
    g1: Graph, g2: Graph, depth: Optional[int] = None
) -> bool:
    """Every pair of ``adom(G1)^2`` has a bisimilar pair in ``adom(G2)^2``.

    With ``depth=None`` the fixpoint is used, covering every degree.
    """
    levels = bisim_levels(g1, g2, depth)
    z = levels[-1] if depth is None else levels[depth]
    if g1.size == 0:
        return True
    return bool(z.any(axis=(2, 3)).all())


# ---------------------------------------------------------------------------
# expression enumeration
# ---------------------------------------------------------------------------


def expression_enumerator(
    profile: OperatorProfile,
    max_degree: int,
    max_size: int,
    labels: Sequence[str] = ("R",),
) -> Iterator[Expr]:
    """All expressions over ``profile`` within the bounds, smallest first.

    Union and intersection are generated with operands in canonical order
    only, so commuted duplicates do not appear.
    """
    atoms: List[Expr] = [Label(lab) for lab in sorted(labels)] + [ID, EMPTY]
    if profile.di:
        atoms.append(DI)
    unary = [ctor for ctor, _ in _unary_ops(profile)]
    binary = [(ctor, comm) for ctor, _, comm in _binary_ops(profile)]
    table: Dict[int, List[Expr]] = {}
    for s in range(1, max_size + 1):
        out: List[Expr] = []
        if s == 1:
            out.extend(atoms)
        else:
            for ctor in unary:
                for arg in table[s - 1]:
                    e = ctor(arg)
                    if degree(e) <= max_degree:
                        out.append(e)
            for i in range(1, s - 1):
                j = s - 1 - i
                for ctor, comm in binary:
                    if comm and i > j:
                        continue
                    for ia, a in enumerate(table[i]):
                        rights = table[j]
                        start = ia + 1 if comm and i == j else 0
                        for b in rights[start:]:
                            e = ctor(a, b)
                            if degree(e) <= max_degree:
                                out.append(e)
        table[s] = out
        yield from out


def reachable_pairs_by_degree(
    g1: Graph,
    g2: Graph,
    profile: OperatorProfile,
    max_degree: int,
    max_size: int,
) -> Dict[PairKey, int]:
    """Semantic image of :func:`expression_enumerator` on a graph pair.

    Maps each pair ``(e(G1), e(G2))`` to the least degree of an enumerated
    expression producing it.  Computed by dynamic programming over size on
    relation pairs, so it covers the same expressions without listing them.
    """
    _check_vocab(g1, g2)
    o1, o2 = g1.ops, g2.ops
    unary = _unary_ops(profile)
    binary = _binary_ops(profile)
    atoms: Dict[PairKey, int] = {}
    for lab in g1.labels:
        atoms[(g1.relation(lab).bits, g2.relation(lab).bits)] = 0
    atoms[(o1.identity, o2.identity)] = 0
    atoms[(0, 0)] = 0
    if profile.di:
        atoms[(o1.diversity, o2.diversity)] = 0
    table: Dict[int, Dict[PairKey, int]] = {1: atoms}
    deg_of = {Compose: 1, Proj1: 1, Proj2: 1, Coproj1: 1, Coproj2: 1}

    def put(tab: Dict[PairKey, int], key: PairKey, d: int) -> None:
        if d <= max_degree and tab.get(key, max_degree + 1) > d:
            tab[key] = d

    for s in range(2, max_size + 1):
        cur: Dict[PairKey, int] = {}
        for ctor, kernel in unary:
            step = deg_of.get(ctor, 0)
            f1, f2 = getattr(o1, kernel), getattr(o2, kernel)
            for (a, b), d in table[s - 1].items():
                put(cur, (f1(a), f2(b)), d + step)
        for i in range(1, s - 1):
            j = s - 1 - i
            left, right = table[i], table[j]
            if not left or not right:
                continue
            for ctor, kernel, comm in binary:
                if comm and i > j:
                    continue
                step = deg_of.get(ctor, 0)
                for (a1, a2), da in left.items():
                    for (b1, b2), db in right.items():
                        key = (kernel(o1, a1, b1), kernel(o2, a2, b2))
                        put(cur, key, max(da, db) + step)
        table[s] = cur
    merged: Dict[PairKey, int] = {}
    for tab in table.values():
        for key, d in tab.items():
            if merged.get(key, max_degree + 1) > d:
                merged[key] = d
    return merged


def bisimulation_violations(
    g1: Graph,
    g2: Graph,
    max_degree: int,
    max_size: int,
    profile: OperatorProfile | None = None,
) -> List[Tuple[PairKey, int, Tuple[int, int, int, int]]]:
    """Counterexamples to bisimulation invariance on one graph pair.

    For every reachable ``(e(G1), e(G2))`` of degree ``d`` and every
    quadruple in ``Z_d``, membership must agree.  Returns the violations
    (expected: none).
    """
    profile = profile or OperatorProfile(di=True, diff=True)
    levels = bisim_levels(g1, g2, max_degree)
    n1, n2 = g1.size, g2.size
    out = []
    for (r1, r2), d in reachable_pairs_by_degree(g1, g2, profile, max_degree, max_size).items():
        m1 = Relation(n1, r1).matrix()[:, :, None, None]
        m2 = Relation(n2, r2).matrix()[None, None, :, :]
        bad = levels[d] & (m1 != m2)
        if bad.any():
            quad = tuple(int(x) for x in np.argwhere(bad)[0])
            out.append(((r1, r2), d, quad))
    return out
