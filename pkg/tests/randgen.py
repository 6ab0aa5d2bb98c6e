"""Seeded random graphs and expressions shared by the test modules."""

from __future__ import annotations

import random
from typing import Sequence

from navalg.expr import (
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
)
from navalg.graph import Graph

ALL_UNARY = ("conv", "pi1", "pi2", "copi1", "copi2")
ALL_BINARY = ("compose", "union", "cap", "diff")

_UNARY = {"conv": Converse, "pi1": Proj1, "pi2": Proj2, "copi1": Coproj1, "copi2": Coproj2}
_BINARY = {"compose": Compose, "union": Union, "cap": Intersect, "diff": Diff}


def random_graph(
    rng: random.Random,
    max_nodes: int = 6,
    labels: Sequence[str] = ("R",),
    density: float | None = None,
    min_nodes: int = 1,
) -> Graph:
    n = rng.randint(min_nodes, max_nodes)
    nodes = [f"n{i}" for i in range(n)]
    p = density if density is not None else rng.uniform(0.15, 0.6)
    edges = {}
    for lab in labels:
        edges[lab] = [(a, b) for a in nodes for b in nodes if rng.random() < p]
    if not any(edges.values()):
        edges[labels[0]] = [(rng.choice(nodes), rng.choice(nodes))]
    return Graph(edges, labels)


def random_expr(
    rng: random.Random,
    size: int,
    labels: Sequence[str] = ("R",),
    unary: Sequence[str] = ALL_UNARY,
    binary: Sequence[str] = ALL_BINARY,
    di: bool = True,
    empty: bool = True,
) -> Expr:
    """Random expression with exactly ``size`` nodes (when the ops allow it)."""
    if size <= 1 or (not unary and size == 2):
        atoms = [Label(lab) for lab in labels] + [ID]
        if di:
            atoms.append(DI)
        if empty and rng.random() < 0.3:
            atoms.append(EMPTY)
        return rng.choice(atoms)
    use_unary = unary and (size == 2 or not binary or rng.random() < 0.3)
    if use_unary:
        ctor = _UNARY[rng.choice(list(unary))]
        return ctor(random_expr(rng, size - 1, labels, unary, binary, di, empty))
    left = rng.randint(1, size - 2)
    ctor = _BINARY[rng.choice(list(binary))]
    return ctor(
        random_expr(rng, left, labels, unary, binary, di, empty),
        random_expr(rng, size - 1 - left, labels, unary, binary, di, empty),
    )
