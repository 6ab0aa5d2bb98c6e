"""Finite edge-labeled graphs and bit-matrix binary relations.

Nodes are external tokens (non-empty strings without whitespace); inside a
graph they are mapped to dense indices ``0..n-1`` over the sorted active
domain.  A relation over ``n`` nodes is stored as a single Python ``int``
holding an ``n x n`` bit matrix, row-major: pair ``(i, j)`` is bit
``i * n + j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Tuple

import numpy as np

Pair = Tuple[str, str]


class GraphFormatError(ValueError):
    """Malformed graph text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class GraphSchemaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# raw bit-matrix kernels
# ---------------------------------------------------------------------------


class BitOps:
    """Relation kernels over a fixed domain size ``n``.

    All arguments and results are ``int`` bit matrices.
    """

    __slots__ = ("n", "row_mask", "full", "identity", "diversity", "_diag")

    def __init__(self, n: int):
        self.n = n
        self.row_mask = (1 << n) - 1
        self.full = (1 << (n * n)) - 1
        self._diag = [1 << (i * n + i) for i in range(n)]
        self.identity = sum(self._diag)
        self.diversity = self.full & ~self.identity

    def rows(self, a: int) -> List[int]:
        n, m = self.n, self.row_mask
        return [(a >> (i * n)) & m for i in range(n)]

    def from_rows(self, rows: Iterable[int]) -> int:
        out = 0
        for i, row in enumerate(rows):
            out |= row << (i * self.n)
        return out

    def compose(self, a: int, b: int) -> int:
        if not a or not b:
            return 0
        n = self.n
        brows = self.rows(b)
        out = 0
        for i, row in enumerate(self.rows(a)):
            acc = 0
            while row:
                low = row & -row
                acc |= brows[low.bit_length() - 1]
                row ^= low
            out |= acc << (i * n)
        return out

    def converse(self, a: int) -> int:
        n = self.n
        out = 0
        while a:
            low = a & -a
            i, j = divmod(low.bit_length() - 1, n)
            out |= 1 << (j * n + i)
            a ^= low
        return out

    def proj1(self, a: int) -> int:
        out = 0
        for i, row in enumerate(self.rows(a)):
            if row:
                out |= self._diag[i]
        return out

    def proj2(self, a: int) -> int:
        cols = 0
        for row in self.rows(a):
            cols |= row
        out = 0
        while cols:
            low = cols & -cols
            out |= self._diag[low.bit_length() - 1]
            cols ^= low
        return out

    def coproj1(self, a: int) -> int:
        return self.identity & ~self.proj1(a)

    def coproj2(self, a: int) -> int:
        return self.identity & ~self.proj2(a)

    def pairs(self, a: int) -> Iterator[Tuple[int, int]]:
        n = self.n
        while a:
            low = a & -a
            yield divmod(low.bit_length() - 1, n)
            a ^= low

    def from_pairs(self, pairs: Iterable[Tuple[int, int]]) -> int:
        n = self.n
        out = 0
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"pair {(i, j)} outside a domain of size {n}")
            out |= 1 << (i * n + j)
        return out


_BITOPS: Dict[int, BitOps] = {}


def bitops(n: int) -> BitOps:
    ops = _BITOPS.get(n)
    if ops is None:
        ops = _BITOPS[n] = BitOps(n)
    return ops


@dataclass(frozen=True)
class Relation:
    """Binary relation over the dense active domain ``0..size-1``."""

    size: int
    bits: int = 0

    @classmethod
    def from_pairs(cls, size: int, pairs: Iterable[Tuple[int, int]]) -> "Relation":
        return cls(size, bitops(size).from_pairs(pairs))

    @classmethod
    def from_matrix(cls, matrix) -> "Relation":
        m = np.asarray(matrix, dtype=bool)
        n = m.shape[0]
        return cls.from_pairs(n, zip(*np.nonzero(m)))

    def pairs(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset(bitops(self.size).pairs(self.bits))

    def matrix(self) -> np.ndarray:
        n = self.size
        out = np.zeros((n, n), dtype=bool)
        for i, j in bitops(n).pairs(self.bits):
            out[i, j] = True
        return out

    def is_empty(self) -> bool:
        return self.bits == 0

    def __bool__(self) -> bool:
        return self.bits != 0

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __contains__(self, pair: Tuple[int, int]) -> bool:
        i, j = pair
        n = self.size
        return 0 <= i < n and 0 <= j < n and bool(self.bits >> (i * n + j) & 1)

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return bitops(self.size).pairs(self.bits)

    def _check(self, other: "Relation") -> None:
        if other.size != self.size:
            raise ValueError("relations over different domains")

    def __or__(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation(self.size, self.bits | other.bits)

    def __and__(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation(self.size, self.bits & other.bits)

    def __sub__(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation(self.size, self.bits & ~other.bits)

    def compose(self, other: "Relation") -> "Relation":
        self._check(other)
        return Relation(self.size, bitops(self.size).compose(self.bits, other.bits))

    def converse(self) -> "Relation":
        return Relation(self.size, bitops(self.size).converse(self.bits))

    def __le__(self, other: "Relation") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


def _check_token(token: str, what: str) -> None:
    if not isinstance(token, str) or not token or any(c.isspace() for c in token):
        raise GraphSchemaError(f"invalid {what} token {token!r}")


class Graph:
    """An instance of a label vocabulary: each label maps to a set of edges.

    The vocabulary must be nonempty; individual relations may be empty.
    Nodes are never declared, the node index is the active domain.
    """

    __slots__ = ("labels", "edges", "nodes", "index", "_relations", "_hash")

    def __init__(
        self,
        edges: Mapping[str, Iterable[Pair]],
        labels: Iterable[str] | None = None,
    ):
        vocab = set(edges) if labels is None else set(labels) | set(edges)
        if not vocab:
            raise GraphSchemaError("a graph needs at least one label")
        for label in vocab:
            _check_token(label, "label")
        frozen: Dict[str, FrozenSet[Pair]] = {}
        nodes = set()
        for label in vocab:
            pairs = frozenset((str(a), str(b)) for a, b in edges.get(label, ()))
            for a, b in pairs:
                _check_token(a, "node")
                _check_token(b, "node")
                nodes.add(a)
                nodes.add(b)
            frozen[label] = pairs
        self.labels: Tuple[str, ...] = tuple(sorted(vocab))
        self.edges: Dict[str, FrozenSet[Pair]] = {lab: frozen[lab] for lab in self.labels}
        self.nodes: Tuple[str, ...] = tuple(sorted(nodes))
        self.index: Dict[str, int] = {v: i for i, v in enumerate(self.nodes)}
        self._relations: Dict[str, Relation] = {}
        self._hash = hash((self.labels, tuple(self.edges[lab] for lab in self.labels)))

    @classmethod
    def single(cls, pairs: Iterable[Pair], label: str = "R") -> "Graph":
        return cls({label: list(pairs)})

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def ops(self) -> BitOps:
        return bitops(self.size)

    def relation(self, label: str) -> Relation:
        rel = self._relations.get(label)
        if rel is None:
            if label not in self.edges:
                raise KeyError(label)
            idx = self.index
            rel = Relation.from_pairs(
                self.size, ((idx[a], idx[b]) for a, b in self.edges[label])
            )
            self._relations[label] = rel
        return rel

    def encode(self, pairs: Iterable[Pair]) -> Relation:
        idx = self.index
        return Relation.from_pairs(self.size, ((idx[a], idx[b]) for a, b in pairs))

    def decode(self, rel: Relation) -> FrozenSet[Pair]:
        nodes = self.nodes
        return frozenset((nodes[i], nodes[j]) for i, j in rel)

    def edge_count(self) -> int:
        return sum(len(p) for p in self.edges.values())

    def is_subgraph_of(self, other: "Graph") -> bool:
        return all(self.edges[lab] <= other.edges.get(lab, frozenset()) for lab in self.labels)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Graph)
            and self.labels == other.labels
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(
            f"{lab}({a},{b})" for lab in self.labels for a, b in sorted(self.edges[lab])
        )
        return f"Graph({{{body}}})"


@dataclass(frozen=True)
class MarkedGraph:
    graph: Graph
    a: str
    b: str

    def __post_init__(self):
        for v in (self.a, self.b):
            if v not in self.graph.index:
                raise ValueError(f"{v!r} is not in the active domain")


def adom(g: Graph) -> FrozenSet[str]:
    return frozenset(g.nodes)


def converse_graph(g: Graph) -> Graph:
    return Graph({lab: [(b, a) for a, b in g.edges[lab]] for lab in g.labels}, g.labels)


def load_graph(text: str) -> Graph:
    """Parse the line-oriented graph format ``<label> <src> <dst>``."""
    edges: Dict[str, set] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphFormatError(
                f"expected '<label> <src> <dst>', got {len(parts)} token(s)", lineno
            )
        label, src, dst = parts
        edges.setdefault(label, set()).add((src, dst))
    if not edges:
        raise GraphSchemaError("graph text declares no labels")
    return Graph(edges)


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh.read())


def render_graph(g: Graph) -> str:
    lines = [
        f"{lab} {a} {b}" for lab in g.labels for a, b in sorted(g.edges[lab])
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def render_relation(g: Graph, rel: Relation) -> str:
    """Pairs of ``rel`` as ``<src> <dst>`` lines, sorted."""
    return "".join(f"{a} {b}\n" for a, b in sorted(g.decode(rel)))
