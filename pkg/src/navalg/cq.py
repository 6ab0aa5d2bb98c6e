"""Conjunctive queries with nonequalities and the B_ZZZ rigidity argument."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from .evaluator import boolean
from .expr import (
    DI,
    ID,
    Compose,
    Converse,
    Di,
    Empty,
    Expr,
    Feature,
    Id,
    Label,
    compose_all,
    contains_union,
    features_used,
    parse,
    render,
)
from .graph import Graph
from .rewriter import push_converse_to_atoms

Atom = Tuple[str, str, str]  # (label, source variable, target variable)
Body = FrozenSet[Atom]
Assignment = Dict[str, str]


class CQError(ValueError):
    pass


class CQFormatError(CQError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__((f"line {line}: " if line is not None else "") + message)


@dataclass(frozen=True)
class CQ:
    """``head <- atoms, neqs``.  Variables not in any atom range over adom."""

    head: Tuple[str, ...] = ()
    atoms: Body = frozenset()
    neqs: FrozenSet[FrozenSet[str]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "atoms", frozenset(self.atoms))
        object.__setattr__(self, "neqs", frozenset(frozenset(p) for p in self.neqs))
        for pair in self.neqs:
            if len(pair) != 2:
                raise CQError("a nonequality needs two distinct variables")

    @property
    def variables(self) -> Tuple[str, ...]:
        out = set(self.head)
        for _, x, y in self.atoms:
            out.update((x, y))
        for pair in self.neqs:
            out.update(pair)
        return tuple(sorted(out))

    def is_boolean(self) -> bool:
        return not self.head


def body_variables(body: Iterable[Atom]) -> Tuple[str, ...]:
    out = set()
    for _, x, y in body:
        out.update((x, y))
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# backtracking search
# ---------------------------------------------------------------------------


class _Target:
    def __init__(self, edges: Dict[str, Iterable[Tuple[str, str]]], domain: Iterable[str]):
        self.domain = tuple(sorted(set(domain)))
        self.edges = {lab: frozenset(pairs) for lab, pairs in edges.items()}
        self.out: Dict[Tuple[str, str], Set[str]] = defaultdict(set)
        self.inc: Dict[Tuple[str, str], Set[str]] = defaultdict(set)
        for lab, pairs in self.edges.items():
            for a, b in pairs:
                self.out[(lab, a)].add(b)
                self.inc[(lab, b)].add(a)


def _search(
    variables: Tuple[str, ...],
    atoms: Body,
    neqs: FrozenSet[FrozenSet[str]],
    target: _Target,
) -> Iterator[Assignment]:
    """All assignments of ``variables`` into ``target`` satisfying the body."""
    by_var: Dict[str, List[Atom]] = defaultdict(list)
    for atom in atoms:
        _, x, y = atom
        by_var[x].append(atom)
        if y != x:
            by_var[y].append(atom)
    neq_of: Dict[str, List[str]] = defaultdict(list)
    for pair in neqs:
        x, y = tuple(pair)
        neq_of[x].append(y)
        neq_of[y].append(x)
    for lab, _, _ in atoms:
        if lab not in target.edges:
            return

    assign: Assignment = {}

    def candidates(v: str) -> Iterable[str]:
        best: Optional[Set[str]] = None
        for lab, x, y in by_var[v]:
            if x == v and y == v:
                cand = {a for a, b in target.edges[lab] if a == b}
            elif x == v and y in assign:
                cand = target.inc[(lab, assign[y])]
            elif y == v and x in assign:
                cand = target.out[(lab, assign[x])]
            else:
                continue
            best = set(cand) if best is None else best & cand
            if not best:
                return ()
        if best is None:
            pool = set()
            for lab, x, y in by_var[v]:
                pool |= {a if x == v else b for a, b in target.edges[lab]}
            best = pool if by_var[v] else set(target.domain)
        return sorted(best)

    def ok(v: str, value: str) -> bool:
        for w in neq_of[v]:
            if assign.get(w) == value:
                return False
        for lab, x, y in by_var[v]:
            if x in assign and y in assign:
                if (assign[x], assign[y]) not in target.edges[lab]:
                    return False
        return True

    def pick() -> Optional[str]:
        # most-constrained first: most atoms touching assigned variables
        best, score = None, None
        for v in variables:
            if v in assign:
                continue
            linked = sum(1 for _, x, y in by_var[v] if x in assign or y in assign)
            key = (linked, len(by_var[v]), v)
            if score is None or key[:2] > score[:2]:
                best, score = v, key
        return best

    def go() -> Iterator[Assignment]:
        v = pick()
        if v is None:
            yield dict(assign)
            return
        for value in candidates(v):
            assign[v] = value
            if ok(v, value):
                yield from go()
            del assign[v]

    yield from go()


def match_cq(q: CQ, g: Graph) -> Set[Tuple[str, ...]]:
    """``{f(head) | f a matching of the body into g}``; ``{()}`` means true."""
    target = _Target(g.edges, g.nodes)
    return {tuple(f[v] for v in q.head) for f in _search(q.variables, q.atoms, q.neqs, target)}


def _body_target(body: Iterable[Atom]) -> _Target:
    edges: Dict[str, Set[Tuple[str, str]]] = defaultdict(set)
    for lab, x, y in body:
        edges[lab].add((x, y))
    return _Target(edges, body_variables(body))


def find_homomorphism(source: Iterable[Atom], target: Iterable[Atom]) -> Optional[Assignment]:
    """A variable map sending every atom of ``source`` to an atom of ``target``."""
    source = frozenset(source)
    for f in _search(body_variables(source), source, frozenset(), _body_target(target)):
        return f
    return None


def enumerate_homomorphisms(source: Iterable[Atom], target: Iterable[Atom]) -> List[Assignment]:
    source = frozenset(source)
    found = _search(body_variables(source), source, frozenset(), _body_target(target))
    return sorted(found, key=lambda f: sorted(f.items()))


def enumerate_endomorphisms(body: Iterable[Atom]) -> List[Assignment]:
    body = frozenset(body)
    return enumerate_homomorphisms(body, body)


def is_homomorphism(f: Assignment, source: Iterable[Atom], target: Iterable[Atom]) -> bool:
    target = frozenset(target)
    return all((lab, f[x], f[y]) in target for lab, x, y in source)


def compose_maps(f: Assignment, g: Assignment) -> Assignment:
    """``g`` after ``f``."""
    return {v: g[w] for v, w in f.items()}


def is_identity(f: Assignment) -> bool:
    return all(k == v for k, v in f.items())


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------


def _single_label(body: Iterable[Atom]) -> List[Tuple[str, str]]:
    body = list(body)
    labels = {lab for lab, _, _ in body}
    if len(labels) > 1:
        raise CQError(f"chain tests need a single-label body, got {sorted(labels)}")
    return [(x, y) for _, x, y in body]


def _components(edges: List[Tuple[str, str]]) -> List[Set[str]]:
    adj: Dict[str, Set[str]] = defaultdict(set)
    for x, y in edges:
        adj[x].add(y)
        adj[y].add(x)
    seen: Set[str] = set()
    out = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp, stack = set(), [start]
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(adj[v] - comp)
        seen |= comp
        out.append(comp)
    return out


def _edges_form_path(edges: List[Tuple[str, str]]) -> bool:
    if any(x == y for x, y in edges):
        return False
    undirected = {frozenset(e) for e in edges}
    if len(undirected) != len(edges):
        return False
    nodes = {v for e in edges for v in e}
    if len(undirected) != len(nodes) - 1:
        return False
    deg: Dict[str, int] = defaultdict(int)
    for e in undirected:
        for v in e:
            deg[v] += 1
    return max(deg.values(), default=0) <= 2 and len(_components(edges)) <= 1


def is_chain(body: Iterable[Atom]) -> bool:
    edges = _single_label(body)
    if not edges:
        return False
    return _edges_form_path(edges)


def is_disjoint_union_of_chains(body: Iterable[Atom]) -> bool:
    edges = _single_label(body)
    for comp in _components(edges):
        if not _edges_form_path([e for e in edges if e[0] in comp]):
            return False
    return True


def max_out_degree(body: Iterable[Atom]) -> int:
    deg: Dict[Tuple[str, str], int] = defaultdict(int)
    for lab, x, _ in set(body):
        deg[(lab, x)] += 1
    return max(deg.values(), default=0)


# ---------------------------------------------------------------------------
# expressions to CQs
# ---------------------------------------------------------------------------


def expr_to_cq(e: Expr) -> CQ:
    """Equivalent CQ ``(x, y) <- B`` for a union-free N(conv, di) expression."""
    extra = features_used(e) - {Feature.CONV, Feature.DI}
    if extra or contains_union(e):
        raise CQError("expr_to_cq needs a union-free expression over conv and di")
    e = push_converse_to_atoms(e)
    counter = itertools.count()
    parent: Dict[str, str] = {}
    atoms: List[Atom] = []
    neqs: List[Tuple[str, str]] = []

    def fresh() -> str:
        v = f"v{next(counter)}"
        parent[v] = v
        return v

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            # keep the older variable as representative
            if int(ra[1:]) < int(rb[1:]):
                parent[rb] = ra
            else:
                parent[ra] = rb

    def go(node: Expr, x: str, y: str) -> None:
        if isinstance(node, Label):
            atoms.append((node.name, x, y))
        elif isinstance(node, Converse):
            atoms.append((node.arg.name, y, x))
        elif isinstance(node, Id):
            union(x, y)
        elif isinstance(node, Di):
            neqs.append((x, y))
        elif isinstance(node, Empty):
            raise CQError("the empty expression has no CQ equivalent")
        elif isinstance(node, Compose):
            z = fresh()
            go(node.left, x, z)
            go(node.right, z, y)
        else:
            raise CQError(f"unsupported node {type(node).__name__}")

    x, y = fresh(), fresh()
    go(e, x, y)
    names: Dict[str, str] = {}
    inner = itertools.count()

    def name(v: str) -> str:
        r = find(v)
        if r not in names:
            names[r] = {find(x): "x", find(y): "y"}.get(r) or f"z{next(inner)}"
        return names[r]

    # x and y first so they keep their names when distinct
    name(x)
    name(y)
    head = (name(x), name(y))
    body = frozenset((lab, name(a), name(b)) for lab, a, b in atoms)
    pairs = set()
    for a, b in neqs:
        a, b = name(a), name(b)
        if a == b:
            raise CQError("unsatisfiable nonequality")
        pairs.add(frozenset((a, b)))
    return CQ(head, body, frozenset(pairs))


# ---------------------------------------------------------------------------
# B_ZZZ
# ---------------------------------------------------------------------------

ZZZ_ARMS = (4, 5, 6)


def bzzz_atoms(label: str = "R") -> Body:
    """Root ``a`` with one zigzag per arm length ``m``.

    Arm ``m``: ``a -> p1 -> ... -> pm``, ``v -> pm``, ``v -> q1 -> ... -> qm``.
    """
    atoms = set()
    for m in ZZZ_ARMS:
        p = ["a"] + [f"p{m}_{i}" for i in range(1, m + 1)]
        v = f"v{m}"
        q = [v] + [f"q{m}_{i}" for i in range(1, m + 1)]
        for i in range(m):
            atoms.add((label, p[i], p[i + 1]))
            atoms.add((label, q[i], q[i + 1]))
        atoms.add((label, v, p[m]))
    return frozenset(atoms)


def bzzz_graph(label: str = "R") -> Graph:
    return Graph({label: [(x, y) for _, x, y in bzzz_atoms(label)]})


def q_zzz() -> CQ:
    return CQ((), bzzz_atoms())


def _zig_conv(m: int) -> str:
    r = ".".join(["R"] * m)
    return f"pi1({r} . conv(R) . {r})"


def _zig_pi(m: int) -> str:
    r = ".".join(["R"] * m)
    return f"pi1({r} . pi2(pi1({r}) . R))"


def q_zzz_conv_expr() -> Expr:
    return parse(" . ".join(_zig_conv(m) for m in ZZZ_ARMS))


def q_zzz_pi_expr() -> Expr:
    return parse(" . ".join(_zig_pi(m) for m in ZZZ_ARMS))


_STEPS = (Label("R"), Converse(Label("R")), ID, DI)


def union_free_conv_di(max_length: int) -> Iterator[Expr]:
    """Compositions of R, conv(R), id, di of length 1..max_length.

    After pushing converse inward every union-free N(conv, di) expression
    over one label without ``0`` equals such a composition.
    """
    for n in range(1, max_length + 1):
        for steps in itertools.product(_STEPS, repeat=n):
            yield compose_all(steps)


@dataclass
class ZZZReport:
    query_true_via_pi: bool = False
    query_true_via_conv: bool = False
    query_true_via_cq: bool = False
    endomorphisms: List[Assignment] = field(default_factory=list)
    checked_expressions: int = 0
    nonempty_expressions: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def rigid(self) -> bool:
        return len(self.endomorphisms) == 1 and is_identity(self.endomorphisms[0])

    @property
    def ok(self) -> bool:
        return (
            self.query_true_via_pi
            and self.query_true_via_conv
            and self.query_true_via_cq
            and self.rigid
            and not self.failures
        )

    def lines(self) -> List[str]:
        mark = lambda b: "pass" if b else "FAIL"  # noqa: E731
        out = [
            f"(i) Q_ZZZ true on B_ZZZ: pi-form {mark(self.query_true_via_pi)}, "
            f"conv-form {mark(self.query_true_via_conv)}, cq {mark(self.query_true_via_cq)}",
            f"(ii) endomorphisms of B_ZZZ: {len(self.endomorphisms)} "
            f"{mark(self.rigid)}",
            f"(iii) {self.nonempty_expressions}/{self.checked_expressions} union-free "
            f"N(conv,di) expressions nonempty on B_ZZZ, none contained in Q_ZZZ "
            f"{mark(not self.failures)}",
        ]
        out.extend(f"  failure: {f}" for f in self.failures[:10])
        return out


def verify_zzz_separation(max_length: int = 6) -> ZZZReport:
    """Machine-check the ingredients of the Q_ZZZ non-expressibility argument."""
    rep = ZZZReport()
    body = bzzz_atoms()
    g = bzzz_graph()
    rep.query_true_via_pi = boolean(q_zzz_pi_expr(), g)
    rep.query_true_via_conv = boolean(q_zzz_conv_expr(), g)
    rep.query_true_via_cq = match_cq(q_zzz(), g) == {()}
    rep.endomorphisms = enumerate_endomorphisms(body)
    for e in union_free_conv_di(max_length):
        rep.checked_expressions += 1
        if not boolean(e, g):
            continue
        rep.nonempty_expressions += 1
        cq = expr_to_cq(e)
        rel = cq.atoms
        name = render(e)
        if rel and not is_disjoint_union_of_chains(rel):
            rep.failures.append(f"{name}: body is not a disjoint union of chains")
            continue
        if max_out_degree(rel) >= 3:
            rep.failures.append(f"{name}: body has a node with 3 outgoing edges")
            continue
        f = next(iter(_search(cq.variables, cq.atoms, cq.neqs, _Target(g.edges, g.nodes))), None)
        if f is None:
            rep.failures.append(f"{name}: nonempty on B_ZZZ but no matching found")
            continue
        h = find_homomorphism(body, rel)
        if h is not None:
            endo = compose_maps(h, f)
            detail = "identity" if is_identity(endo) else "non-identity endomorphism"
            rep.failures.append(f"{name}: B_ZZZ maps into the body ({detail})")
    return rep


# ---------------------------------------------------------------------------
# body file format
# ---------------------------------------------------------------------------


def load_cq(text: str) -> CQ:
    """``<label> <var> <var>``, ``neq <var> <var>``, ``head <var> ...`` lines."""
    head: Tuple[str, ...] = ()
    atoms, neqs = set(), set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "head":
            head = tuple(parts[1:])
        elif parts[0] == "neq":
            if len(parts) != 3 or parts[1] == parts[2]:
                raise CQFormatError("expected 'neq <var> <var>' with distinct vars", lineno)
            neqs.add(frozenset(parts[1:]))
        elif len(parts) == 3:
            atoms.add(tuple(parts))
        else:
            raise CQFormatError(f"cannot parse {line!r}", lineno)
    return CQ(head, frozenset(atoms), frozenset(neqs))


def render_cq(q: CQ) -> str:
    lines = []
    if q.head:
        lines.append("head " + " ".join(q.head))
    lines += [f"{lab} {x} {y}" for lab, x, y in sorted(q.atoms)]
    lines += ["neq " + " ".join(sorted(p)) for p in sorted(q.neqs, key=sorted)]
    return "\n".join(lines) + "\n"


def render_mapping(f: Assignment) -> str:
    return "".join(f"{k} -> {v}\n" for k, v in sorted(f.items()))
