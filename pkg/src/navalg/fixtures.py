"""Named counterexample graphs and the separation battery built on them."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import cq
from .evaluator import OperatorProfile, boolean
from .expr import FeatureSet, parse, render
from .graph import Graph, converse_graph
from .lattice import ALL_FEATURE_SETS, leq_bool, leq_path
from .separation import (
    BudgetExceeded,
    brute_force_closure,
    check_nonexpressibility_condition,
    distinguishable,
)

Check = Callable[["Fixture"], Tuple[bool, str]]


class FixtureValidationError(RuntimeError):
    def __init__(self, fixture: str, prop: str, detail: str):
        self.fixture = fixture
        self.prop = prop
        super().__init__(f"fixture {fixture}: property '{prop}' failed ({detail})")


@dataclass(frozen=True)
class Property:
    name: str
    check: Check


@dataclass
class PropertyResult:
    name: str
    ok: bool
    detail: str
    millis: float


@dataclass
class Fixture:
    name: str
    graphs: Tuple[Graph, ...]
    properties: List[Property] = field(default_factory=list)
    provenance: str = "paper-described"
    description: str = ""

    @property
    def g1(self) -> Graph:
        return self.graphs[0]

    @property
    def g2(self) -> Graph:
        return self.graphs[-1]

    def validate(self) -> List[PropertyResult]:
        out = []
        for prop in self.properties:
            start = time.perf_counter()
            try:
                ok, detail = prop.check(self)
            except BudgetExceeded as exc:
                ok, detail = False, str(exc)
            out.append(PropertyResult(prop.name, ok, detail, (time.perf_counter() - start) * 1e3))
        return out

    def require_valid(self) -> "Fixture":
        for res in self.validate():
            if not res.ok:
                raise FixtureValidationError(self.name, res.name, res.detail)
        return self


# ---------------------------------------------------------------------------
# property builders
# ---------------------------------------------------------------------------


def separates(expr: str, g1_true: bool = False) -> Property:
    """``expr`` is nonempty on exactly one graph (on G1 when ``g1_true``)."""
    e = parse(expr)

    def check(fx: Fixture):
        b1, b2 = boolean(e, fx.g1), boolean(e, fx.g2)
        ok = b1 and not b2 if g1_true else b1 != b2
        return ok, f"{render(e)}: G1={b1}, G2={b2}"

    if g1_true:
        return Property(f"{expr} nonempty on G1 only", check)
    return Property(f"{expr} separates G1 and G2", check)


def indistinguishable_in(features: str, budget: int = 2_000_000) -> Property:
    profile = OperatorProfile.parse(features)

    def check(fx: Fixture):
        res = distinguishable(fx.g1, fx.g2, profile, budget=budget)
        detail = f"{res.pairs_explored} pairs"
        if res.witness is not None:
            detail += f", separated by {render(res.witness)}"
        return not res.distinguishable, detail

    return Property(f"indistinguishable in N({features or '-'})", check)


def distinguishable_in(features: str) -> Property:
    profile = OperatorProfile.parse(features)

    def check(fx: Fixture):
        res = distinguishable(fx.g1, fx.g2, profile)
        w = render(res.witness) if res.witness is not None else "-"
        return res.distinguishable, f"witness {w}"

    return Property(f"distinguishable in N({features})", check)


def never_true_only_on_g1(features: str) -> Property:
    """No expression is nonempty on G1 while empty on G2."""
    profile = OperatorProfile.parse(features)

    def check(fx: Fixture):
        res = brute_force_closure(fx.g1, fx.g2, profile)
        bad = [p for p in res.pairs if p[0] and not p[1]]
        return not bad, f"{len(res.pairs)} pairs, {len(bad)} true only on G1"

    return Property(f"no N({features}) query true on G1 and false on G2", check)


def structural(name: str, test: Callable[[Fixture], bool]) -> Property:
    return Property(name, lambda fx: (bool(test(fx)), ""))


def closure_count(features: str, count: int) -> Property:
    profile = OperatorProfile.parse(features)

    def check(fx: Fixture):
        g = fx.g1
        res = brute_force_closure(g, g, profile)
        conv = converse_graph(g).relation(g.labels[0]).bits
        found = len(res.pairs)
        absent = (conv, conv) not in set(res.pairs)
        return found == count and absent, f"{found} relations, converse absent={absent}"

    return Property(f"N({features}) closure has {count} relations, converse absent", check)


def bisim_condition() -> Property:
    def check(fx: Fixture):
        ok = check_nonexpressibility_condition(fx.g1, fx.g2)
        return ok, "every pair of G1 has a bisimilar pair in G2" if ok else "condition fails"

    return Property("bisimulation condition at fixpoint", check)


def brute_force_exhausts(features: str, budget: int) -> Property:
    profile = OperatorProfile.parse(features)

    def check(fx: Fixture):
        try:
            res = brute_force_closure(fx.g1, fx.g2, profile, budget=budget)
        except BudgetExceeded as exc:
            return True, str(exc)
        return False, f"closure finished with {len(res.pairs)} pairs"

    return Property(f"N({features}) brute force exceeds {budget} pairs", check)


# ---------------------------------------------------------------------------
# graph builders
# ---------------------------------------------------------------------------


def _g(edges: Iterable[Tuple[str, str]], label: str = "R") -> Graph:
    return Graph({label: list(edges)})


def _clique(nodes: str) -> List[Tuple[str, str]]:
    return [(a, b) for a in nodes for b in nodes]


# G1 of pair (c): x -> a -> b <- c -> y together with x -> y
_ZIG = (("x", "y"), ("x", "a"), ("a", "b"), ("c", "b"), ("c", "y"))


def _pattern(tag: str) -> List[Tuple[str, str]]:
    return [(u + tag, v + tag) for u, v in _ZIG]


def _double_cover() -> List[Tuple[str, str]]:
    # two layers of the pattern with the closing edge x -> y crossing layers
    out = []
    for i, j in (("0", "1"), ("1", "0")):
        out += [(u + i, v + (j if (u, v) == ("x", "y") else i)) for u, v in _ZIG]
    return out


PAIR_C_BUDGET = 20_000


def _loops() -> Fixture:
    return Fixture(
        "LOOPS",
        (_g([("a", "a"), ("b", "b")]), _g([("c", "c")])),
        [
            distinguishable_in("di"),
            separates("di"),
            indistinguishable_in(""),
            indistinguishable_in("conv,cap,pi,copi,diff"),
        ],
        description="two self-loops vs one self-loop",
    )


def _clique_bowtie() -> Fixture:
    return Fixture(
        "CLIQUE-BOWTIE",
        (_g(_clique("abc")), _g(_clique("abc") + _clique("cde"))),
        [
            separates("R.R - R"),
            indistinguishable_in("di,conv,cap,pi,copi"),
        ],
        description="3-clique vs bow-tie of two 3-cliques, self-loops everywhere",
    )


def _pair_a() -> Fixture:
    def disjoint_powers(fx: Fixture) -> bool:
        for g in fx.graphs:
            rels = [boolean_rel(g, p) for p in ("id", "R", "R.R")]
            if any(a & b for a, b in itertools.combinations(rels, 2)):
                return False
            if boolean(parse("R.R.R"), g):
                return False
        return True

    def acyclic_three(fx: Fixture) -> bool:
        return all(g.size >= 3 and _acyclic(g) for g in fx.graphs)

    return Fixture(
        "PAIR-A",
        (
            _g([("x", "y"), ("x", "p"), ("p", "q"), ("s", "t"), ("t", "y")]),
            _g([("u", "v"), ("x", "p"), ("p", "q"), ("s", "t"), ("t", "y")]),
        ),
        [
            structural("acyclic with at least three nodes", acyclic_three),
            structural("id, R, R^2 pairwise disjoint and R^3 empty", disjoint_powers),
            separates("pi1(R.R) . R . pi2(R.R)"),
            separates("R.R . conv(R) . R.R"),
            indistinguishable_in("diff"),
            indistinguishable_in("cap,diff"),
            indistinguishable_in("di"),
        ],
        provenance="search-derived",
        description="acyclic pair separating projection and converse from difference",
    )


def _pair_b() -> Fixture:
    return Fixture(
        "PAIR-B",
        (_g([("a", "b"), ("b", "a")]), _g([("a", "b"), ("b", "c"), ("c", "a")])),
        [
            structural(
                "paths of every length start and end in every node",
                lambda fx: all(_every_length(g) for g in fx.graphs),
            ),
            separates("R.R & id"),
            indistinguishable_in("di,conv,pi,copi"),
        ],
        provenance="search-derived",
        description="2-cycle vs 3-cycle",
    )


def _pair_c() -> Fixture:
    return Fixture(
        "PAIR-C",
        (_g(_pattern("p") + _pattern("q")), _g(_double_cover())),
        [
            separates("(R.R . conv(R) . R) & R", g1_true=True),
            bisim_condition(),
            brute_force_exhausts("di,diff", PAIR_C_BUDGET),
        ],
        provenance="construction-derived",
        description=(
            "two copies of the pattern x->a->b<-c->y, x->y vs its connected "
            "double cover with the x->y edge crossing layers"
        ),
    )


def _conv_128() -> Fixture:
    return Fixture(
        "CONV-128",
        (_g([("a", "b"), ("c", "d")]),),
        [closure_count("di,diff", 128)],
        provenance="search-derived",
        description="two disjoint R-edges",
    )


def _mono() -> Fixture:
    return Fixture(
        "MONO",
        (_g([("a", "b")]), _g([("a", "b"), ("b", "a")])),
        [
            structural("G1 is a subgraph of G2", lambda fx: fx.g1.is_subgraph_of(fx.g2)),
            separates("copi2(R)", g1_true=True),
            never_true_only_on_g1("di,conv,cap,pi"),
        ],
        provenance="construction-derived",
        description="edge vs 2-cycle over the same nodes; monotone queries cannot drop",
    )


def _bzzz() -> Fixture:
    return Fixture(
        "B_ZZZ",
        (cq.bzzz_graph(),),
        [
            structural("34 nodes, 33 edges", lambda fx: fx.g1.size == 34 and fx.g1.edge_count() == 33),
            structural("only the identity endomorphism", lambda fx: _rigid()),
            structural("Q_ZZZ pi-form true", lambda fx: boolean(cq.q_zzz_pi_expr(), fx.g1)),
            structural("Q_ZZZ conv-form true", lambda fx: boolean(cq.q_zzz_conv_expr(), fx.g1)),
        ],
        description="triple zigzag pattern rooted at a",
    )


def _chain_fig() -> Fixture:
    edges = [("1", "2"), ("2", "3"), ("4", "5"), ("4", "3"), ("6", "5"), ("7", "6")]
    return Fixture(
        "CHAIN-FIG1",
        (_g(edges),),
        [structural("is a chain", lambda fx: cq.is_chain(_atoms(fx.g1)))],
        description="seven-node chain with forward and backward edges",
    )


def _proj_remark() -> Fixture:
    g1 = Graph({"R": [("a", "b")], "S": [("c", "b")]})
    g2 = Graph({"R": [("a", "b")], "S": [("c", "d")]})
    return Fixture(
        "PROJ-REMARK",
        (g1, g2),
        [
            indistinguishable_in("pi1"),
            separates("R . conv(S)"),
        ],
        description="one-sided projection does not absorb converse",
    )


_BUILDERS = (
    _loops,
    _clique_bowtie,
    _pair_a,
    _pair_b,
    _pair_c,
    _conv_128,
    _mono,
    _bzzz,
    _chain_fig,
    _proj_remark,
)


def builtin_fixtures() -> List[Fixture]:
    return [build() for build in _BUILDERS]


def get_fixture(name: str) -> Fixture:
    for fx in builtin_fixtures():
        if fx.name.lower() == name.lower():
            return fx
    raise KeyError(name)


def boolean_rel(g: Graph, text: str) -> int:
    from .evaluator import evaluate

    return evaluate(parse(text), g).bits


def _acyclic(g: Graph) -> bool:
    from .evaluator import evaluate

    r = evaluate(parse("R"), g)
    power = r
    for _ in range(g.size):
        if power.bits & g.ops.identity:
            return False
        power = power.compose(r)
    return True


def _every_length(g: Graph) -> bool:
    # every node has an outgoing and an incoming edge, so walks never get stuck
    r = g.relation(g.labels[0])
    ops = g.ops
    return ops.proj1(r.bits) == ops.identity and ops.proj2(r.bits) == ops.identity


def _atoms(g: Graph) -> frozenset:
    return frozenset((lab, a, b) for lab in g.labels for a, b in g.edges[lab])


def _rigid() -> bool:
    endos = cq.enumerate_endomorphisms(cq.bzzz_atoms())
    return len(endos) == 1 and cq.is_identity(endos[0])


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


def _canonical(edges: Sequence[Tuple[int, int]], n: int) -> Tuple[Tuple[int, int], ...]:
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted((perm[a], perm[b]) for a, b in edges))
        if best is None or key < best:
            best = key
    return best


def enumerate_graphs(max_nodes: int, max_edges: int, min_edges: int = 1) -> Iterator[Graph]:
    """Single-label graphs up to isomorphism, by edge count then node count.

    Every node is in the active domain, so a graph on ``n`` nodes is listed
    only when its edges touch all ``n`` nodes.
    """
    for m in range(min_edges, max_edges + 1):
        for n in range(1, max_nodes + 1):
            seen = set()
            cells = [(a, b) for a in range(n) for b in range(n)]
            for edges in itertools.combinations(cells, m):
                if len({v for e in edges for v in e}) != n:
                    continue
                key = _canonical(edges, n)
                if key in seen:
                    continue
                seen.add(key)
                yield _g([(f"n{a}", f"n{b}") for a, b in key])


@dataclass(frozen=True)
class SearchSpace:
    max_nodes: int = 3
    max_edges: int = 3
    min_edges: int = 1
    pairs: bool = False
    random_samples: int = 0


def search_fixture(
    name: str,
    properties: Sequence[Property],
    space: SearchSpace,
    seed: int = 0,
) -> Optional[Fixture]:
    """First graph (pair) in enumeration order satisfying every property.

    The systematic pass is deterministic; ``random_samples`` extra random
    candidates drawn with ``seed`` follow when it finds nothing.
    """
    graphs = list(enumerate_graphs(space.max_nodes, space.max_edges, space.min_edges))
    if space.pairs:
        candidates: Iterable[Tuple[Graph, ...]] = (
            (a, b) for a, b in itertools.product(graphs, repeat=2)
        )
    else:
        candidates = ((g,) for g in graphs)

    def ok(gs: Tuple[Graph, ...]) -> bool:
        fx = Fixture(name, gs, list(properties), provenance="search-derived")
        return all(r.ok for r in fx.validate())

    for gs in candidates:
        if ok(gs):
            return Fixture(name, gs, list(properties), provenance="search-derived")
    rng = random.Random(seed)
    for _ in range(space.random_samples):
        gs = tuple(rng.choice(graphs) for _ in range(2 if space.pairs else 1))
        if ok(gs):
            return Fixture(name, gs, list(properties), provenance="search-derived")
    return None


def search_conv_128(seed: int = 0) -> Optional[Fixture]:
    return search_fixture(
        "CONV-128",
        [closure_count("di,diff", 128)],
        SearchSpace(max_nodes=4, max_edges=2, min_edges=2),
        seed,
    )


def search_pair_b(seed: int = 0) -> Optional[Fixture]:
    return search_fixture(
        "PAIR-B",
        [separates("R.R & id"), indistinguishable_in("di,conv,pi,copi")],
        SearchSpace(max_nodes=3, max_edges=3, pairs=True),
        seed,
    )


# ---------------------------------------------------------------------------
# separation battery
# ---------------------------------------------------------------------------


@dataclass
class SeparationResult:
    proposition: str
    fixture: str
    witness: str
    verdict: bool
    millis: float
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "proposition": self.proposition,
            "fixture": self.fixture,
            "witness": self.witness,
            "verdict": "pass" if self.verdict else "fail",
            "millis": round(self.millis, 1),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class Separation:
    """A fixture showing that some query over ``witness_features`` is not
    expressible over ``weak_features``."""

    proposition: str
    fixture: str
    witness: str
    checks: Tuple[str, ...]  # names of fixture properties that must hold
    witness_features: FeatureSet
    weak_features: FeatureSet
    level: str = "bool"


def _fs(text: str) -> FeatureSet:
    from .expr import parse_features

    return parse_features(text)


SEPARATIONS: Tuple[Separation, ...] = (
    Separation("path-bottom(1)", "LOOPS", "di", ("distinguishable in N(di)", "indistinguishable in N(conv,cap,pi,copi,diff)"), _fs("di"), _fs("conv,cap,pi,copi,diff")),
    Separation("path-bottom(2)", "MONO", "copi2(R)", ("copi2(R) nonempty on G1 only", "no N(di,conv,cap,pi) query true on G1 and false on G2"), _fs("copi"), _fs("di,conv,cap,pi")),
    Separation("path-bottom(3)", "CONV-128", "conv(R)", ("N(di,diff) closure has 128 relations, converse absent",), _fs("conv"), _fs("di,diff"), "path"),
    Separation("path-int(1)", "CLIQUE-BOWTIE", "R.R - R", ("R.R - R separates G1 and G2", "indistinguishable in N(di,conv,cap,pi,copi)"), _fs("diff"), _fs("di,conv,cap,pi,copi")),
    Separation("path-int(2)", "PAIR-A", "pi1(R.R) . R . pi2(R.R)", ("pi1(R.R) . R . pi2(R.R) separates G1 and G2", "indistinguishable in N(cap,diff)"), _fs("pi"), _fs("cap,diff")),
    Separation("path-cross-comp", "PAIR-B", "R.R & id", ("R.R & id separates G1 and G2", "indistinguishable in N(di,conv,pi,copi)"), _fs("cap"), _fs("di,conv,pi,copi")),
    Separation("conv-di", "PAIR-A", "R.R . conv(R) . R.R", ("R.R . conv(R) . R.R separates G1 and G2", "indistinguishable in N(di)"), _fs("conv"), _fs("di")),
    Separation("conv-cross", "PAIR-A", "R.R . conv(R) . R.R", ("R.R . conv(R) . R.R separates G1 and G2", "indistinguishable in N(diff)"), _fs("conv"), _fs("cap,diff")),
    Separation("bool-converse-cap", "PAIR-C", "(R.R . conv(R) . R) & R", ("(R.R . conv(R) . R) & R nonempty on G1 only", "bisimulation condition at fixpoint"), _fs("conv,cap"), _fs("di,diff")),
)


def _lattice_consistent(sep: Separation) -> Tuple[bool, int]:
    """Every (F1, F2) the fixture speaks about must be unordered in the lattice."""
    leq = leq_path if sep.level == "path" else leq_bool
    stronger = [f for f in ALL_FEATURE_SETS if leq(sep.witness_features, f)]
    weaker = [f for f in ALL_FEATURE_SETS if leq(f, sep.weak_features)]
    applied = 0
    for f1 in stronger:
        for f2 in weaker:
            applied += 1
            if leq(f1, f2):
                return False, applied
    return True, applied


def verify_separations(include_zzz: bool = True, zzz_length: int = 6) -> List[SeparationResult]:
    fixtures = {fx.name: fx for fx in builtin_fixtures()}
    cache: Dict[str, Dict[str, PropertyResult]] = {}
    out: List[SeparationResult] = []
    for sep in SEPARATIONS:
        start = time.perf_counter()
        if sep.fixture not in cache:
            cache[sep.fixture] = {r.name: r for r in fixtures[sep.fixture].validate()}
        results = cache[sep.fixture]
        failed = [c for c in sep.checks if c not in results or not results[c].ok]
        consistent, applied = _lattice_consistent(sep)
        ok = not failed and consistent
        detail = "; ".join(f"{c}: {results[c].detail}" for c in sep.checks if c in results)
        detail += f"; lattice cross-check over {applied} feature-set pairs " + (
            "consistent" if consistent else "CONTRADICTED"
        )
        if failed:
            detail = "failed: " + ", ".join(failed) + "; " + detail
        out.append(
            SeparationResult(sep.proposition, sep.fixture, sep.witness, ok,
                             (time.perf_counter() - start) * 1e3, detail)
        )
    if include_zzz:
        start = time.perf_counter()
        rep = cq.verify_zzz_separation(zzz_length)
        zsep = Separation("bottom-pi-tech", "B_ZZZ", render(cq.q_zzz_pi_expr()), (), _fs("pi"), _fs("conv,di"))
        consistent, applied = _lattice_consistent(zsep)
        out.append(
            SeparationResult(
                "bottom-pi-tech", "B_ZZZ", zsep.witness, rep.ok and consistent,
                (time.perf_counter() - start) * 1e3,
                " | ".join(rep.lines()) + f"; lattice cross-check over {applied} pairs",
            )
        )
    return out
