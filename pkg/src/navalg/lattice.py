"""Feature closures, the path/boolean expressiveness orders and their Hasse diagrams."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Dict, Iterable, List, Literal, Tuple

from .expr import FEATURE_ORDER, Feature, FeatureSet, format_features, sort_features

Order = Literal["path", "bool"]

DI, CONV, PI, COPI, CAP, DIFF = FEATURE_ORDER

ALL_FEATURE_SETS: Tuple[FeatureSet, ...] = tuple(
    frozenset(c)
    for k in range(len(FEATURE_ORDER) + 1)
    for c in itertools.combinations(FEATURE_ORDER, k)
)


def feature_key(fs: Iterable[Feature]) -> Tuple[int, Tuple[int, ...]]:
    """Total order on feature sets: by size, then lexicographically by feature order."""
    idx = tuple(sorted(FEATURE_ORDER.index(f) for f in fs))
    return (len(idx), idx)


def closure_rounds(fs: Iterable[Feature]) -> Tuple[FeatureSet, int]:
    """Closure under the five derivation rules plus the number of productive rounds."""
    out = set(fs)
    rounds = 0
    while True:
        new = set(out)
        if COPI in out:
            new.add(PI)
        if CAP in out and DI in out:
            new.add(PI)
        if CAP in out and CONV in out:
            new.add(PI)
        if DIFF in out and PI in out:
            new.add(COPI)
        if DIFF in out:
            new.add(CAP)
        if new == out:
            return frozenset(out), rounds
        out = new
        rounds += 1


def closure_bar(fs: Iterable[Feature]) -> FeatureSet:
    return closure_rounds(fs)[0]


def closure_tilde(fs: Iterable[Feature]) -> FeatureSet:
    """Trade converse for projection when intersection is not derivable."""
    fs = frozenset(fs)
    bar = closure_bar(fs)
    if CONV in bar and CAP not in bar:
        return (fs - {CONV}) | {PI}
    return fs


def leq_path(f1: Iterable[Feature], f2: Iterable[Feature]) -> bool:
    return frozenset(f1) <= closure_bar(f2)


def leq_bool(f1: Iterable[Feature], f2: Iterable[Feature]) -> bool:
    f1 = frozenset(f1)
    bar2 = closure_bar(f2)
    return f1 <= bar2 or closure_tilde(f1) <= bar2


def has_intersection(fs: Iterable[Feature]) -> bool:
    return CAP in closure_bar(fs)


_LEQ = {"path": leq_path, "bool": leq_bool}


@dataclass(frozen=True)
class LanguageClass:
    canonical: FeatureSet
    members: Tuple[FeatureSet, ...]
    boxed: FeatureSet

    @property
    def closure(self) -> FeatureSet:
        return closure_bar(self.canonical)

    @property
    def with_intersection(self) -> bool:
        return CAP in self.closure

    def name(self, symbols: bool = True) -> str:
        boxed = sort_features(self.boxed)
        rest = [f for f in sort_features(self.closure) if f not in self.boxed]
        sym = (lambda f: f.symbol) if symbols else (lambda f: f.value)
        parts = [sym(f) for f in boxed]
        text = ",".join(parts)
        inner = f"[{text}]" if parts else ""
        if rest:
            inner = f"{inner},{','.join(sym(f) for f in rest)}" if inner else ",".join(
                sym(f) for f in rest
            )
        return f"N({inner})" if inner else "N"

    def to_json(self) -> dict:
        return {
            "name": self.name(symbols=False),
            "canonical": [f.value for f in sort_features(self.canonical)],
            "closure": [f.value for f in sort_features(self.closure)],
            "boxed": [f.value for f in sort_features(self.boxed)],
            "members": [[f.value for f in sort_features(m)] for m in self.members],
        }


def _min_set(sets: Iterable[FeatureSet]) -> FeatureSet:
    return min(sets, key=feature_key)


def enumerate_language_classes(order: Order = "path") -> List[LanguageClass]:
    """Quotient of the 64 feature sets by mutual comparability under ``order``."""
    leq = _LEQ[order]
    groups: List[List[FeatureSet]] = []
    for fs in sorted(ALL_FEATURE_SETS, key=feature_key):
        for group in groups:
            rep = group[0]
            if leq(fs, rep) and leq(rep, fs):
                group.append(fs)
                break
        else:
            groups.append([fs])
    out = []
    for group in groups:
        members = tuple(sorted(group, key=feature_key))
        if order == "path":
            canonical = closure_bar(members[0])
        else:
            canonical = members[0]
        boxed = _boxed(members, order)
        out.append(LanguageClass(canonical, members, boxed))
    out.sort(key=lambda c: (c.with_intersection, feature_key(c.closure)))
    return out


def _boxed(members: Tuple[FeatureSet, ...], order: Order) -> FeatureSet:
    if order == "path":
        target = closure_bar(members[0])
        candidates = [fs for fs in ALL_FEATURE_SETS if closure_bar(fs) == target]
        return _min_set(candidates)
    return _min_set(members)


@dataclass(frozen=True)
class HasseDiagram:
    order: str
    nodes: Tuple[LanguageClass, ...]
    edges: Tuple[Tuple[int, int], ...]

    def leq(self, i: int, j: int) -> bool:
        return _LEQ[self.order](self.nodes[i].canonical, self.nodes[j].canonical)

    def class_of(self, fs: Iterable[Feature]) -> int:
        fs = frozenset(fs)
        for i, node in enumerate(self.nodes):
            if fs in node.members:
                return i
        raise KeyError(fs)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "nodes": [dict(id=i, **n.to_json()) for i, n in enumerate(self.nodes)],
            "edges": [list(e) for e in self.edges],
        }

    def to_dot(self) -> str:
        lines = [f'digraph "{self.order}" {{', "  rankdir=BT;"]
        for i, node in enumerate(self.nodes):
            lines.append(f'  n{i} [label="{node.name()}"];')
        for i, j in self.edges:
            lines.append(f"  n{i} -> n{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def dumps(self, fmt: str = "json") -> str:
        if fmt == "dot":
            return self.to_dot()
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"


def hasse(order: Order = "path") -> HasseDiagram:
    """Transitive reduction of the quotient order; edges point upward."""
    nodes = enumerate_language_classes(order)
    leq = _LEQ[order]
    n = len(nodes)
    below = [
        [i != j and leq(nodes[i].canonical, nodes[j].canonical) for j in range(n)]
        for i in range(n)
    ]
    edges = []
    for i in range(n):
        for j in range(n):
            if below[i][j] and not any(below[i][k] and below[k][j] for k in range(n)):
                edges.append((i, j))
    return HasseDiagram(order, tuple(nodes), tuple(edges))


def describe(fs: Iterable[Feature]) -> str:
    text = format_features(fs, symbols=True)
    return f"N({text})" if text else "N"
