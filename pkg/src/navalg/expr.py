"""Expressions of the navigational algebra: AST, parser, printer, metrics.

Grammar (loosest binding first, all binaries left-associative)::

    expr  := union
    union := diff ("|" diff)*
    diff  := inter ("-" inter)*
    inter := comp ("&" comp)*
    comp  := power ("." power)*
    power := atom ("^" INT)?
    atom  := "0" | "id" | "di" | LABEL
           | ("conv"|"pi1"|"pi2"|"copi1"|"copi2") "(" expr ")"
           | "(" expr ")"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterable, Iterator, List, Tuple


class Feature(str, Enum):
    DI = "di"
    CONV = "conv"
    PI = "pi"
    COPI = "copi"
    CAP = "cap"
    DIFF = "diff"

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]

    def __str__(self) -> str:
        return self.value


_SYMBOLS = {
    Feature.DI: "di",
    Feature.CONV: "⁻¹",
    Feature.PI: "π",
    Feature.COPI: "π̄",
    Feature.CAP: "∩",
    Feature.DIFF: "∖",
}

# fixed feature order used for canonical representatives and tie breaks
FEATURE_ORDER: Tuple[Feature, ...] = (
    Feature.DI,
    Feature.CONV,
    Feature.PI,
    Feature.COPI,
    Feature.CAP,
    Feature.DIFF,
)

FeatureSet = FrozenSet[Feature]

_FEATURE_ALIASES = {
    "di": Feature.DI,
    "conv": Feature.CONV,
    "-1": Feature.CONV,
    "pi": Feature.PI,
    "copi": Feature.COPI,
    "cap": Feature.CAP,
    "int": Feature.CAP,
    "diff": Feature.DIFF,
    "minus": Feature.DIFF,
}


def features(*names: str | Feature) -> FeatureSet:
    """``features("di", "conv")`` -> frozenset of :class:`Feature`."""
    out = set()
    for name in names:
        if isinstance(name, Feature):
            out.add(name)
            continue
        key = name.strip().lower()
        if key not in _FEATURE_ALIASES:
            raise ValueError(f"unknown feature {name!r}")
        out.add(_FEATURE_ALIASES[key])
    return frozenset(out)


def parse_features(text: str) -> FeatureSet:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    return features(*parts)


def sort_features(fs: Iterable[Feature]) -> Tuple[Feature, ...]:
    return tuple(sorted(fs, key=FEATURE_ORDER.index))


def format_features(fs: Iterable[Feature], symbols: bool = False) -> str:
    items = sort_features(fs)
    return ",".join(f.symbol if symbols else f.value for f in items)


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


class Expr:
    """Base class of expression nodes; hash is computed once at construction."""

    __slots__ = ()

    def _key(self) -> tuple:
        raise NotImplementedError

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((type(self).__name__,) + self._key()))

    def __hash__(self) -> int:
        return self._h

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or self._h != other._h:
            return False
        return self._key() == other._key()

    def __ne__(self, other: object) -> bool:
        return not self == other

    def children(self) -> Tuple["Expr", ...]:
        return ()

    def __str__(self) -> str:
        return render(self)

    # operator sugar, handy in tests and fixtures
    def __matmul__(self, other: "Expr") -> "Expr":
        return Compose(self, other)

    def __or__(self, other: "Expr") -> "Expr":
        return Union(self, other)

    def __and__(self, other: "Expr") -> "Expr":
        return Intersect(self, other)

    def __sub__(self, other: "Expr") -> "Expr":
        return Diff(self, other)


@dataclass(frozen=True, eq=False, repr=False)
class Label(Expr):
    name: str
    _h: int = 0

    def _key(self):
        return (self.name,)

    def __repr__(self):
        return f"Label({self.name!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Empty(Expr):
    _h: int = 0

    def _key(self):
        return ()

    def __repr__(self):
        return "Empty()"


@dataclass(frozen=True, eq=False, repr=False)
class Id(Expr):
    _h: int = 0

    def _key(self):
        return ()

    def __repr__(self):
        return "Id()"


@dataclass(frozen=True, eq=False, repr=False)
class Di(Expr):
    _h: int = 0

    def _key(self):
        return ()

    def __repr__(self):
        return "Di()"


@dataclass(frozen=True, eq=False, repr=False)
class _Binary(Expr):
    left: Expr
    right: Expr
    _h: int = 0

    def _key(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=False, repr=False)
class _Unary(Expr):
    arg: Expr
    _h: int = 0

    def _key(self):
        return (self.arg,)

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"{type(self).__name__}({self.arg!r})"


class Compose(_Binary):
    pass


class Union(_Binary):
    pass


class Intersect(_Binary):
    pass


class Diff(_Binary):
    pass


class Converse(_Unary):
    pass


class Proj1(_Unary):
    pass


class Proj2(_Unary):
    pass


class Coproj1(_Unary):
    pass


class Coproj2(_Unary):
    pass


EMPTY = Empty()
ID = Id()
DI = Di()

ATOMS = (Label, Empty, Id, Di)
BINARY = (Compose, Union, Intersect, Diff)
UNARY = (Converse, Proj1, Proj2, Coproj1, Coproj2)

_BIN_SYMBOL = {Compose: ".", Union: "|", Intersect: "&", Diff: "-"}
_UNARY_NAME = {
    Converse: "conv",
    Proj1: "pi1",
    Proj2: "pi2",
    Coproj1: "copi1",
    Coproj2: "copi2",
}
RESERVED = frozenset({"id", "di", "conv", "pi1", "pi2", "copi1", "copi2"})


def compose_all(factors: Iterable[Expr]) -> Expr:
    """Left-associated composition of a nonempty factor sequence."""
    it = iter(factors)
    try:
        out = next(it)
    except StopIteration:
        raise ValueError("compose_all needs at least one factor") from None
    for f in it:
        out = Compose(out, f)
    return out


def union_all(items: Iterable[Expr]) -> Expr:
    items = list(items)
    if not items:
        return EMPTY
    out = items[0]
    for e in items[1:]:
        out = Union(out, e)
    return out


def power(e: Expr, k: int) -> Expr:
    if k < 1:
        raise ValueError("power needs k >= 1")
    return compose_all([e] * k)


def factors(e: Expr) -> List[Expr]:
    """Flatten nested compositions into their non-composition factors."""
    out: List[Expr] = []
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Compose):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def walk(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------


def render(e: Expr) -> str:
    """Fully parenthesized canonical text; ``parse(render(e)) == e``."""
    if isinstance(e, Label):
        return e.name
    if isinstance(e, Empty):
        return "0"
    if isinstance(e, Id):
        return "id"
    if isinstance(e, Di):
        return "di"
    if isinstance(e, _Binary):
        return f"({render(e.left)} {_BIN_SYMBOL[type(e)]} {render(e.right)})"
    if isinstance(e, _Unary):
        return f"{_UNARY_NAME[type(e)]}({render(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


def pretty(e: Expr) -> str:
    """Render with minimal parentheses under the grammar's precedence."""
    return _pretty(e, 0)


_PREC = {Union: 1, Diff: 2, Intersect: 3, Compose: 4}


def _pretty(e: Expr, ctx: int) -> str:
    if isinstance(e, _Binary):
        p = _PREC[type(e)]
        text = f"{_pretty(e.left, p)} {_BIN_SYMBOL[type(e)]} {_pretty(e.right, p + 1)}"
        return f"({text})" if p < ctx else text
    if isinstance(e, _Unary):
        return f"{_UNARY_NAME[type(e)]}({_pretty(e.arg, 0)})"
    return render(e)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


_TOKEN = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>\d+)|(?P<sym>[.&|()^-]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        toks.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind not in ("sym",):
            raise ExprSyntaxError(f"expected {value!r}, got {val or 'end of input'!r}", pos)

    def _binary(self, sub, symbol: str, ctor):
        left = sub()
        while self.peek()[0] == "sym" and self.peek()[1] == symbol:
            self.take()
            left = ctor(left, sub())
        return left

    def union(self):
        return self._binary(self.diff, "|", Union)

    def diff(self):
        return self._binary(self.inter, "-", Diff)

    def inter(self):
        return self._binary(self.comp, "&", Intersect)

    def comp(self):
        return self._binary(self.power, ".", Compose)

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "sym":
            self.take()
            kind, val, pos = self.take()
            if kind != "int" or int(val) < 1:
                raise ExprSyntaxError("exponent must be a positive integer", pos)
            base = power(base, int(val))
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "int":
            if val != "0":
                raise ExprSyntaxError(f"unexpected number {val!r}", pos)
            return EMPTY
        if kind == "sym" and val == "(":
            inner = self.union()
            self.expect(")")
            return inner
        if kind == "name":
            if val == "id":
                return ID
            if val == "di":
                return DI
            for ctor, name in _UNARY_NAME.items():
                if val == name:
                    self.expect("(")
                    inner = self.union()
                    self.expect(")")
                    return ctor(inner)
            return Label(val)
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str) -> Expr:
    p = _Parser(text)
    e = p.union()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise ExprSyntaxError(f"trailing input {val!r}", pos)
    return e


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

_NODE_FEATURE = {
    Di: Feature.DI,
    Converse: Feature.CONV,
    Intersect: Feature.CAP,
    Diff: Feature.DIFF,
    Proj1: Feature.PI,
    Proj2: Feature.PI,
    Coproj1: Feature.COPI,
    Coproj2: Feature.COPI,
}


def features_used(e: Expr) -> FeatureSet:
    """Smallest feature set whose language syntactically contains ``e``."""
    return frozenset(
        _NODE_FEATURE[type(node)] for node in walk(e) if type(node) in _NODE_FEATURE
    )


def operators_used(e: Expr) -> FrozenSet[str]:
    """Nonbasic operator names, with one-sided (co)projections kept apart."""
    names = {
        Di: "di",
        Converse: "conv",
        Intersect: "cap",
        Diff: "diff",
        Proj1: "pi1",
        Proj2: "pi2",
        Coproj1: "copi1",
        Coproj2: "copi2",
    }
    return frozenset(names[type(n)] for n in walk(e) if type(n) in names)


def labels_used(e: Expr) -> FrozenSet[str]:
    return frozenset(n.name for n in walk(e) if isinstance(n, Label))


def size(e: Expr) -> int:
    """Number of nodes in the syntax tree."""
    return sum(1 for _ in walk(e))


_NESTING = (Compose, Proj1, Proj2, Coproj1, Coproj2)


def degree(e: Expr) -> int:
    """Maximum nesting depth of composition, projection and coprojection."""
    memo = {}

    def go(node: Expr) -> int:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        kids = node.children()
        d = max((go(c) for c in kids), default=0)
        if isinstance(node, _NESTING):
            d += 1
        memo[id(node)] = d
        return d

    return go(e)


def contains_converse(e: Expr) -> bool:
    return any(isinstance(n, Converse) for n in walk(e))


def contains_union(e: Expr) -> bool:
    return any(isinstance(n, Union) for n in walk(e))
