"""Set semantics of navigational expressions over finite graphs."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple

from .expr import (
    Compose,
    Converse,
    Coproj1,
    Coproj2,
    Di,
    Diff,
    Empty,
    Expr,
    Feature,
    FeatureSet,
    Id,
    Intersect,
    Label,
    Proj1,
    Proj2,
    Union,
    labels_used,
    operators_used,
)
from .graph import Graph, Relation


class EvaluationError(ValueError):
    pass


class UnknownLabelError(EvaluationError):
    pass


class OperatorNotAllowedError(EvaluationError):
    pass


@dataclass(frozen=True)
class OperatorProfile:
    """Which nonbasic operators an evaluation (or closure) may use.

    Unlike a :data:`FeatureSet`, the two projections and the two
    coprojections are separate flags here.
    """

    di: bool = False
    conv: bool = False
    cap: bool = False
    diff: bool = False
    pi1: bool = False
    pi2: bool = False
    copi1: bool = False
    copi2: bool = False

    @classmethod
    def full(cls) -> "OperatorProfile":
        return cls(*(True for _ in fields(cls)))

    @classmethod
    def from_features(cls, fs: Iterable[Feature]) -> "OperatorProfile":
        fs = frozenset(fs)
        return cls(
            di=Feature.DI in fs,
            conv=Feature.CONV in fs,
            cap=Feature.CAP in fs,
            diff=Feature.DIFF in fs,
            pi1=Feature.PI in fs,
            pi2=Feature.PI in fs,
            copi1=Feature.COPI in fs,
            copi2=Feature.COPI in fs,
        )

    @classmethod
    def parse(cls, text: str) -> "OperatorProfile":
        """Comma list of operator names; ``pi``/``copi`` enable both sides."""
        flags = {}
        for raw in text.replace(" ", ",").split(","):
            name = raw.strip().lower()
            if not name:
                continue
            if name in ("pi", "copi"):
                flags[name + "1"] = flags[name + "2"] = True
            elif name in {f.name for f in fields(cls)}:
                flags[name] = True
            elif name in ("int",):
                flags["cap"] = True
            elif name in ("-1",):
                flags["conv"] = True
            else:
                raise ValueError(f"unknown operator {raw!r}")
        return cls(**flags)

    def allowed(self) -> FrozenSet[str]:
        return frozenset(f.name for f in fields(self) if getattr(self, f.name))

    def features(self) -> FeatureSet:
        """Paired features fully enabled by this profile."""
        out = set()
        if self.di:
            out.add(Feature.DI)
        if self.conv:
            out.add(Feature.CONV)
        if self.cap:
            out.add(Feature.CAP)
        if self.diff:
            out.add(Feature.DIFF)
        if self.pi1 and self.pi2:
            out.add(Feature.PI)
        if self.copi1 and self.copi2:
            out.add(Feature.COPI)
        return frozenset(out)

    def __str__(self) -> str:
        return ",".join(sorted(self.allowed())) or "-"


@dataclass(frozen=True)
class EvalConfig:
    profile: OperatorProfile = OperatorProfile.full()
    vocabulary: Optional[FrozenSet[str]] = None

    def check(self, e: Expr, g: Graph) -> None:
        vocab = self.vocabulary if self.vocabulary is not None else frozenset(g.labels)
        missing = labels_used(e) - vocab
        if missing:
            raise UnknownLabelError(f"label(s) not in vocabulary: {', '.join(sorted(missing))}")
        missing = labels_used(e) - set(g.labels)
        if missing:
            raise UnknownLabelError(f"label(s) not in graph: {', '.join(sorted(missing))}")
        illegal = operators_used(e) - self.profile.allowed()
        if illegal:
            raise OperatorNotAllowedError(
                f"operator(s) outside profile: {', '.join(sorted(illegal))}"
            )


_DEFAULT = EvalConfig()


def evaluate(e: Expr, g: Graph, config: EvalConfig | None = None) -> Relation:
    """Evaluate ``e`` on ``g``; repeated subtrees are computed once."""
    (config or _DEFAULT).check(e, g)
    return Relation(g.size, _eval_bits(e, g, {}))


def evaluate_many(exprs: Iterable[Expr], g: Graph) -> Dict[Expr, Relation]:
    """Evaluate several expressions sharing one memo table (no legality checks)."""
    memo: Dict[Expr, int] = {}
    return {e: Relation(g.size, _eval_bits(e, g, memo)) for e in exprs}


def _eval_bits(e: Expr, g: Graph, memo: Dict[Expr, int]) -> int:
    hit = memo.get(e)
    if hit is not None:
        return hit
    ops = g.ops
    t = type(e)
    if t is Label:
        out = g.relation(e.name).bits
    elif t is Empty:
        out = 0
    elif t is Id:
        out = ops.identity
    elif t is Di:
        out = ops.diversity
    elif t is Compose:
        out = ops.compose(_eval_bits(e.left, g, memo), _eval_bits(e.right, g, memo))
    elif t is Union:
        out = _eval_bits(e.left, g, memo) | _eval_bits(e.right, g, memo)
    elif t is Intersect:
        out = _eval_bits(e.left, g, memo) & _eval_bits(e.right, g, memo)
    elif t is Diff:
        out = _eval_bits(e.left, g, memo) & ~_eval_bits(e.right, g, memo)
    elif t is Converse:
        out = ops.converse(_eval_bits(e.arg, g, memo))
    elif t is Proj1:
        out = ops.proj1(_eval_bits(e.arg, g, memo))
    elif t is Proj2:
        out = ops.proj2(_eval_bits(e.arg, g, memo))
    elif t is Coproj1:
        out = ops.coproj1(_eval_bits(e.arg, g, memo))
    elif t is Coproj2:
        out = ops.coproj2(_eval_bits(e.arg, g, memo))
    else:
        raise TypeError(f"not an expression: {e!r}")
    memo[e] = out
    return out


def boolean(e: Expr, g: Graph, config: EvalConfig | None = None) -> bool:
    """Nonemptiness of ``e`` on ``g``."""
    return not evaluate(e, g, config).is_empty()


def reference_evaluate(e: Expr, g: Graph, config: EvalConfig | None = None) -> Relation:
    """Naive set-comprehension semantics over node tokens.

    Shares nothing with :func:`evaluate` beyond the AST; used as a test oracle.
    """
    (config or _DEFAULT).check(e, g)
    pairs = _ref(e, g, frozenset(g.nodes))
    return g.encode(pairs)


def _ref(e: Expr, g: Graph, dom: FrozenSet[str]) -> Set[Tuple[str, str]]:
    if isinstance(e, Label):
        return set(g.edges[e.name])
    if isinstance(e, Empty):
        return set()
    if isinstance(e, Id):
        return {(m, m) for m in dom}
    if isinstance(e, Di):
        return {(m, n) for m in dom for n in dom if m != n}
    if isinstance(e, Compose):
        left = _ref(e.left, g, dom)
        right = _ref(e.right, g, dom)
        return {(m, n) for (m, p) in left for (q, n) in right if p == q}
    if isinstance(e, Union):
        return _ref(e.left, g, dom) | _ref(e.right, g, dom)
    if isinstance(e, Intersect):
        return _ref(e.left, g, dom) & _ref(e.right, g, dom)
    if isinstance(e, Diff):
        return _ref(e.left, g, dom) - _ref(e.right, g, dom)
    if isinstance(e, Converse):
        return {(n, m) for (m, n) in _ref(e.arg, g, dom)}
    inner = _ref(e.arg, g, dom)
    if isinstance(e, Proj1):
        return {(m, m) for m in dom if any(p == m for p, _ in inner)}
    if isinstance(e, Proj2):
        return {(m, m) for m in dom if any(q == m for _, q in inner)}
    if isinstance(e, Coproj1):
        return {(m, m) for m in dom if not any(p == m for p, _ in inner)}
    if isinstance(e, Coproj2):
        return {(m, m) for m in dom if not any(q == m for _, q in inner)}
    raise TypeError(f"not an expression: {e!r}")
