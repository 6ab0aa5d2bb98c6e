"""Expression translations between fragments.

* :func:`eliminate_derivable` removes features derivable from the target
  through the five interdependency identities (path equivalence).
* :func:`eliminate_converse_boolean` removes converse from expressions without
  intersection and difference, at the price of projections.  The output is
  pointwise equal to ``pi1(e)``, hence boolean-equivalent to ``e``.
* :func:`push_converse_to_atoms`, :func:`hoist_unions`,
  :func:`desugar_path_equality` are the supporting normal forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Literal, Optional, Tuple

from .expr import (
    DI,
    EMPTY,
    ID,
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
    compose_all,
    factors,
    features_used,
    format_features,
    union_all,
)
from .lattice import closure_bar, closure_tilde

Mode = Literal["path", "bool"]


class RewriteError(ValueError):
    pass


class UnreachableTargetError(RewriteError):
    def __init__(self, missing: FeatureSet, target: FeatureSet):
        self.missing = missing
        self.target = target
        super().__init__(
            f"feature(s) {format_features(missing)} not derivable in "
            f"N({format_features(target)})"
        )


class PreconditionError(RewriteError):
    pass


@dataclass(frozen=True)
class RewriteTarget:
    target: FeatureSet
    mode: Mode = "path"


# ---------------------------------------------------------------------------
# interdependency elimination
# ---------------------------------------------------------------------------


def _proj_conv(e: Expr, side: int) -> Expr:
    # pi1(e) = (e . conv(e)) & id ; pi2(e) = (conv(e) . e) & id
    if side == 1:
        return Intersect(Compose(e, Converse(e)), ID)
    return Intersect(Compose(Converse(e), e), ID)


def _proj_di(e: Expr, side: int) -> Expr:
    # pi1(e) = (e . (id | di)) & id ; pi2(e) = ((id | di) . e) & id
    if side == 1:
        return Intersect(Compose(e, Union(ID, DI)), ID)
    return Intersect(Compose(Union(ID, DI), e), ID)


def _proj_copi(e: Expr, side: int) -> Expr:
    ctor = Coproj1 if side == 1 else Coproj2
    return ctor(ctor(e))


# (builder, features the expansion introduces) in tie-break priority order
_PROJ_RULES: Tuple[Tuple[Callable[[Expr, int], Expr], FeatureSet], ...] = (
    (_proj_conv, frozenset({Feature.CONV, Feature.CAP})),
    (_proj_di, frozenset({Feature.DI, Feature.CAP})),
    (_proj_copi, frozenset({Feature.COPI})),
)


class _Eliminator:
    def __init__(self, target: FeatureSet):
        self.target = frozenset(target)
        self.closure = closure_bar(self.target)
        self.proj_rule = self._choose_proj_rule()

    def _choose_proj_rule(self):
        if Feature.PI in self.target or Feature.PI not in self.closure:
            return None
        best = None
        for rank, (builder, needs) in enumerate(_PROJ_RULES):
            if builder is _proj_copi:
                # doubling coprojections only helps when copi is native,
                # otherwise copi itself would be expanded through pi again
                if Feature.COPI not in self.target:
                    continue
            elif not needs <= self.closure:
                continue
            cost = (len(needs - self.target), rank)
            if best is None or cost < best[0]:
                best = (cost, builder)
        return best[1] if best else None

    def rewrite(self, e: Expr) -> Expr:
        memo: Dict[Expr, Expr] = {}

        def go(node: Expr) -> Expr:
            hit = memo.get(node)
            if hit is not None:
                return hit
            out = self._node(node, go)
            memo[node] = out
            return out

        return go(e)

    def _node(self, e: Expr, go) -> Expr:
        t = self.target
        if isinstance(e, (Label, Empty, Id, Di)):
            return e
        if isinstance(e, Converse):
            return Converse(go(e.arg))
        if isinstance(e, (Compose, Union)):
            return type(e)(go(e.left), go(e.right))
        if isinstance(e, Diff):
            return Diff(go(e.left), go(e.right))
        if isinstance(e, Intersect):
            left, right = go(e.left), go(e.right)
            if Feature.CAP in t:
                return Intersect(left, right)
            # e1 & e2 = e1 - (e1 - e2)
            return Diff(left, Diff(left, right))
        if isinstance(e, (Proj1, Proj2)):
            side = 1 if isinstance(e, Proj1) else 2
            return self._proj(go(e.arg), side, go)
        if isinstance(e, (Coproj1, Coproj2)):
            side = 1 if isinstance(e, Coproj1) else 2
            arg = go(e.arg)
            if Feature.COPI in t:
                return type(e)(arg)
            # copi_i(e) = id - pi_i(e)
            return Diff(ID, self._proj(arg, side, go))
        raise TypeError(f"not an expression: {e!r}")

    def _proj(self, arg: Expr, side: int, go) -> Expr:
        if Feature.PI in self.target:
            return (Proj1 if side == 1 else Proj2)(arg)
        expansion = self.proj_rule(arg, side)
        if self.proj_rule is _proj_copi:
            return expansion
        # the expansion may itself contain an intersection to be rewritten
        if Feature.CAP in self.target:
            return expansion
        left = expansion.left
        return Diff(left, Diff(left, expansion.right))


def eliminate_derivable(e: Expr, target: RewriteTarget | FeatureSet) -> Expr:
    """Path-equivalent rewrite of ``e`` into ``N(target)``."""
    if isinstance(target, RewriteTarget):
        if target.mode != "path":
            raise PreconditionError("eliminate_derivable works in path mode only")
        target = target.target
    target = frozenset(target)
    missing = features_used(e) - closure_bar(target)
    if missing:
        raise UnreachableTargetError(missing, target)
    return _Eliminator(target).rewrite(e)


# ---------------------------------------------------------------------------
# converse pushing and union hoisting
# ---------------------------------------------------------------------------


def push_converse_to_atoms(e: Expr) -> Expr:
    """Equivalent expression in which converse only wraps labels."""
    memo: Dict[Tuple[Expr, bool], Expr] = {}

    def go(node: Expr, flip: bool) -> Expr:
        key = (node, flip)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Label):
            out = Converse(node) if flip else node
        elif isinstance(node, (Empty, Id, Di)):
            out = node
        elif isinstance(node, Converse):
            out = go(node.arg, not flip)
        elif isinstance(node, Compose):
            if flip:
                out = Compose(go(node.right, True), go(node.left, True))
            else:
                out = Compose(go(node.left, False), go(node.right, False))
        elif isinstance(node, (Union, Intersect, Diff)):
            out = type(node)(go(node.left, flip), go(node.right, flip))
        else:
            # (co)projections produce symmetric relations
            out = type(node)(go(node.arg, False))
        memo[key] = out
        return out

    return go(e, False)


def hoist_unions(e: Expr) -> List[Expr]:
    """Union-free expressions whose union is equivalent to ``e``.

    Valid for expressions without intersection, difference and coprojections.
    """
    bad = features_used(e) & {Feature.CAP, Feature.DIFF, Feature.COPI}
    if bad:
        raise PreconditionError(
            f"unions cannot be hoisted past {format_features(bad)}"
        )
    return _hoist(push_converse_to_atoms(e))


def _hoist(e: Expr) -> List[Expr]:
    if isinstance(e, Union):
        return _hoist(e.left) + _hoist(e.right)
    if isinstance(e, Compose):
        return [Compose(a, b) for a in _hoist(e.left) for b in _hoist(e.right)]
    if isinstance(e, (Proj1, Proj2)):
        return [type(e)(a) for a in _hoist(e.arg)]
    if isinstance(e, Converse):
        return [Converse(a) for a in _hoist(e.arg)]
    return [e]


# ---------------------------------------------------------------------------
# converse elimination for boolean queries
# ---------------------------------------------------------------------------


def _is_atom(e: Expr) -> bool:
    return isinstance(e, (Label, Id, Di, Empty)) or (
        isinstance(e, Converse) and isinstance(e.arg, Label)
    )


class _ConverseEliminator:
    """Simultaneous translation of pi_i(e) and copi_i(e), i = 1, 2.

    ``pi(i, e)`` returns a converse-free expression equal to ``pi_i(e)``,
    ``copi(i, e)`` one equal to ``copi_i(e)``.  Composition is split at the
    first non-composition factor (left for side 1, right for side 2) and
    dispatched on that factor's form.
    """

    def __init__(self):
        self._memo: Dict[Tuple[str, int, Expr], Expr] = {}

    def pi(self, i: int, e: Expr) -> Expr:
        return self._cached("pi", i, e, self._pi)

    def copi(self, i: int, e: Expr) -> Expr:
        return self._cached("copi", i, e, self._copi)

    def _cached(self, kind, i, e, fn):
        key = (kind, i, e)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo[key] = fn(i, e)
        return hit

    @staticmethod
    def _p(i: int):
        return Proj1 if i == 1 else Proj2

    @staticmethod
    def _cp(i: int):
        return Coproj1 if i == 1 else Coproj2

    def _absorb(self, i: int, inner: Expr) -> Expr:
        # pi_i(x . pi_i(y)) = pi_i(x . y): a same-side projection inside the
        # argument of the projection being built carries no information
        if isinstance(inner, self._p(i)):
            return inner.arg
        return inner

    def _split(self, i: int, e: Expr) -> Tuple[Expr, Expr]:
        fs = factors(e)
        if i == 1:
            return fs[0], compose_all(fs[1:])
        return fs[-1], compose_all(fs[:-1])

    def _pi(self, i: int, e: Expr) -> Expr:
        P = self._p(i)
        if isinstance(e, Union):
            return Union(self.pi(i, e.left), self.pi(i, e.right))
        if isinstance(e, (Proj1, Proj2)):
            return self.pi(1 if isinstance(e, Proj1) else 2, e.arg)
        if isinstance(e, (Coproj1, Coproj2)):
            return self.copi(1 if isinstance(e, Coproj1) else 2, e.arg)
        if isinstance(e, Converse):
            # converse only wraps labels here
            return self._p(3 - i)(e.arg)
        if not isinstance(e, Compose):
            return P(e)
        head, rest = self._split(i, e)
        j = 3 - i
        if isinstance(head, Id):
            return self.pi(i, rest)
        if isinstance(head, Empty):
            return EMPTY
        if isinstance(head, (Di, Label)):
            inner = self._absorb(i, self.pi(i, rest))
            return P(Compose(head, inner) if i == 1 else Compose(inner, head))
        if isinstance(head, Converse):
            label = head.arg
            inner = self.pi(i, rest)
            # pi1(conv R . e4) = pi2(pi1(e4) . R); pi2(e4 . conv R) = pi1(R . pi2(e4))
            if i == 1:
                return self._p(j)(Compose(inner, label))
            return self._p(j)(Compose(label, inner))
        if isinstance(head, (Proj1, Proj2, Coproj1, Coproj2)):
            k = 1 if isinstance(head, (Proj1, Coproj1)) else 2
            if isinstance(head, (Proj1, Proj2)):
                left = self.pi(k, head.arg)
            else:
                left = self.copi(k, head.arg)
            right = self.pi(i, rest)
            return Compose(left, right) if i == 1 else Compose(right, left)
        if isinstance(head, Union):
            parts = []
            for branch in (head.left, head.right):
                whole = Compose(branch, rest) if i == 1 else Compose(rest, branch)
                parts.append(self.pi(i, whole))
            return Union(*parts)
        raise PreconditionError(f"cannot eliminate converse through {type(head).__name__}")

    def _copi(self, i: int, e: Expr) -> Expr:
        CP = self._cp(i)
        if isinstance(e, Union):
            return Compose(self.copi(i, e.left), self.copi(i, e.right))
        if isinstance(e, (Proj1, Proj2)):
            return self.copi(1 if isinstance(e, Proj1) else 2, e.arg)
        if isinstance(e, (Coproj1, Coproj2)):
            return self.pi(1 if isinstance(e, Coproj1) else 2, e.arg)
        if isinstance(e, Converse):
            return self._cp(3 - i)(e.arg)
        if not isinstance(e, Compose):
            return CP(e)
        head, rest = self._split(i, e)
        j = 3 - i
        if isinstance(head, Id):
            return self.copi(i, rest)
        if isinstance(head, Empty):
            return ID
        if isinstance(head, (Di, Label)):
            inner = self._absorb(i, self.pi(i, rest))
            return CP(Compose(head, inner) if i == 1 else Compose(inner, head))
        if isinstance(head, Converse):
            label = head.arg
            inner = self.pi(i, rest)
            if i == 1:
                return self._cp(j)(Compose(inner, label))
            return self._cp(j)(Compose(label, inner))
        if isinstance(head, (Proj1, Proj2, Coproj1, Coproj2)):
            k = 1 if isinstance(head, (Proj1, Coproj1)) else 2
            if isinstance(head, (Proj1, Proj2)):
                left = self.copi(k, head.arg)
            else:
                left = self.pi(k, head.arg)
            return Union(left, self.copi(i, rest))
        if isinstance(head, Union):
            parts = []
            for branch in (head.left, head.right):
                whole = Compose(branch, rest) if i == 1 else Compose(rest, branch)
                parts.append(self.copi(i, whole))
            return Compose(*parts)
        raise PreconditionError(f"cannot eliminate converse through {type(head).__name__}")


def _left_assoc(e: Expr) -> Expr:
    """Re-associate every composition chain to the left."""
    memo: Dict[Expr, Expr] = {}

    def go(node: Expr) -> Expr:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if isinstance(node, Compose):
            out = compose_all(go(f) for f in factors(node))
        elif isinstance(node, (Union, Intersect, Diff)):
            out = type(node)(go(node.left), go(node.right))
        elif node.children():
            out = type(node)(go(node.arg))
        else:
            out = node
        memo[node] = out
        return out

    return go(e)


def eliminate_converse_boolean(e: Expr) -> Expr:
    """Converse-free expression equal to ``pi1(e)``.

    Requires ``e`` free of intersection and difference.  The result uses the
    features of ``e`` minus converse plus projection.
    """
    bad = features_used(e) & {Feature.CAP, Feature.DIFF}
    if bad:
        raise PreconditionError(
            f"converse elimination needs an expression without {format_features(bad)}"
        )
    pushed = push_converse_to_atoms(e)
    return _left_assoc(_ConverseEliminator().pi(1, pushed))


def translate_pi(e: Expr, side: int = 1) -> Expr:
    """Converse-free expression equal to ``pi_side(e)``."""
    if features_used(e) & {Feature.CAP, Feature.DIFF}:
        raise PreconditionError("converse elimination needs an expression without cap/diff")
    return _left_assoc(_ConverseEliminator().pi(side, push_converse_to_atoms(e)))


# ---------------------------------------------------------------------------
# path equality and top-level dispatch
# ---------------------------------------------------------------------------


def desugar_path_equality(e1: Expr, e2: Expr, target: FeatureSet) -> Expr:
    """The XPath-style test ``.[e1 = e2]`` in N(pi, cap) or N(conv, cap).

    The converse form is ``(e1 . conv(e2)) & id``: the node must reach a
    common endpoint through both paths, exactly as in ``pi1(e1 & e2)``.
    """
    target = frozenset(target)
    pi_form = Proj1(Intersect(e1, e2))
    if {Feature.PI, Feature.CAP} <= target:
        return pi_form
    if {Feature.CONV, Feature.CAP} <= target:
        return Intersect(Compose(e1, Converse(e2)), ID)
    bar = closure_bar(target)
    if {Feature.PI, Feature.CAP} <= bar:
        return eliminate_derivable(pi_form, target)
    raise UnreachableTargetError(frozenset({Feature.PI, Feature.CAP}) - bar, target)


def rewrite(e: Expr, target: FeatureSet, mode: Mode = "path") -> Expr:
    """Translate ``e`` into ``N(target)``, path- or boolean-equivalently."""
    target = frozenset(target)
    used = features_used(e)
    bar = closure_bar(target)
    if used <= bar:
        return eliminate_derivable(e, target)
    if mode != "bool":
        raise UnreachableTargetError(used - bar, target)
    # boolean collapse: conv is traded for pi when cap is not derivable
    if not closure_tilde(used) <= bar:
        raise UnreachableTargetError(closure_tilde(used) - bar, target)
    bare = eliminate_converse_boolean(eliminate_derivable(e, used))
    return eliminate_derivable(bare, target)


def simplify(e: Expr) -> Expr:
    """Conservative cleanup: unit and zero laws of composition and union."""
    if not e.children():
        return e
    if isinstance(e, Compose):
        left, right = simplify(e.left), simplify(e.right)
        if isinstance(left, Empty) or isinstance(right, Empty):
            return EMPTY
        if isinstance(left, Id):
            return right
        if isinstance(right, Id):
            return left
        return Compose(left, right)
    if isinstance(e, Union):
        left, right = simplify(e.left), simplify(e.right)
        if isinstance(left, Empty):
            return right
        if isinstance(right, Empty) or left == right:
            return left
        return Union(left, right)
    if isinstance(e, Converse):
        arg = simplify(e.arg)
        if isinstance(arg, Converse):
            return arg.arg
        if isinstance(arg, (Id, Di, Empty)):
            return arg
        return Converse(arg)
    if isinstance(e, (Intersect, Diff)):
        return type(e)(simplify(e.left), simplify(e.right))
    return type(e)(simplify(e.arg))
