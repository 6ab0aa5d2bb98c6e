"""Command-line entry point ``navalg``.

Exit codes: 0 success/true, 1 false/empty, 2 usage error or unreachable
target, 3 budget exceeded, 4 fixture validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import cq
from .evaluator import EvalConfig, EvaluationError, OperatorProfile, evaluate
from .expr import ExprSyntaxError, parse, parse_features, pretty, render
from .fixtures import builtin_fixtures, get_fixture, verify_separations
from .graph import GraphFormatError, GraphSchemaError, read_graph, render_graph, render_relation
from .lattice import hasse
from .rewriter import (
    RewriteError,
    UnreachableTargetError,
    rewrite,
    simplify,
)
from .separation import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    bisim_fixpoint,
    bisim_relation,
    check_nonexpressibility_condition,
    distinguishable,
)

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_BUDGET, EXIT_FIXTURE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _expr(text: str):
    try:
        return parse(text)
    except ExprSyntaxError as exc:
        raise UsageError(f"expression: {exc}") from exc


def _graph(path: str):
    try:
        return read_graph(path)
    except (OSError, GraphFormatError, GraphSchemaError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _profile(text: str) -> OperatorProfile:
    try:
        return OperatorProfile.parse(text or "")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_eval(args) -> int:
    g = _graph(args.graph)
    e = _expr(args.expr)
    config = EvalConfig(_profile(args.profile) if args.profile else OperatorProfile.full())
    try:
        rel = evaluate(e, g, config)
    except EvaluationError as exc:
        raise UsageError(str(exc)) from exc
    if args.boolean:
        print("true" if rel else "false")
    else:
        sys.stdout.write(render_relation(g, rel))
    return EXIT_OK if rel or not args.boolean else EXIT_FALSE


def cmd_rewrite(args) -> int:
    e = _expr(args.expr)
    try:
        target = parse_features(args.target)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        out = rewrite(e, target, args.mode)
    except UnreachableTargetError as exc:
        print(f"navalg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RewriteError as exc:
        raise UsageError(str(exc)) from exc
    if args.simplify:
        out = simplify(out)
    print(pretty(out) if args.pretty else render(out))
    return EXIT_OK


def cmd_distinguish(args) -> int:
    g1, g2 = _graph(args.g1), _graph(args.g2)
    profile = _profile(args.features)
    try:
        res = distinguishable(g1, g2, profile, budget=args.budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if res.distinguishable:
        print("distinguishable")
        if args.witness:
            print(render(res.witness))
        return EXIT_OK
    print(f"indistinguishable ({res.pairs_explored} pairs)")
    return EXIT_FALSE


def cmd_bisim(args) -> int:
    g1, g2 = _graph(args.g1), _graph(args.g2)
    try:
        rel = bisim_fixpoint(g1, g2) if args.depth is None else bisim_relation(g1, g2, args.depth)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ok = check_nonexpressibility_condition(g1, g2, args.depth)
    depth = "fixpoint" if args.depth is None else f"depth {args.depth}"
    print(f"condition {'holds' if ok else 'fails'} ({depth})")
    if args.relation:
        for quad in rel.quadruples():
            print(" ".join(quad))
    return EXIT_OK if ok else EXIT_FALSE


def cmd_hasse(args) -> int:
    sys.stdout.write(hasse(args.order).dumps(args.format))
    return EXIT_OK


def _read_body(path: str) -> cq.CQ:
    try:
        with open(path, encoding="utf-8") as fh:
            return cq.load_cq(fh.read())
    except (OSError, cq.CQError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def cmd_cq(args) -> int:
    if args.homomorphism:
        src, dst = (_read_body(p) for p in args.homomorphism)
        f = cq.find_homomorphism(src.atoms, dst.atoms)
        if f is None:
            print("no homomorphism")
            return EXIT_FALSE
        sys.stdout.write(cq.render_mapping(f))
        return EXIT_OK
    if args.endos:
        body = _read_body(args.endos)
        endos = cq.enumerate_endomorphisms(body.atoms)
        for i, f in enumerate(endos):
            tag = " (identity)" if cq.is_identity(f) else ""
            print(f"# endomorphism {i}{tag}")
            sys.stdout.write(cq.render_mapping(f))
        return EXIT_OK
    if args.match:
        body_path, graph_path = args.match
        q = _read_body(body_path)
        rows = cq.match_cq(q, _graph(graph_path))
        for row in sorted(rows):
            print(" ".join(row) if row else "true")
        return EXIT_OK if rows else EXIT_FALSE
    raise UsageError("cq needs --homomorphism, --endos or --match")


def cmd_verify_zzz(args) -> int:
    rep = cq.verify_zzz_separation(args.max_length)
    print("\n".join(rep.lines()))
    return EXIT_OK if rep.ok else EXIT_FIXTURE


def cmd_verify_separations(args) -> int:
    results = verify_separations(include_zzz=not args.skip_zzz)
    if args.json:
        print(json.dumps([r.to_json() for r in results], indent=2))
    else:
        for r in results:
            print(f"{'pass' if r.verdict else 'FAIL'}  {r.proposition:<20} {r.fixture:<14} "
                  f"{r.witness}  ({r.millis:.0f} ms)")
    return EXIT_OK if all(r.verdict for r in results) else EXIT_FIXTURE


def cmd_fixtures(args) -> int:
    if args.action == "list":
        for fx in builtin_fixtures():
            print(f"{fx.name:<14} {fx.provenance:<22} {fx.description}")
        return EXIT_OK
    if not args.name:
        raise UsageError(f"fixtures {args.action} needs a fixture name")
    try:
        fx = get_fixture(args.name)
    except KeyError:
        raise UsageError(f"unknown fixture {args.name!r}") from None
    if args.action == "dump":
        for i, g in enumerate(fx.graphs, start=1):
            if len(fx.graphs) > 1:
                print(f"# G{i}")
            sys.stdout.write(render_graph(g))
        return EXIT_OK
    failed = False
    for res in fx.validate():
        failed |= not res.ok
        print(f"{'pass' if res.ok else 'FAIL'}  {res.name}  {res.detail}")
    return EXIT_FIXTURE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="navalg", description="Navigational graph query algebra workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eval", help="evaluate an expression on a graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--expr", required=True)
    s.add_argument("--boolean", action="store_true", help="print true/false, exit 1 when empty")
    s.add_argument("--profile", help="allowed operators, e.g. 'di,conv,pi1'")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("rewrite", help="translate an expression into a fragment")
    s.add_argument("--expr", required=True)
    s.add_argument("--target", required=True, help="feature list, e.g. 'pi,di'")
    s.add_argument("--mode", choices=("path", "bool"), default="path")
    s.add_argument("--simplify", action="store_true")
    s.add_argument("--pretty", action="store_true", help="minimal parentheses")
    s.set_defaults(func=cmd_rewrite)

    s = sub.add_parser("distinguish", help="brute-force distinguishability")
    s.add_argument("--g1", required=True)
    s.add_argument("--g2", required=True)
    s.add_argument("--features", default="")
    s.add_argument("--witness", action="store_true")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_distinguish)

    s = sub.add_parser("bisim", help="bisimulation condition for N(diff, di)")
    s.add_argument("--g1", required=True)
    s.add_argument("--g2", required=True)
    s.add_argument("--depth", type=int)
    s.add_argument("--relation", action="store_true", help="print related quadruples")
    s.set_defaults(func=cmd_bisim)

    s = sub.add_parser("hasse", help="Hasse diagram of the expressiveness order")
    s.add_argument("--order", choices=("path", "bool"), default="path")
    s.add_argument("--format", choices=("json", "dot"), default="json")
    s.set_defaults(func=cmd_hasse)

    s = sub.add_parser("cq", help="conjunctive query tools")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--homomorphism", nargs=2, metavar=("FROM", "TO"))
    g.add_argument("--endos", metavar="BODY")
    g.add_argument("--match", nargs=2, metavar=("BODY", "GRAPH"))
    s.set_defaults(func=cmd_cq)

    s = sub.add_parser("verify-zzz", help="check the Q_ZZZ separation ingredients")
    s.add_argument("--max-length", type=int, default=6)
    s.set_defaults(func=cmd_verify_zzz)

    s = sub.add_parser("verify-separations", help="run the separation battery")
    s.add_argument("--json", action="store_true")
    s.add_argument("--skip-zzz", action="store_true")
    s.set_defaults(func=cmd_verify_separations)

    s = sub.add_parser("fixtures", help="list, dump or validate fixtures")
    s.add_argument("action", choices=("list", "dump", "validate"))
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_fixtures)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"navalg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"navalg: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
