"""Command-line driver.

    pulltab eval FILE [-e EXPR] [--strategy S] [--all | --first K] ...
    pulltab check FILE
    pulltab verify [--lemma NAME] [--cases N] [--seed S]

Exit codes: 0 success, 1 program error (or a failed verification),
2 budget exhausted with ``--all``, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .graph import GraphError, dot_export, parse_linear, print_linear
from .program import ProgramError, load_program, parse_expression
from .represented import represented_set
from .rewrite import format_trace, instantiate
from .strategies import KINDS, StrategyConfig, run
from .verify import SUITES, IdMonitor, run_suite

EXIT_OK, EXIT_PROGRAM, EXIT_EXHAUSTED, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pulltab", description="Evaluate LOIS programs by graph rewriting.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="compute the values of an expression")
    ev.add_argument("file")
    ev.add_argument("-e", "--expr", help="expression to evaluate (default: the rhs of main)")
    ev.add_argument("--linear", action="store_true", help="read --expr in linear graph notation")
    ev.add_argument("--strategy", choices=KINDS, default="pulltab")
    ev.add_argument("--max-steps", type=int, default=10000)
    many = ev.add_mutually_exclusive_group()
    many.add_argument("--all", action="store_true", help="require every value; exit 2 if the budget runs out")
    many.add_argument("--first", type=int, metavar="K", help="stop after K values")
    ev.add_argument("--unsound", action="store_true", help="pull-tab without the consistency ledger")
    ev.add_argument("--no-hnf-before-pull", action="store_true")
    ev.add_argument("--trace", action="store_true", help="print step traces on stderr")
    ev.add_argument("--stats", action="store_true", help="print key=value counters")
    ev.add_argument("--dot", metavar="FILE", help="write the start graph in DOT")
    ev.add_argument("--represented-set", action="store_true",
                    help="print the represented set of the start graph instead of evaluating")

    ck = sub.add_parser("check", help="parse a program and report LOIS violations")
    ck.add_argument("file")

    vf = sub.add_parser("verify", help="run the randomized property suites")
    vf.add_argument("--lemma", choices=SUITES, help="run one suite (default: all)")
    vf.add_argument("--cases", type=int)
    vf.add_argument("--seed", type=int, default=0)
    return p


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ProgramError(f"cannot read {path}: {exc.strerror}") from None


def _eval(args, out, err) -> int:
    if args.unsound and args.strategy != "pulltab":
        raise UsageError("--unsound requires --strategy pulltab")
    if args.linear and not args.expr:
        raise UsageError("--linear requires --expr")
    if args.max_steps < 0 or (args.first is not None and args.first < 1):
        raise UsageError("step and value limits must be positive")
    prog = load_program(_read(args.file))
    if args.expr is None:
        if prog.entry is None:
            raise ProgramError("no expression given and the program has no main")
        g = instantiate(prog.entry, {})
    elif args.linear:
        g = parse_linear(args.expr, signature=prog.signature)
    else:
        g = parse_expression(args.expr, prog)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot_export(g))
    if args.represented_set:
        for line in sorted(print_linear(e) for e in represented_set(g)):
            print(line, file=out)
        return EXIT_OK
    cfg = StrategyConfig(args.strategy, args.max_steps, args.first, not args.unsound,
                         not args.no_hnf_before_pull)
    res = run(prog, g, cfg)
    for v in res.values:
        print(print_linear(v), file=out)
    if args.stats:
        for k, v in res.stats.as_dict().items():
            print(f"{k}={v}", file=out)
    if args.trace:
        for i, t in enumerate(res.traces):
            print(f"# strand {i}", file=err)
            if t:
                print(format_trace(t), file=err)
    if res.exhausted:
        print(f"step budget of {args.max_steps} exhausted", file=err)
        if args.all:
            return EXIT_EXHAUSTED
    return EXIT_OK


def _check(args, out, err) -> int:
    try:
        prog = load_program(_read(args.file))
    except ProgramError as exc:
        for line, msg in exc.violations:
            print(f"{args.file}:{line}: {msg}" if line else f"{args.file}: {msg}", file=out)
        return EXIT_PROGRAM
    ops = [o for o in prog.operations if prog.is_operation(o)]
    rules = sum(len(prog.rules_for(o)) for o in ops)
    print(f"{args.file}: ok ({len(prog.constructors)} constructors, {len(ops)} operations, "
          f"{rules} rules)", file=out)
    return EXIT_OK


def _verify(args, out, err) -> int:
    if args.cases is not None and args.cases < 0:
        raise UsageError("--cases must be non-negative")
    monitor = IdMonitor()
    ok = True
    for name in [args.lemma] if args.lemma else SUITES:
        rep = run_suite(name, args.cases, args.seed, monitor)
        print(rep.summary(), file=out)
        ok = ok and rep.ok
    print(f"immutability: {monitor.states} states, {len(monitor.violations)} violations", file=out)
    ok = ok and not monitor.violations
    return EXIT_OK if ok else EXIT_PROGRAM


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return {"eval": _eval, "check": _check, "verify": _verify}[args.command](args, out, err)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except (ProgramError, GraphError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PROGRAM


if __name__ == "__main__":
    sys.exit(main())
