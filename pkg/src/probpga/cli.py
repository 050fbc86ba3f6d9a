"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 parse or validation error,
3 when ``equiv`` finds the two programs not equivalent.
"""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import __version__
from .execution import default_registry, load_registry, render_counts, sample_many
from .meadow import format_rational
from .projection import (
    DEFAULT_PASSES, PASS_NAMES, PER_Q, SINGLE, ProjectionError, ProjectionOptions,
    build_random_assignment, count_choices, project_full,
)
from .semantics import (
    INFINITE, Environment, absorption, apply_environment, bisimilar_sequences, build_pts,
    expected_steps, load_environment, render_trace, trace_distribution,
)
from .syntax import (
    PROBABILISTIC, ParseError, PrChoice, Unit, contains, count_units, desugar_prchoice,
    eliminate_units, instructions, normalize, parse_file, render,
)
from .syntax.normal import InstructionSequence

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_DIFFERENT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a natural number")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="probpga", description="Probabilistic instruction sequences: parse, project, analyze, simulate.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="check a program and summarise it")
    p.add_argument("file")

    p = sub.add_parser("print", help="print a program in concrete syntax")
    p.add_argument("file")

    p = sub.add_parser("normalize", help="print the canonical prefix/period form")
    p.add_argument("file")

    p = sub.add_parser("project", help="project to deterministic service calls")
    p.add_argument("file")
    p.add_argument("--passes", default=",".join(DEFAULT_PASSES),
                   help=f"comma list from {','.join(PASS_NAMES)}")
    p.add_argument("--service-style", choices=(PER_Q, SINGLE), default=PER_Q)

    p = sub.add_parser("analyze", help="exact trace distribution and absorption")
    p.add_argument("file")
    p.add_argument("--env")
    p.add_argument("--depth", type=_nonneg, default=8)

    p = sub.add_parser("equiv", help="decide equivalence of two programs")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--mode", choices=("bisim", "trace"), default="bisim")
    p.add_argument("--env")
    p.add_argument("--depth", type=_nonneg, default=8)

    p = sub.add_parser("simulate", help="seeded runs against a service registry")
    p.add_argument("file")
    p.add_argument("--registry")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--runs", type=_positive, default=1)
    p.add_argument("--max-steps", type=_nonneg, default=10000)

    p = sub.add_parser("random-assign", help="print the random assignment program x := 1..k")
    p.add_argument("x")
    p.add_argument("k", type=_nonneg)
    return ap


def _sequence(path: str) -> InstructionSequence:
    t = parse_file(path)
    if contains(t, PrChoice):
        t = desugar_prchoice(t)
    if contains(t, Unit):
        t = eliminate_units(t)
    return normalize(t)


def _environment(path: Optional[str]) -> Environment:
    return load_environment(path) if path else Environment()


def _fmt(q) -> str:
    if q == INFINITE:
        return "infinite"
    return f"{format_rational(q)}  ({float(q):.6f})"


def _cmd_parse(args, out) -> int:
    t = parse_file(args.file)
    ins = list(instructions(t))
    prob = sum(isinstance(i, PROBABILISTIC) for i in ins)
    choices = count_choices(t)
    print(f"ok: {len(ins)} instructions, {prob} probabilistic, {count_units(t)} units, "
          f"{choices} choices", file=out)
    return EXIT_OK


def _cmd_print(args, out) -> int:
    print(render(parse_file(args.file)), file=out)
    return EXIT_OK


def _cmd_normalize(args, out) -> int:
    print(_sequence(args.file), file=out)
    return EXIT_OK


def _cmd_project(args, out) -> int:
    passes = tuple(p.strip() for p in args.passes.split(",") if p.strip())
    opts = ProjectionOptions(args.service_style, passes)
    result, reports = project_full(parse_file(args.file), opts)
    print(result, file=out)
    for r in reports:
        print(f"// {r}", file=out)
    return EXIT_OK


def _cmd_analyze(args, out) -> int:
    s = _sequence(args.file)
    env = _environment(args.env)
    dist = trace_distribution(build_pts(s), env, args.depth)
    for line in dist.lines():
        print(line, file=out)
    resolved = apply_environment(build_pts(s), env)
    a = absorption(resolved)
    print(f"terminated: {_fmt(a.terminated)}", file=out)
    print(f"inaction: {_fmt(a.inaction)}", file=out)
    print(f"divergence: {_fmt(a.divergence)}", file=out)
    print(f"expected steps: {_fmt(expected_steps(resolved))}", file=out)
    return EXIT_OK


def _cmd_equiv(args, out) -> int:
    s1, s2 = _sequence(args.file1), _sequence(args.file2)
    if args.mode == "bisim":
        env = load_environment(args.env) if args.env else None
        result = bisimilar_sequences(s1, s2, env)
        if result:
            print("bisimilar", file=out)
            return EXIT_OK
        print(f"not bisimilar: {result.witness}", file=out)
        return EXIT_DIFFERENT
    env = _environment(args.env)
    d1 = trace_distribution(build_pts(s1), env, args.depth)
    d2 = trace_distribution(build_pts(s2), env, args.depth)
    if d1 == d2:
        print(f"trace-equivalent up to depth {args.depth}", file=out)
        return EXIT_OK
    print(f"not trace-equivalent up to depth {args.depth}", file=out)
    keys = sorted(set(d1.entries) | set(d2.entries), key=lambda k: (len(k[0]), str(k)))
    for key in keys:
        a, b = d1.entries.get(key, 0), d2.entries.get(key, 0)
        if a != b:
            print(f"  {render_trace(*key)} : {format_rational(a)} vs {format_rational(b)}", file=out)
    return EXIT_DIFFERENT


def _cmd_simulate(args, out) -> int:
    s = _sequence(args.file)
    reg = load_registry(args.registry) if args.registry else default_registry()
    counts = sample_many(s, reg, args.seed, args.runs, args.max_steps)
    for line in render_counts(counts):
        print(line, file=out)
    return EXIT_OK


def _cmd_random_assign(args, out) -> int:
    print(render(build_random_assignment(args.x, args.k)), file=out)
    return EXIT_OK


COMMANDS = {
    "parse": _cmd_parse,
    "print": _cmd_print,
    "normalize": _cmd_normalize,
    "project": _cmd_project,
    "analyze": _cmd_analyze,
    "equiv": _cmd_equiv,
    "simulate": _cmd_simulate,
    "random-assign": _cmd_random_assign,
}


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except ParseError as exc:
        print(f"{_where(args)}:{exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"probpga: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ProjectionError, ValueError) as exc:
        print(f"probpga: {exc}", file=sys.stderr)
        return EXIT_INVALID


def _where(args) -> str:
    return getattr(args, "file", None) or getattr(args, "file1", "")


if __name__ == "__main__":
    sys.exit(main())
