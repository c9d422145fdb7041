"""
Command-line front end.

    python -m qsetlab check MODEL
    python -m qsetlab audit MODEL [--space NAME] [--epsilon E] [--format text|json-lines]
    python -m qsetlab eprb --balls cx,cy,r ... --c C [--dim N] [--samples K] [--seed S]
    python -m qsetlab wff (--expr TEXT | --file PATH) [--sorts x:MICRO,y:MACRO]
    python -m qsetlab correlate --axis-a x,y,z --axis-b x,y,z [--samples N] [--seed S]

Exit status: 0 on success, 1 when the input is rejected (a violated axiom,
an ill-formed formula, a failed expectation), 2 for syntax, I/O and usage
errors.
"""
import argparse
import csv
import functools
import json
import logging
import sys
from itertools import zip_longest
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from dotenv import load_dotenv

from .core import Species, new_universe
from .eprb import Ball, RegionV, build_eprb, figure_rows, sample_region, to_quasi_metric_space
from .errors import (
    A2Violation,
    FormulaSyntaxError,
    IllFormedFormula,
    InvalidRegion,
    ModelSyntaxError,
    QuasiSetError,
)
from .formula import check_wff, parse, to_text
from .metric import audit_axioms
from .modelfile import dump_eprb, load_model, read_model
from .settings import reload_settings, settings
from .spinlab import OUTCOMES, Axis, correlation, empirical_correlation, joint_distribution, sample_outcomes

PROJECT_ROOT = Path(__file__).resolve().parent.parent

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_REJECTED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad command-line values that argparse cannot catch on its own."""


def exit_wrap(func):
    """Runs a command and maps what it raises onto an exit status."""
    @functools.wraps(func)
    def f(args: argparse.Namespace) -> int:
        try:
            return func(args)
        except (ModelSyntaxError, FormulaSyntaxError) as exc:
            print(f"syntax error: {exc.message}", file=sys.stderr)
            return EXIT_USAGE
        except (OSError, UsageError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except QuasiSetError as exc:
            logger.debug("%s rejected: %s", func.__name__, exc.code)
            print(f"error: {exc.message}", file=sys.stderr)
            return EXIT_REJECTED
    return f


def format_table(rows: Iterable[Iterable[object]]) -> str:
    """Outcome tables for ``correlate``: header, rule, then one line per row."""
    cells = [[str(value) for value in row] for row in rows]
    if not cells:
        return "(empty table)"
    header, *body = cells
    widths = [max(map(len, column)) for column in zip_longest(*cells, fillvalue="")]

    def line(row: List[str]) -> str:
        padded = (f"{cell:<{width}}" for cell, width in zip_longest(row, widths, fillvalue=""))
        return " | ".join(padded).rstrip()

    if not body:
        return line(header)
    return "\n".join([line(header), "-+-".join("-" * w for w in widths), *map(line, body)])


def _seed(args: argparse.Namespace) -> int:
    seed = settings.seed if args.seed is None else args.seed
    if seed < 0:
        raise UsageError(f"--seed must be non-negative, got {seed}")
    return seed


def _number(value: float) -> str:
    # round away float residue so that exact values print exactly
    return f"{round(value, 12) + 0.0:.12g}"


def _floats(text: str, what: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}") from None


def parse_balls(specs: Sequence[str], dimension: Optional[int]) -> List[Ball]:
    """``cx,...,r`` per ball; several balls may also be joined with ``;``."""
    balls = []
    for spec in specs:
        for part in filter(None, (p.strip() for p in spec.split(";"))):
            values = _floats(part, "ball")
            if len(values) < 2:
                raise UsageError(f"ball {part!r} needs a centre and a radius")
            if dimension is not None and len(values) != dimension + 1:
                raise UsageError(f"ball {part!r} needs {dimension} coordinates and a radius")
            try:
                balls.append(Ball(tuple(values[:-1]), values[-1]))
            except InvalidRegion as exc:
                raise UsageError(exc.message) from None
    if not balls:
        raise UsageError("at least one ball is required")
    return balls


def parse_sorts(text: Optional[str]) -> Dict[str, str]:
    ctx = {}
    for item in filter(None, (p.strip() for p in (text or "").split(","))):
        name, sep, sort = item.partition(":")
        sort = sort.strip().upper()
        if not sep or not name.strip() or sort not in ("MICRO", "MACRO", "QSET"):
            raise UsageError(f"sort binding {item!r} must be written name:MICRO|MACRO|QSET")
        ctx[name.strip()] = sort
    return ctx


def parse_axis(text: str) -> Axis:
    values = _floats(text, "axis")
    return Axis.normalized(values)


@exit_wrap
def cmd_check(args: argparse.Namespace) -> int:
    model = load_model(read_model(args.model), strict=True)
    for warning in model.warnings:
        print(f"warning: {warning}")
    print(
        f"{args.model}: OK ({len(model.entities)} entities, {len(model.space_names())} spaces, "
        f"{len(model.relations)} relations, {len(model.expectations)} expectations)"
    )
    return EXIT_OK


@exit_wrap
def cmd_audit(args: argparse.Namespace) -> int:
    model = load_model(read_model(args.model), strict=False)
    names = model.space_names()
    if args.space is not None:
        if args.space not in names:
            print(f"error: no space named {args.space!r} (have: {', '.join(names) or 'none'})",
                  file=sys.stderr)
            return EXIT_REJECTED
        names = [args.space]
    if not names:
        print(f"error: {args.model} declares no space", file=sys.stderr)
        return EXIT_REJECTED

    epsilon = settings.epsilon if args.epsilon is None else args.epsilon
    if not epsilon > 0:
        raise UsageError(f"epsilon must be positive, got {epsilon}")
    passed = True
    for name in names:
        report = audit_axioms(model.space(name), epsilon=epsilon, workers=args.workers)
        passed = passed and report.passed
        if args.format == "json-lines":
            for violation in report.violations:
                print(json.dumps({"space": name, **violation.to_record()}, sort_keys=True))
            for violation in report.congruence:
                print(json.dumps({"space": name, **violation.to_record()}, sort_keys=True))
            print(json.dumps({
                "space": name,
                "passed": report.passed,
                "axioms_verified": report.axioms_verified(),
                "failed_axioms": report.failed_axioms(),
                "points": report.carrier_size,
                "pairs": report.pairs_checked,
                "triples": report.triples_checked,
                "epsilon": report.epsilon,
            }, sort_keys=True))
        else:
            print(f"space {name}: {report.carrier_size} points, epsilon {report.epsilon:g}")
            print(f"  {report.summary()}")
            for violation in report.violations:
                print(f"  {violation}")
            if report.congruence:
                print(f"  {len(report.congruence)} congruence violations "
                      f"(d(x,y) differs from d(x',y') for x ~ x', y ~ y')")
    if args.format == "text":
        for warning in model.warnings:
            print(f"warning: {warning}")
    return EXIT_OK if passed else EXIT_REJECTED


@exit_wrap
def cmd_eprb(args: argparse.Namespace) -> int:
    balls = parse_balls(args.balls, args.dim)
    dimension = args.dim or balls[0].dimension
    seed = _seed(args)
    if args.samples < 0:
        raise UsageError(f"--samples must be non-negative, got {args.samples}")
    try:
        region = RegionV(dimension, tuple(balls))
        region = region.with_samples(sample_region(region.balls, args.samples, seed))
    except InvalidRegion as exc:
        raise UsageError(exc.message) from None

    universe = new_universe([Species(args.species)])
    try:
        space = build_eprb(universe, region, args.c, args.species)
    except A2Violation as exc:
        print(f"A2 violated: {exc.message}", file=sys.stderr)
        if exc.check is not None:
            print(f"minimal c = D/2 = {_number(exc.check.minimal_c)}")
        return EXIT_REJECTED

    report = audit_axioms(to_quasi_metric_space(space))
    sys.stdout.write(f"# audit: {report.summary()}\n")
    sys.stdout.write(dump_eprb(space, name=args.name))

    if args.emit_figure:
        with open(args.emit_figure, "w", newline="", encoding="utf-8") as handle:
            handle.write(f"# c={space.c!r} sup_diameter={space.check.sup_diameter!r}\n")
            writer = csv.writer(handle)
            writer.writerow([f"x{i}" for i in range(1, dimension + 1)] + ["ball"])
            writer.writerows(figure_rows(space))
        logger.info("figure data written to %s", args.emit_figure)
    return EXIT_OK if report.passed else EXIT_REJECTED


@exit_wrap
def cmd_wff(args: argparse.Namespace) -> int:
    if args.file:
        try:
            source = Path(args.file).read_text(encoding="utf-8").strip()
        except UnicodeDecodeError:
            raise UsageError(f"{args.file} is not valid UTF-8 text") from None
    else:
        source = args.expr
    formula = parse(source)
    result = check_wff(formula, parse_sorts(args.sorts))
    if result:
        print(f"WELL-FORMED: {to_text(formula)}")
        return EXIT_OK
    for diagnostic in result.diagnostics:
        print(f"NOT WELL-FORMED: {diagnostic}")
    raise IllFormedFormula(result.diagnostics)


@exit_wrap
def cmd_correlate(args: argparse.Namespace) -> int:
    a, b = parse_axis(args.axis_a), parse_axis(args.axis_b)
    distribution = joint_distribution(a, b)
    rows: List[List[object]] = [["outcome", "probability"]]
    rows.extend([f"({s1},{s2})", _number(distribution[(s1, s2)])] for s1, s2 in OUTCOMES)
    print(format_table(rows))
    print(f"E(a,b) = {_number(correlation(a, b))}")
    if args.samples is not None:
        seed = _seed(args)
        tally = sample_outcomes(a, b, args.samples, seed)
        rows = [["outcome", "count", "frequency"]]
        frequencies = tally.frequencies()
        rows.extend([f"({s1},{s2})", tally[(s1, s2)], _number(frequencies[(s1, s2)])]
                    for s1, s2 in OUTCOMES)
        print(format_table(rows))
        print(f"empirical E(a,b) = {_number(empirical_correlation(tally))} "
              f"({tally.total} pairs, seed {seed})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsetlab",
        description="Quasi-set kernel: model checking, quasi-metric audits, EPRB spaces.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="More log output (-v info, -vv debug).")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="Load and validate a model file.")
    check.add_argument("model", help="Path to the model file.")
    check.set_defaults(handler=cmd_check)

    audit = commands.add_parser("audit", help="Audit the quasi-metric axioms of the model's spaces.")
    audit.add_argument("model", help="Path to the model file.")
    audit.add_argument("--space", help="Audit only this space.")
    audit.add_argument("--epsilon", type=float, help="Numeric tolerance (default QSETLAB_EPSILON).")
    audit.add_argument("--format", choices=("text", "json-lines"), default="text")
    audit.add_argument("--workers", type=int, help="Threads for the triangle check.")
    audit.set_defaults(handler=cmd_audit)

    eprb = commands.add_parser("eprb", help="Build an EPRB space and print it as a model file.")
    eprb.add_argument("--balls", nargs="+", required=True, metavar="CX,...,R",
                      help="Ball centres and radii; several balls may be joined with ';'.")
    eprb.add_argument("--c", type=float, required=True, help="Atom-to-point distance.")
    eprb.add_argument("--dim", type=int, help="Dimension of R^n (default: from the first ball).")
    eprb.add_argument("--samples", type=int, default=20, help="Sample points drawn in V.")
    eprb.add_argument("--seed", type=int, help="Sampling seed (default QSETLAB_SEED).")
    eprb.add_argument("--species", default="electron", help="Species of the two m-atoms.")
    eprb.add_argument("--name", default="S", help="Space name in the emitted model.")
    eprb.add_argument("--emit-figure", metavar="PATH", help="Write sample points as CSV.")
    eprb.set_defaults(handler=cmd_eprb)

    wff = commands.add_parser("wff", help="Check a formula for well-formedness.")
    source = wff.add_mutually_exclusive_group(required=True)
    source.add_argument("--expr", help="Formula text.")
    source.add_argument("--file", help="File holding the formula.")
    wff.add_argument("--sorts", help="Sorts of free variables, e.g. x:MICRO,y:MACRO.")
    wff.set_defaults(handler=cmd_wff)

    correlate = commands.add_parser("correlate", help="Singlet joint distribution for two axes.")
    correlate.add_argument("--axis-a", required=True, help="Axis a as x,y,z (normalized).")
    correlate.add_argument("--axis-b", required=True, help="Axis b as x,y,z (normalized).")
    correlate.add_argument("--samples", type=int, help="Also draw this many simulated pairs.")
    correlate.add_argument("--seed", type=int, help="Sampling seed (default QSETLAB_SEED).")
    correlate.set_defaults(handler=cmd_correlate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv(PROJECT_ROOT / ".env")
    reload_settings()
    args = build_parser().parse_args(argv)
    level = settings.log_level if not args.verbose else ("INFO" if args.verbose == 1 else "DEBUG")
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
