"""Command line interface.

Exit codes: 0 success, 1 invalid schedule, 2 precondition or document
error, 3 search cap exceeded. Env var `SCHED_LOG` sets the log level.
"""
import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from .documents import (
    parse_instance,
    parse_report,
    parse_schedule,
    serialize_instance,
    serialize_report,
    serialize_rtd,
)
from .errors import LimitExceededError
from .generate import generate_instance
from .model import format_fraction, to_fraction, validate
from .oracle import exact_solve
from .rtd import forkjoin_to_rtd
from .settings import GeneratorParams, parse_limit_overrides
from .solvers import ALGORITHMS, solve
from .version import __version__

log = logging.getLogger("fjsched")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PRECONDITION = 2
EXIT_LIMIT = 3

COMPARE_COLUMNS = (
    "instance",
    "algorithm",
    "makespan",
    "oracle",
    "gap",
    "certificate_honored",
    "ms",
)


def _configure_logging():
    name = os.environ.get("SCHED_LOG", "WARNING").strip().upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s")


def _write(text, output):
    if output:
        Path(output).write_text(text, encoding="utf-8")
        log.info(f"Written {output}")
    else:
        sys.stdout.write(text)


def _read_instance(path):
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _range(value):
    low, sep, high = value.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(
            f"Expected 'min:max', got '{value}'")
    return int(low), int(high)


def _speeds(value):
    return [int(item) for item in value.split(",") if item.strip()]


def _fraction(value):
    try:
        return to_fraction(value, "value")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _generate(args):
    params = GeneratorParams(
        n_tasks=args.n_tasks,
        n_procs=args.n_procs,
        speed_set=args.speeds,
        cost_mode=args.cost_mode,
        max_cost=args.max_cost,
        gamma_in_min=args.gamma_in[0],
        gamma_in_max=args.gamma_in[1],
        gamma_out_min=args.gamma_out[0],
        gamma_out_max=args.gamma_out[1],
        equal_gamma_in=args.equal_gamma_in,
        n_groups=args.groups,
        seed=args.seed,
    )
    _write(serialize_instance(generate_instance(params)), args.output)
    return EXIT_OK


def format_table(report):
    """Human readable summary of a report."""
    schedule = report.schedule
    guarantee = "-"
    if report.guarantee is not None:
        guarantee = report.guarantee.kind.value
        if report.guarantee.bound is not None:
            guarantee += f" {format_fraction(report.guarantee.bound)}"
    lines = [
        f"algorithm  {report.algorithm}",
        f"makespan   {format_fraction(report.makespan)}"
        f" ({float(report.makespan):.4f})",
        f"guarantee  {guarantee}",
        f"source     processor {schedule.m_src}",
        f"sink       processor {schedule.m_sink}"
        f" at {format_fraction(schedule.sink_start)}",
    ]
    for m, task_ids in enumerate(schedule.order):
        tasks = ", ".join(
            f"{task_id}@{format_fraction(schedule.start_times[task_id])}"
            for task_id in task_ids
        )
        lines.append(f"proc {m:<5} {tasks or '-'}")
    return "\n".join(lines) + "\n"


def _solve(args):
    instance = _read_instance(args.instance)
    limits = parse_limit_overrides(args.limits)
    started = time.perf_counter()
    report = solve(instance, args.algorithm, args.epsilon, limits)
    elapsed = (time.perf_counter() - started) * 1000
    wall_time = elapsed if args.timings else None
    if args.output:
        _write(serialize_report(report, instance, wall_time), args.output)
    sys.stdout.write(format_table(report))
    return EXIT_OK


def _read_schedule(text, instance):
    data = json.loads(text)
    if isinstance(data, dict) and "schedule" in data:
        return parse_report(text, instance).schedule
    return parse_schedule(text, instance)


def _validate(args):
    instance = _read_instance(args.instance)
    schedule = _read_schedule(
        Path(args.schedule).read_text(encoding="utf-8"), instance)
    violations = validate(instance, schedule)
    for violation in violations:
        task = f" [{violation.task}]" if violation.task else ""
        print(f"{violation.kind.value}{task}: {violation.message}")
    if violations:
        return EXIT_INVALID
    print("valid")
    return EXIT_OK


def _convert(args):
    instance = _read_instance(args.instance)
    rtd = forkjoin_to_rtd(instance, args.T, args.m_src, args.m_sink)
    _write(serialize_rtd(rtd), args.output)
    return EXIT_OK


def compare_instance(path, algorithms, epsilon, limits, use_oracle):
    """Rows of the comparison table for one instance file.

    Algorithms whose preconditions the instance does not meet, or that
    exceed a search cap, give a row with empty result fields.
    """
    instance = _read_instance(path)
    optimum = None
    if use_oracle:
        optimum = exact_solve(instance, limits).makespan

    rows = []
    for algorithm in algorithms:
        row = dict.fromkeys(COMPARE_COLUMNS, "")
        row["instance"] = Path(path).name
        row["algorithm"] = algorithm
        if optimum is not None:
            row["oracle"] = format_fraction(optimum)
        started = time.perf_counter()
        try:
            report = solve(instance, algorithm, epsilon, limits)
        except (ValueError, LimitExceededError) as exc:
            log.info(f"{row['instance']}: {algorithm} skipped, {exc}")
            rows.append(row)
            continue
        row["ms"] = f"{(time.perf_counter() - started) * 1000:.3f}"
        row["makespan"] = format_fraction(report.makespan)
        if optimum is not None:
            row["gap"] = format_fraction(report.makespan - optimum)
            if report.guarantee is not None:
                honored = report.guarantee.honored(report.makespan, optimum)
                row["certificate_honored"] = str(honored).lower()
        rows.append(row)
    return rows


def _compare(args):
    algorithms = args.algorithms or list(ALGORITHMS)
    unknown = [name for name in algorithms if name not in ALGORITHMS]
    if unknown:
        log.error(f"Unknown algorithms: {', '.join(unknown)}")
        return EXIT_PRECONDITION
    limits = parse_limit_overrides(args.limits)
    use_oracle = not args.no_oracle
    jobs = [
        (path, algorithms, args.epsilon, limits, use_oracle)
        for path in args.instances
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as executor:
            futures = [
                executor.submit(compare_instance, *job) for job in jobs]
            results = [future.result() for future in futures]
    else:
        results = [compare_instance(*job) for job in jobs]

    stream = io.StringIO()
    writer = csv.DictWriter(
        stream, fieldnames=COMPARE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rows in results:
        writer.writerows(rows)
    _write(stream.getvalue(), args.output)
    return EXIT_OK


def _add_limits(parser):
    parser.add_argument(
        "--limits",
        dest="limits",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a solver limit, can be repeated.",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fjsched",
        description="Fork-join scheduling on uniformly related processors.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    generate = subparsers.add_parser(
        "generate", help="Write a seeded random instance.")
    generate.add_argument("--seed", dest="seed", type=int, required=True)
    generate.add_argument("--tasks", dest="n_tasks", type=int, default=5)
    generate.add_argument("--procs", dest="n_procs", type=int, default=2)
    generate.add_argument(
        "--speeds",
        dest="speeds",
        type=_speeds,
        default=[1, 2, 3],
        help="Comma separated speeds to draw from.",
    )
    generate.add_argument(
        "--cost-mode",
        dest="cost_mode",
        choices=("equal", "random"),
        default="random",
    )
    generate.add_argument("--max-cost", dest="max_cost", type=int, default=6)
    generate.add_argument(
        "--gamma-in", dest="gamma_in", type=_range, default=(0, 6),
        metavar="MIN:MAX")
    generate.add_argument(
        "--gamma-out", dest="gamma_out", type=_range, default=(0, 6),
        metavar="MIN:MAX")
    generate.add_argument(
        "--equal-gamma-in",
        dest="equal_gamma_in",
        action="store_true",
        help="Give every task the same incoming communication.",
    )
    generate.add_argument(
        "--groups",
        dest="groups",
        type=int,
        default=None,
        help="Split the processors into communication groups.",
    )
    generate.add_argument("-o", "--output", dest="output", default=None)
    generate.set_defaults(handler=_generate)

    solve_parser = subparsers.add_parser(
        "solve", help="Solve an instance and print a summary.")
    solve_parser.add_argument("instance")
    solve_parser.add_argument(
        "--algorithm",
        dest="algorithm",
        choices=tuple(ALGORITHMS),
        default="oracle",
    )
    solve_parser.add_argument(
        "--epsilon", dest="epsilon", type=_fraction, default=None,
        help="Accuracy of the approximation scheme as 'a/b'.")
    solve_parser.add_argument(
        "--timings",
        dest="timings",
        action="store_true",
        help="Write the wall time into the report.",
    )
    _add_limits(solve_parser)
    solve_parser.add_argument(
        "-o", "--output", dest="output", default=None,
        help="Report file path.")
    solve_parser.set_defaults(handler=_solve)

    validate_parser = subparsers.add_parser(
        "validate", help="Check a schedule or report against an instance.")
    validate_parser.add_argument("instance")
    validate_parser.add_argument("schedule")
    validate_parser.set_defaults(handler=_validate)

    convert = subparsers.add_parser(
        "convert", help="Write the release/deadline form for a bound.")
    convert.add_argument("instance")
    convert.add_argument("--T", dest="T", type=_fraction, required=True)
    convert.add_argument("--m-src", dest="m_src", type=int, default=0)
    convert.add_argument("--m-sink", dest="m_sink", type=int, default=0)
    convert.add_argument("-o", "--output", dest="output", default=None)
    convert.set_defaults(handler=_convert)

    compare = subparsers.add_parser(
        "compare", help="Compare algorithms against the oracle as CSV.")
    compare.add_argument("instances", nargs="+")
    compare.add_argument(
        "--algorithm",
        dest="algorithms",
        action="append",
        default=[],
        help="Algorithm to include, can be repeated. Defaults to all.",
    )
    compare.add_argument(
        "--epsilon", dest="epsilon", type=_fraction, default=None)
    compare.add_argument(
        "--no-oracle",
        dest="no_oracle",
        action="store_true",
        help="Skip the oracle, leaving gap and certificate empty.",
    )
    compare.add_argument(
        "--jobs", dest="jobs", type=int, default=1,
        help="Instances solved in parallel.")
    _add_limits(compare)
    compare.add_argument("-o", "--output", dest="output", default=None)
    compare.set_defaults(handler=_compare)
    return parser


def main(argv: Optional[list] = None):
    """Run the command line interface.

    Returns:
        int: Process exit code.

    """
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except LimitExceededError as exc:
        log.error(str(exc))
        return EXIT_LIMIT
    except (ValueError, OSError) as exc:
        log.error(str(exc))
        return EXIT_PRECONDITION
