"""Command-line frontend.

    paramon check SPEC... --trace FILE   run specs over a trace
    paramon synth SPEC                   inspect the compiled monitor
    paramon slice TRACE --theta ...      project a trace onto a binding
    paramon bench SPEC                   time the algorithms

SPEC is a file path, a directory of spec files, or the name of a bundled
catalog spec; set PARAMON_CATALOG to resolve names against another
directory. Exit status: 0 clean, 1 at least one report fired, 2 usage,
spec or trace problems.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .analysis import AnalysisError, dump_coenable_sets, dump_enable_sets
from .engine import (
    ALGORITHMS,
    CompiledSpec,
    Engine,
    EngineConfigError,
    compile_spec,
    normalize_algorithm,
)
from .logics import MonitorTemplate, SynthesisError, UNDETERMINED
from .logics.cfg import render_grammar
from .slicing import ObjectId, ParameterInstance, slice_trace
from .specs import Spec, SpecError, parse_spec, validate_spec
from .synthgen import synth_records
from .traceio import (
    ReadIssues,
    TraceError,
    TraceEvent,
    iter_trace,
    report_to_json,
    report_to_text,
    summary_to_json,
    summary_to_text,
)

CATALOG_ENV = "PARAMON_CATALOG"


class CliError(Exception):
    """User-facing problem; exits with status 2."""


# ---------------------------------------------------------------------------
# spec loading


def _catalog_text(name: str) -> str:
    override = os.environ.get(CATALOG_ENV)
    if override:
        path = Path(override) / f"{name}.json"
        if not path.is_file():
            raise CliError(f"no spec {name!r} in {CATALOG_ENV}={override}")
        return path.read_text(encoding="utf-8")
    entry = resources.files("paramon.catalog").joinpath(f"{name}.json")
    if not entry.is_file():
        raise CliError(f"no spec file or catalog entry named {name!r}")
    return entry.read_text(encoding="utf-8")


def _parse_and_check(text: str, name: str) -> Spec:
    try:
        spec = parse_spec(text, name=name)
    except SpecError as exc:
        raise CliError(f"spec {name!r}: {exc}") from exc
    errors = []
    for diag in validate_spec(spec):
        if diag.severity == "error":
            errors.append(diag.message)
        else:
            print(f"paramon: spec {name!r}: {diag}", file=sys.stderr)
    if errors:
        raise CliError(
            f"spec {name!r} failed validation:\n  " + "\n  ".join(errors)
        )
    return spec


def load_specs(selectors: Iterable[str]) -> list[Spec]:
    specs: list[Spec] = []
    for sel in selectors:
        path = Path(sel)
        if path.is_dir():
            entries = sorted(path.glob("*.json"))
            if not entries:
                raise CliError(f"directory {sel} holds no spec files")
            for entry in entries:
                specs.append(
                    _parse_and_check(entry.read_text(encoding="utf-8"), entry.stem)
                )
        elif path.is_file() or sel.endswith(".json"):
            if not path.is_file():
                raise CliError(f"spec file {sel} does not exist")
            specs.append(_parse_and_check(path.read_text(encoding="utf-8"), path.stem))
        else:
            specs.append(_parse_and_check(_catalog_text(sel), sel))
    return specs


def compile_specs(specs: Iterable[Spec]) -> list[CompiledSpec]:
    out = []
    for spec in specs:
        try:
            out.append(compile_spec(spec))
        except (SynthesisError, SpecError) as exc:
            raise CliError(f"spec {spec.name!r}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# shared bits


def _open_trace(path: str):
    if path == "-":
        return sys.stdin
    if not Path(path).is_file():
        raise CliError(f"trace file {path} does not exist")
    return path


def _note_issues(issues: ReadIssues) -> None:
    if not issues.skipped:
        return
    print(f"paramon: skipped {issues.skipped} malformed trace line(s)", file=sys.stderr)
    for sample in issues.samples[:3]:
        print(f"paramon:   {sample}", file=sys.stderr)


def _parse_theta(literal: str) -> ParameterInstance:
    pairs = {}
    for chunk in literal.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, eq, obj = chunk.partition("=")
        tag, hash_, token = obj.partition("#")
        if not eq or not hash_ or not name.strip() or not tag or not token:
            raise CliError(
                f"bad binding {chunk!r}; expected name=type#token, e.g. f=file#7"
            )
        pairs[name.strip()] = ObjectId(tag, token)
    if not pairs:
        raise CliError("empty binding; expected name=type#token pairs")
    return ParameterInstance(pairs)


# ---------------------------------------------------------------------------
# check


def cmd_check(args: argparse.Namespace) -> int:
    algorithm = normalize_algorithm(args.algo)
    if algorithm == "A" and args.trace == "-":
        raise CliError("algorithm A is offline and cannot read a stream; give a file")
    compiled = compile_specs(load_specs(args.specs))
    issues = ReadIssues()
    source = _open_trace(args.trace)
    start = time.perf_counter()
    try:
        engine = Engine(
            compiled, algorithm=algorithm, gc=args.gc, max_slice=args.max_slice
        )
        result = engine.run(iter_trace(source, issues))
    except (TraceError, EngineConfigError) as exc:
        raise CliError(str(exc)) from exc
    wall = time.perf_counter() - start

    out = sys.stdout
    for report in result.reports:
        if args.format == "machine":
            out.write(report_to_json(report))
        else:
            print(report_to_text(report), file=out)
    summary = {
        "reports": len(result.reports),
        "events": result.stats.events_seen,
        "monitors_created": result.stats.created_total(),
        "monitors_collected": result.stats.monitors_collected,
        "wall_s": round(wall, 6),
    }
    if args.format == "machine":
        out.write(summary_to_json(summary))
    else:
        print(summary_to_text(summary), file=out)
    _note_issues(issues)
    if args.stats:
        _print_stats(result.stats, args.gc)
    for failure in result.failures:
        print(
            f"paramon: spec {failure.spec!r} aborted at seq {failure.seq}: "
            f"{failure.message}",
            file=sys.stderr,
        )
    if result.failures:
        return 2
    return 1 if result.fired else 0


def _print_stats(stats, gc: bool) -> None:
    err = sys.stderr
    print(f"events seen:        {stats.events_seen}", file=err)
    print(f"events dispatched:  {stats.events_dispatched}", file=err)
    print(f"deaths seen:        {stats.deaths_seen}", file=err)
    print(f"monitors created:   {stats.created_total()}", file=err)
    if gc:
        print(f"monitors collected: {stats.monitors_collected}", file=err)
    print(f"peak live monitors: {stats.peak_live_monitors}", file=err)
    print(f"bindings scanned:   {stats.bindings_scanned}", file=err)
    print(f"monitor visits:     {stats.monitor_visits}", file=err)


# ---------------------------------------------------------------------------
# synth


def render_template(compiled: CompiledSpec) -> str:
    stepper = compiled.stepper
    spec = compiled.spec
    lines = [f"spec: {spec.name}", f"formalism: {spec.formalism}"]
    if not isinstance(stepper, MonitorTemplate):
        lines.append(f"alphabet: {' '.join(sorted(stepper.alphabet))}")
        lines.append("states: unbounded (grammar derivatives)")
        lines.append(f"initial: {render_grammar(stepper.initial())}")
        return "\n".join(lines) + "\n"
    events = stepper.sorted_events()
    lines.append(f"alphabet: {' '.join(events)}")
    lines.append(f"states: {len(stepper.states)}")
    lines.append(f"initial: {stepper.initial_state}")
    for state in stepper.states:
        verdict = stepper.verdicts[state]
        suffix = f" [{verdict}]" if verdict != UNDETERMINED else ""
        lines.append(f"state {state}{suffix}:")
        for ev in events:
            lines.append(f"  {ev} -> {stepper.transitions[(state, ev)]}")
    return "\n".join(lines) + "\n"


def cmd_synth(args: argparse.Namespace) -> int:
    specs = load_specs([args.spec])
    if len(specs) != 1:
        raise CliError("synth inspects a single spec, not a directory")
    compiled = compile_specs(specs)[0]
    wrote = False
    if args.template or not args.dump_enable:
        sys.stdout.write(render_template(compiled))
        wrote = True
    if args.dump_enable:
        try:
            enable_text = dump_enable_sets(compiled.enable_sets())
        except AnalysisError as exc:
            raise CliError(str(exc)) from exc
        try:
            co_text = dump_coenable_sets(compiled.coenable_sets())
        except EngineConfigError:
            co_text = "(not defined: needs a finite-state formula)\n"
        if wrote:
            print()
        print("enable sets:")
        sys.stdout.write(enable_text)
        print("coenable sets:")
        sys.stdout.write(co_text)
    return 0


# ---------------------------------------------------------------------------
# slice


def cmd_slice(args: argparse.Namespace) -> int:
    theta = _parse_theta(args.theta)
    issues = ReadIssues()
    source = _open_trace(args.trace)
    try:
        events = [
            r.to_parametric()
            for r in iter_trace(source, issues)
            if isinstance(r, TraceEvent)
        ]
    except TraceError as exc:
        raise CliError(str(exc)) from exc
    _note_issues(issues)
    print(" ".join(slice_trace(events, theta)))
    return 0


# ---------------------------------------------------------------------------
# bench


def _load_records(args, specs: list[Spec]) -> tuple[list, str]:
    if args.trace:
        issues = ReadIssues()
        source = _open_trace(args.trace)
        try:
            records = list(iter_trace(source, issues))
        except TraceError as exc:
            raise CliError(str(exc)) from exc
        _note_issues(issues)
        return records, f"trace {args.trace}"
    records = list(
        synth_records(
            specs[0],
            args.events,
            args.instances,
            args.seed,
            deaths=args.deaths,
        )
    )
    label = (
        f"generated: {args.events} events, {args.instances} instances, "
        f"seed {args.seed}"
    )
    return records, label


def _timed_runs(reps: int, make_run) -> tuple[float, object]:
    walls = []
    last = None
    for _ in range(reps):
        start = time.perf_counter()
        last = make_run()
        walls.append(time.perf_counter() - start)
    return statistics.median(walls), last


def cmd_bench(args: argparse.Namespace) -> int:
    if args.events < 1 or args.instances < 1 or args.reps < 1:
        raise CliError("events, instances and reps must be positive")
    algos = []
    for name in args.algos.split(","):
        if name.strip():
            algos.append(normalize_algorithm(name))
    if not algos:
        raise CliError("no algorithms selected")
    specs = load_specs(args.specs)
    compiled = compile_specs(specs)
    records, source_label = _load_records(args, specs)
    n_events = sum(1 for r in records if isinstance(r, TraceEvent))

    print(f"source: {source_label}")
    print(f"records: {len(records)} ({n_events} events), reps: {args.reps}")
    header = (
        f"{'algo':<9} {'wall_s':>9} {'events/s':>12} {'reports':>8} "
        f"{'created':>9} {'peak':>7} {'collected':>10}"
    )
    print(header)

    def consume():
        count = 0
        for _ in records:
            count += 1
        return count

    wall, _ = _timed_runs(args.reps, consume)
    rate = f"{n_events / wall:,.0f}" if wall > 0 else "inf"
    print(f"{'(iterate)':<9} {wall:>9.3f} {rate:>12} {'-':>8} {'-':>9} {'-':>7} {'-':>10}")

    for algo in algos:
        def run_once(algo=algo):
            engine = Engine(compiled, algorithm=algo, gc=args.gc)
            return engine.run(records)

        try:
            wall, result = _timed_runs(args.reps, run_once)
        except EngineConfigError as exc:
            raise CliError(str(exc)) from exc
        stats = result.stats
        rate = f"{n_events / wall:,.0f}" if wall > 0 else "inf"
        collected = str(stats.monitors_collected) if args.gc else "-"
        print(
            f"{algo:<9} {wall:>9.3f} {rate:>12} {len(result.reports):>8} "
            f"{stats.created_total():>9} {stats.peak_live_monitors:>7} {collected:>10}"
        )
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paramon",
        description="Parametric runtime monitoring over recorded traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="run specs over a trace")
    check.add_argument("specs", nargs="+", help="spec file, directory, or catalog name")
    check.add_argument("--trace", required=True, help="trace file, or - for stdin")
    check.add_argument(
        "--algo",
        default="C+",
        help=f"monitoring algorithm, one of {', '.join(ALGORITHMS)} (default C+)",
    )
    check.add_argument("--gc", action="store_true", help="collect dead-bound monitors")
    check.add_argument(
        "--format",
        choices=("text", "machine"),
        default="text",
        help="report rendering (machine = one JSON object per line)",
    )
    check.add_argument("--stats", action="store_true", help="counters on stderr")
    check.add_argument(
        "--max-slice",
        type=int,
        default=None,
        metavar="N",
        help="algorithm A only: keep at most N newest events per slice",
    )
    check.set_defaults(func=cmd_check)

    synth = sub.add_parser("synth", help="inspect a compiled spec")
    synth.add_argument("spec", help="spec file or catalog name")
    synth.add_argument(
        "--template", action="store_true", help="print the state listing (default)"
    )
    synth.add_argument(
        "--dump-enable",
        action="store_true",
        help="print enable and coenable tables",
    )
    synth.set_defaults(func=cmd_synth)

    slice_p = sub.add_parser("slice", help="project a trace onto a binding")
    slice_p.add_argument("trace", help="trace file, or - for stdin")
    slice_p.add_argument(
        "--theta", required=True, help="binding literal, e.g. f=file#7,g=sock#3"
    )
    slice_p.set_defaults(func=cmd_slice)

    bench = sub.add_parser("bench", help="time the algorithms")
    bench.add_argument("specs", nargs="+", help="spec file, directory, or catalog name")
    bench.add_argument("--trace", help="bench an existing trace file instead")
    bench.add_argument("--events", type=int, default=100_000, help="generated events")
    bench.add_argument(
        "--instances", type=int, default=10_000, help="generated parameter instances"
    )
    bench.add_argument("--seed", type=int, default=0, help="generator seed")
    bench.add_argument(
        "--deaths", action="store_true", help="emit death records while generating"
    )
    bench.add_argument(
        "--algos",
        default="A,B,C,C+,D",
        help="comma-separated algorithms to time (default all)",
    )
    bench.add_argument("--reps", type=int, default=1, help="repetitions; median wins")
    bench.add_argument("--gc", action="store_true", help="collect dead-bound monitors")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"paramon: {exc}", file=sys.stderr)
        return 2
    except EngineConfigError as exc:
        print(f"paramon: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
