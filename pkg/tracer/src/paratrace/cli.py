"""Command line front end.

`paratrace run` executes a script under instrumentation and leaves a
trace file behind; feed that file to `paramon check`. `paratrace
targets` prints what would be patched, for checking a spec's selectors
without running anything.
"""

import argparse
import runpy
import sys

from .session import instrument
from .targets import TargetError, derive_targets, load_spec_docs


def _collect_targets(specs_path: str):
    docs = load_spec_docs(specs_path)
    if not docs:
        raise TargetError(f"no spec files under {specs_path}")
    targets = []
    for name, doc in docs:
        targets.extend(derive_targets(doc, name))
    return targets


def cmd_run(args) -> int:
    targets = _collect_targets(args.specs)
    saved_argv = sys.argv
    sys.argv = [args.script] + args.script_args
    session = instrument(targets, args.out, producer=args.producer)
    try:
        runpy.run_path(args.script, run_name="__main__")
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    finally:
        session.stop()
        sys.argv = saved_argv
    return 0


def cmd_targets(args) -> int:
    targets = _collect_targets(args.specs)
    for t in targets:
        binds = ", ".join(f"{p}<-{o!r}" for p, _, o in t.bindings)
        print(f"{t.module}.{t.attr}  {t.position} {t.event}  [{binds}]")
    print(f"-- {len(targets)} emission(s)")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="paratrace")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a script under instrumentation")
    p_run.add_argument("--specs", required=True, help="spec file or directory")
    p_run.add_argument("--out", default="paratrace.jsonl", help="trace output path")
    p_run.add_argument("--producer", default="paratrace")
    p_run.add_argument("script")
    p_run.add_argument("script_args", nargs=argparse.REMAINDER)
    p_run.set_defaults(func=cmd_run)

    p_targets = sub.add_parser("targets", help="list patch points for a spec")
    p_targets.add_argument("--specs", required=True)
    p_targets.set_defaults(func=cmd_targets)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TargetError as exc:
        print(f"paratrace: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
