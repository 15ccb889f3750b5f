"""Command-line entry point: ``sim <command> --config <file> [options]``.

The command given on the command line overrides any ``command`` field in
the configuration file; ``--out``, ``--v-points``, and ``--delta`` override
the corresponding config settings.  Thread count resolves in order:
``--threads`` flag, then the SIM_THREADS environment variable, then 1.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import COMMANDS, parse_config
from .errors import SimulationError
from .runner import run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Exchange-coupling simulator for gate-defined double dots",
    )
    parser.add_argument("command", choices=COMMANDS,
                        help="operation to perform")
    parser.add_argument("--config", required=True,
                        help="path to the YAML run configuration")
    parser.add_argument("--out", default=None,
                        help="output directory (overrides config 'output')")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for sweep points "
                             "(default: SIM_THREADS env var or 1)")
    parser.add_argument("--v-points", type=int, default=None, dest="v_points",
                        help="override the number of sweep points")
    parser.add_argument("--delta", type=float, default=None,
                        help="override the fractional voltage-error window")
    return parser


def _resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("SIM_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            print(f"sim: ignoring non-integer SIM_THREADS={env!r}",
                  file=sys.stderr)
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            spec = parse_config(fh.read())
        spec = replace(spec, command=args.command)
        if args.v_points is not None or args.delta is not None:
            analysis = spec.analysis
            if args.v_points is not None:
                analysis = replace(analysis, v_points=args.v_points)
            if args.delta is not None:
                analysis = replace(analysis, delta=args.delta)
            spec = replace(spec, analysis=analysis)
        report = run(spec, out_dir=args.out,
                     threads=_resolve_threads(args.threads))
    except SimulationError as exc:
        print(f"sim: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"sim: error: {exc}", file=sys.stderr)
        return 1
    out = args.out if args.out is not None else spec.output
    print(f"sim: {spec.command} complete; results in {out}/report.txt")
    if spec.command == "validate" and not report.all_passed:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
