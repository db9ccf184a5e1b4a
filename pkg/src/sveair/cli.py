"""Command-line entry point.

    sveair run            --config scenario.cfg [--out DIR]
    sveair r0-report      --config scenario.cfg [--out DIR]
    sveair oracle-compare --config scenario.cfg [--out DIR]
    sveair lyapunov       --config scenario.cfg [--out DIR]

`run` executes the configured sweep and writes all products; the other
subcommands force the corresponding single product regardless of the
config toggles.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from sveair.config import load_config
from sveair.errors import SveairError
from sveair.runner import run_scenario


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sveair",
        description="Age-structured SVEAIR epidemic engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "simulate the configured scenario sweep and write all products"),
        ("r0-report", "compute the reproduction-number breakdown only"),
        ("oracle-compare", "cross-validate the solver against the renewal march"),
        ("lyapunov", "monitor the Lyapunov function along the sweep"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="scenario config file")
        cmd.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "r0-report":
            cfg = replace(cfg, r0_only=True)
        elif args.command == "oracle-compare":
            cfg = replace(cfg, r0_only=False, run_oracle=True, run_lyapunov=False)
        elif args.command == "lyapunov":
            cfg = replace(cfg, r0_only=False, run_oracle=False, run_lyapunov=True)
        report = run_scenario(cfg, out_dir=args.out)
    except SveairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
