#!/usr/bin/env python3
"""Run the acceptance criteria and write a JSON report.

Equivalent to `metasir validate --out <path>`; kept as a script so the report
generation is one command in CI.
"""

import argparse
import sys

from metasir.cli import cli_entry


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="validation_report.json")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--quick", action="store_true", help="reduced sizes; not the official gate")
    args = parser.parse_args()

    argv = ["validate", "--out", args.out, "--workers", str(args.workers)]
    if args.quick:
        argv.append("--quick")
    return cli_entry(argv)


if __name__ == "__main__":
    sys.exit(main())
