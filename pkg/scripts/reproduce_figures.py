#!/usr/bin/env python3
"""Reproduce the four figure datasets into an output directory.

Smoke scale (1e4 realizations) by default; pass --full for the reference
scale (1e5).  Output is CSV; point any plotting tool at the files.
"""

import argparse
import sys
import time
from pathlib import Path

from metasir.cli import cli_entry


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="figure_data")
    parser.add_argument("--seed", type=int, default=12345)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--full", action="store_true", help="reference scale (1e5 realizations)")
    parser.add_argument("--figures", default="2,3,4,5", help="comma-separated figure ids")
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    realizations = 100_000 if args.full else 10_000

    for figure_id in (int(f) for f in args.figures.split(",")):
        out = out_dir / f"figure{figure_id}.csv"
        start = time.perf_counter()
        code = cli_entry([
            "figure", "--id", str(figure_id),
            "--seed", str(args.seed),
            "--realizations", str(realizations),
            "--workers", str(args.workers),
            "--out", str(out),
        ])
        if code != 0:
            print(f"figure {figure_id}: failed with exit code {code}", file=sys.stderr)
            return code
        print(f"figure {figure_id}: wrote {out} in {time.perf_counter() - start:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
