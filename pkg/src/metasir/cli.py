"""Command line interface.

Subcommands: ``p0``, ``rrs-md``, ``crs-md``, ``figure --id {2,3,4,5}``,
``rate-vs-m``, ``validate``.  Exit codes: 0 success, 1 usage error,
2 numerical failure, 3 I/O error.  Errors print one line to stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ExperimentConfig, config_from_items, parse_config_items
from .estimator import CrsPrecisionError
from .experiments import (
    Table,
    run_figure,
    run_rate_vs_m,
    run_scheme_curve,
    table_to_csv,
    table_to_json,
    write_table,
)
from .network import InterferenceModel
from .scheduling import Scheme, occupation_probability

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

FIGURE_SMOKE_REALIZATIONS = 10_000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the interface reserves 2 for
    # numerical failures, so route usage problems through UsageError instead
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let values like "-5,0" (dB grids) pass as arguments
        import re

        self._negative_number_matcher = re.compile(r"^-\d+.*$|^-\.\d+.*$")

    def error(self, message):
        raise UsageError(message)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--seed", type=int, help="64-bit master seed")
    common.add_argument("--out", help="output file path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int, default=1, help="parallel workers (results are worker-count independent)")
    common.add_argument("--realizations", type=int, help="Monte Carlo realizations")
    common.add_argument("--interference-model", choices=("thinned", "full"))
    return common


def build_parser() -> _Parser:
    common = _common_flags()
    parser = _Parser(prog="metasir", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_p0 = sub.add_parser("p0", parents=[common], help="closed-form channel occupation probability")
    p_p0.add_argument("--n", type=int, help="channel count (default: config)")
    p_p0.add_argument("--m", type=float, help="mean cluster size (default: config)")

    for name, help_text in (
        ("rrs-md", "RRS meta distribution curve (analytic + empirical)"),
        ("crs-md", "CRS semi-analytic meta distribution curve"),
    ):
        p_md = sub.add_parser(name, parents=[common], help=help_text)
        p_md.add_argument("--theta-db", type=float, help="SIR threshold in dB (default 0)")
        p_md.add_argument("--x", help="comma-separated reliability grid")

    p_fig = sub.add_parser("figure", parents=[common], help="figure-data pipelines")
    p_fig.add_argument("--id", type=int, required=True, choices=(2, 3, 4, 5))
    p_fig.add_argument("--theta-db", help="comma-separated threshold grid in dB")
    p_fig.add_argument("--x", help="comma-separated reliability grid")
    p_fig.add_argument("--u", default="0.99,0.95", help="admitted-fraction targets (figure 4)")
    p_fig.add_argument("--x-target", type=float, default=0.99, help="reliability target (figure 4)")
    p_fig.add_argument("--m-grid", help="comma-separated mean cluster sizes (figure 4)")
    p_fig.add_argument("--lambda-grid", help="comma-separated densities (figure 5)")

    p_rate = sub.add_parser("rate-vs-m", parents=[common], help="rate vs mean cluster size")
    p_rate.add_argument("--u", default="0.99,0.95", help="admitted-fraction targets")
    p_rate.add_argument("--x-target", type=float, default=0.99, help="reliability target")
    p_rate.add_argument("--m-grid", help="comma-separated mean cluster sizes")

    p_val = sub.add_parser("validate", parents=[common], help="run the acceptance criteria")
    p_val.add_argument("--quick", action="store_true", help="reduced Monte Carlo sizes (smoke run, not the official gate)")

    return parser


def _parse_floats(raw: str, what: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in raw.split(",") if part.strip() != "")
    except ValueError as exc:
        raise UsageError(f"cannot parse {what} {raw!r} as numbers") from exc
    if not values:
        raise UsageError(f"{what} must be nonempty")
    return values


def _effective_config(args) -> tuple[ExperimentConfig, set[str]]:
    """Defaults, then config file, then command-line overrides; returns the
    config plus the set of keys the file explicitly set."""
    config = ExperimentConfig()
    seen: set[str] = set()
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise OSError(f"cannot read config {args.config!r}: {exc}") from exc
        items = parse_config_items(text)
        seen = set(items)
        config = config_from_items(items, base=config)
    overrides = {}
    if args.seed is not None:
        if not (0 <= args.seed < 2**64):
            raise UsageError(f"--seed must fit in 64 bits, got {args.seed}")
        overrides["master_seed"] = args.seed
    if args.realizations is not None:
        if args.realizations < 1:
            raise UsageError(f"--realizations must be >= 1, got {args.realizations}")
        overrides["n_realizations"] = args.realizations
    if args.interference_model is not None:
        overrides["interference_model"] = InterferenceModel(args.interference_model)
    theta_db = getattr(args, "theta_db", None)
    if theta_db is not None:
        if isinstance(theta_db, float):
            overrides["theta_db"] = (theta_db,)
        else:
            overrides["theta_db"] = _parse_floats(theta_db, "--theta-db")
    x_raw = getattr(args, "x", None)
    if x_raw is not None:
        overrides["x"] = _parse_floats(x_raw, "--x")
    if args.out:
        overrides["output_path"] = args.out
    if overrides:
        config = replace(config, **overrides)
    return config, seen


def _emit(table: Table, config: ExperimentConfig, args) -> None:
    path = args.out or config.output_path
    if path:
        write_table(table, config, path, args.format)
    elif args.format == "json":
        sys.stdout.write(table_to_json(table, config, config.master_seed))
    else:
        sys.stdout.write(table_to_csv(table))


def _cmd_p0(args) -> int:
    config, _ = _effective_config(args)
    n = args.n if args.n is not None else config.system.n_channels
    m = args.m if args.m is not None else config.system.m_mean
    value = occupation_probability(n, m)
    if args.format == "json":
        import json

        text = json.dumps({"n_channels": n, "m_mean": m, "p0": value}) + "\n"
    else:
        text = f"{value!r}\n"
    path = args.out or config.output_path
    if path:
        try:
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path!r}: {exc}") from exc
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_md(args, scheme: Scheme) -> int:
    config, _ = _effective_config(args)
    table = run_scheme_curve(scheme, config, n_workers=args.workers)
    _emit(table, config, args)
    return EXIT_OK


def _cmd_figure(args) -> int:
    config, seen = _effective_config(args)
    if args.realizations is None and "n_realizations" not in seen:
        # smoke-scale default for figure pipelines; pass --realizations 100000
        # (or set it in the config file) to reproduce the reference data
        config = replace(config, n_realizations=FIGURE_SMOKE_REALIZATIONS)
    kwargs = {}
    if args.id == 4:
        kwargs["u_targets"] = _parse_floats(args.u, "--u")
        kwargs["x"] = args.x_target
        if args.m_grid is not None:
            kwargs["m_grid"] = _parse_floats(args.m_grid, "--m-grid")
    if args.id == 5:
        if args.lambda_grid is not None:
            kwargs["lambda_grid"] = _parse_floats(args.lambda_grid, "--lambda-grid")
        if config.x is not None:
            kwargs["x_values"] = config.x
    table = run_figure(args.id, config, n_workers=args.workers, **kwargs)
    _emit(table, config, args)
    return EXIT_OK


def _cmd_rate_vs_m(args) -> int:
    config, _ = _effective_config(args)
    u_targets = _parse_floats(args.u, "--u")
    m_grid = _parse_floats(args.m_grid, "--m-grid") if args.m_grid is not None else None
    table = run_rate_vs_m(config, u_targets, args.x_target, m_grid=m_grid, n_workers=args.workers)
    _emit(table, config, args)
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .validation import run_all

    results = run_all(n_workers=args.workers, quick=args.quick)
    for result in results:
        print(result.label)
    if args.out:
        import json

        payload = [
            {
                "number": r.number,
                "name": r.name,
                "passed": r.passed,
                "hard": r.hard,
                "detail": r.detail,
                "data": {k: v for k, v in r.data.items() if isinstance(v, (int, float, str, bool, list, dict))},
            }
            for r in results
        ]
        try:
            with open(args.out, "w", encoding="utf-8") as handle:
                json.dump(payload, handle, indent=2)
                handle.write("\n")
        except OSError as exc:
            raise OSError(f"cannot write {args.out!r}: {exc}") from exc
    hard_failures = [r for r in results if r.hard and not r.passed]
    return EXIT_NUMERICAL if hard_failures else EXIT_OK


def cli_entry(argv=None) -> int:
    """Parse argv and run one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "p0":
            return _cmd_p0(args)
        if args.command == "rrs-md":
            return _cmd_md(args, Scheme.RRS)
        if args.command == "crs-md":
            return _cmd_md(args, Scheme.CRS)
        if args.command == "figure":
            return _cmd_figure(args)
        if args.command == "rate-vs-m":
            return _cmd_rate_vs_m(args)
        if args.command == "validate":
            return _cmd_validate(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"metasir: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        print(f"metasir: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CrsPrecisionError as exc:
        print(f"metasir: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ArithmeticError as exc:
        print(f"metasir: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"metasir: io error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(cli_entry())
