"""Figure-data pipelines and tabular output.

Each pipeline returns a Table whose column schema is frozen and documented in
the README; writers emit CSV (``.`` decimal separator, empty field for
missing values, ``inf`` sentinel for unbounded rates) or JSON (one object
with config, columns, rows, seed, version).  Plotting is left to external
tools.

Pipelines needing closed forms require a path-loss exponent of 4; the plain
curve estimators work for any exponent.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from ._version import __version__
from .config import ExperimentConfig, config_to_dict, db_to_linear
from .estimator import (
    Provenance,
    curve_from_success_values,
    simulate_conditional_success,
)
from .network import SystemParams
from .rrs import MetaQuery, _rrs_meta_grid, derive_params, rrs_max_threshold, rrs_meta, rrs_success_probability
from .scheduling import Scheme, occupation_probability

DEFAULT_X_GRID = tuple(np.linspace(0.0, 0.999, 100))
DEFAULT_THETA_DB_GRID = tuple(float(v) for v in np.arange(-15.0, 11.0, 1.0))
DEFAULT_X_POINTS = (0.9, 0.99, 0.999)
DEFAULT_M_GRID = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0, 120.0)
DEFAULT_LAMBDA_GRID = tuple(float(v) for v in np.logspace(-7.0, -4.0, 10))
DEFAULT_LAMBDA_X = (0.9, 0.999)

_RATE_BRACKET_DB = (-30.0, 15.0)
_RATE_TOL_DB = 0.01


@dataclass
class Table:
    """Column-major schema with row-major numeric data; None marks a missing
    value."""

    columns: list[str]
    rows: list[list]

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".12g")
    return str(value)


def table_to_csv(table: Table) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_format_cell(v) for v in row])
    return buffer.getvalue()


def _json_cell(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def table_to_json(table: Table, config: ExperimentConfig, seed: int) -> str:
    payload = {
        "config": config_to_dict(config),
        "columns": table.columns,
        "rows": [[_json_cell(v) for v in row] for row in table.rows],
        "seed": seed,
        "version": __version__,
    }
    return json.dumps(payload, indent=2) + "\n"


def write_table(table: Table, config: ExperimentConfig, path: str, fmt: str) -> None:
    if fmt == "csv":
        text = table_to_csv(table)
    elif fmt == "json":
        text = table_to_json(table, config, config.master_seed)
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path!r}: {exc}") from exc


def _require_alpha_four(system: SystemParams, pipeline: str):
    if system.alpha != 4.0:
        raise ValueError(
            f"{pipeline} needs the alpha = 4 closed forms (got alpha = {system.alpha}); "
            "use the rrs-md/crs-md estimators for other exponents"
        )


def _single_theta(config: ExperimentConfig) -> float:
    grid = config.theta_db
    if grid is None:
        return 0.0
    return grid[0]


def run_md_vs_x(config: ExperimentConfig, n_workers: int = 1) -> Table:
    """Reliability sweep at one threshold: meta distribution and standard
    success probability against the target reliability x."""
    _require_alpha_four(config.system, "the md-vs-x pipeline")
    theta_db = _single_theta(config)
    theta = db_to_linear(theta_db)
    x_grid = np.asarray(config.x if config.x is not None else DEFAULT_X_GRID, dtype=float)
    analytic = derive_params(config.system)

    columns = ["x"]
    series = {}
    if Scheme.RRS in config.schemes:
        columns += ["rrs_md_analytic", "rrs_md_empirical", "rrs_md_ci95", "rrs_ps_analytic", "rrs_ps_empirical"]
        values = simulate_conditional_success(
            Scheme.RRS, config.system, theta, config.n_realizations,
            config.interference_model, config.crs_settings, config.master_seed, n_workers,
        )
        curve = curve_from_success_values(theta, x_grid, values, Provenance.EMPIRICAL)
        series["rrs_md_analytic"] = _rrs_meta_grid(theta, x_grid, analytic)
        series["rrs_md_empirical"] = curve.values
        series["rrs_md_ci95"] = curve.ci_halfwidth
        series["rrs_ps_analytic"] = np.full(x_grid.size, rrs_success_probability(theta, analytic))
        series["rrs_ps_empirical"] = np.full(x_grid.size, float(values.mean()))
    if Scheme.CRS in config.schemes:
        columns += ["crs_md_semianalytic", "crs_md_ci95", "crs_ps_empirical"]
        values = simulate_conditional_success(
            Scheme.CRS, config.system, theta, config.n_realizations,
            config.interference_model, config.crs_settings, config.master_seed, n_workers,
        )
        curve = curve_from_success_values(theta, x_grid, values, Provenance.SEMI_ANALYTIC)
        series["crs_md_semianalytic"] = curve.values
        series["crs_md_ci95"] = curve.ci_halfwidth
        series["crs_ps_empirical"] = np.full(x_grid.size, float(values.mean()))

    rows = []
    for i, x in enumerate(x_grid):
        rows.append([float(x)] + [float(series[c][i]) for c in columns[1:]])
    return Table(columns=columns, rows=rows)


def analytic_rrs_curve(theta: float, x_grid, analytic) -> "MetaCurve":
    """Closed-form RRS curve as a MetaCurve (alpha = 4 only)."""
    from .estimator import MetaCurve

    x = np.asarray(x_grid, dtype=float)
    return MetaCurve(
        theta=float(theta),
        x=x,
        values=_rrs_meta_grid(float(theta), x, analytic),
        provenance=Provenance.ANALYTIC,
    )


def run_scheme_curve(scheme: Scheme, config: ExperimentConfig, n_workers: int = 1) -> Table:
    """Meta distribution curve for one scheme at one threshold.

    Works for any path-loss exponent; the closed-form columns are added only
    when alpha = 4 makes them available.
    """
    theta_db = _single_theta(config)
    theta = db_to_linear(theta_db)
    x_grid = np.asarray(config.x if config.x is not None else DEFAULT_X_GRID, dtype=float)
    values = simulate_conditional_success(
        scheme, config.system, theta, config.n_realizations,
        config.interference_model, config.crs_settings, config.master_seed, n_workers,
    )
    provenance = Provenance.EMPIRICAL if scheme is Scheme.RRS else Provenance.SEMI_ANALYTIC
    curve = curve_from_success_values(theta, x_grid, values, provenance)
    tag = "rrs" if scheme is Scheme.RRS else "crs"
    md_name = "rrs_md_empirical" if scheme is Scheme.RRS else "crs_md_semianalytic"
    columns = ["x", md_name, f"{tag}_md_ci95", f"{tag}_ps_empirical"]
    series = {
        md_name: curve.values,
        f"{tag}_md_ci95": curve.ci_halfwidth,
        f"{tag}_ps_empirical": np.full(x_grid.size, float(values.mean())),
    }
    if scheme is Scheme.RRS and config.system.alpha == 4.0:
        analytic = derive_params(config.system)
        columns.insert(1, "rrs_md_analytic")
        series["rrs_md_analytic"] = _rrs_meta_grid(theta, x_grid, analytic)
        columns.append("rrs_ps_analytic")
        series["rrs_ps_analytic"] = np.full(x_grid.size, rrs_success_probability(theta, analytic))
    rows = []
    for i, x in enumerate(x_grid):
        rows.append([float(x)] + [float(series[c][i]) for c in columns[1:]])
    return Table(columns=columns, rows=rows)


def run_md_vs_theta(config: ExperimentConfig, n_workers: int = 1) -> Table:
    """Threshold sweep: meta distribution at selected reliabilities, plus the
    transmit rate log2(1 + theta) for each threshold."""
    _require_alpha_four(config.system, "the md-vs-theta pipeline")
    theta_db_grid = config.theta_db if config.theta_db is not None else DEFAULT_THETA_DB_GRID
    x_points = np.asarray(config.x if config.x is not None else DEFAULT_X_POINTS, dtype=float)
    analytic = derive_params(config.system)

    columns = ["theta_db", "theta", "rate_bpcu", "x"]
    if Scheme.RRS in config.schemes:
        columns += ["rrs_md_analytic", "rrs_md_empirical", "rrs_md_ci95", "rrs_ps_analytic", "rrs_ps_empirical"]
    if Scheme.CRS in config.schemes:
        columns += ["crs_md_semianalytic", "crs_md_ci95", "crs_ps_empirical"]

    rows = []
    for theta_db in theta_db_grid:
        theta = db_to_linear(theta_db)
        rate = math.log2(1.0 + theta)
        per_theta = {}
        if Scheme.RRS in config.schemes:
            values = simulate_conditional_success(
                Scheme.RRS, config.system, theta, config.n_realizations,
                config.interference_model, config.crs_settings, config.master_seed, n_workers,
            )
            curve = curve_from_success_values(theta, x_points, values, Provenance.EMPIRICAL)
            per_theta["rrs_md_analytic"] = _rrs_meta_grid(theta, x_points, analytic)
            per_theta["rrs_md_empirical"] = curve.values
            per_theta["rrs_md_ci95"] = curve.ci_halfwidth
            per_theta["rrs_ps_analytic"] = np.full(x_points.size, rrs_success_probability(theta, analytic))
            per_theta["rrs_ps_empirical"] = np.full(x_points.size, float(values.mean()))
        if Scheme.CRS in config.schemes:
            values = simulate_conditional_success(
                Scheme.CRS, config.system, theta, config.n_realizations,
                config.interference_model, config.crs_settings, config.master_seed, n_workers,
            )
            curve = curve_from_success_values(theta, x_points, values, Provenance.SEMI_ANALYTIC)
            per_theta["crs_md_semianalytic"] = curve.values
            per_theta["crs_md_ci95"] = curve.ci_halfwidth
            per_theta["crs_ps_empirical"] = np.full(x_points.size, float(values.mean()))
        for i, x in enumerate(x_points):
            rows.append(
                [float(theta_db), theta, rate, float(x)]
                + [float(per_theta[c][i]) for c in columns[4:]]
            )
    return Table(columns=columns, rows=rows)


def _crs_md_at(config: ExperimentConfig, system: SystemParams, theta: float, x: float, n_workers: int) -> float:
    values = simulate_conditional_success(
        Scheme.CRS, system, theta, config.n_realizations,
        config.interference_model, config.crs_settings, config.master_seed, n_workers,
    )
    return float((values > x).mean())


def _crs_rate_bisect(
    config: ExperimentConfig, system: SystemParams, u: float, x: float, n_workers: int
) -> float | None:
    """Largest threshold (as a rate) at which the CRS curve still clears u,
    found by bisection on theta in dB to 0.01 dB.

    The realization seed is fixed across probes, so the empirical curve is a
    deterministic nonincreasing step function of theta and bisection is
    well-defined.  Returns None when the bracket does not contain u.
    """
    cache: dict[float, float] = {}

    def md_at(theta_db: float) -> float:
        if theta_db not in cache:
            cache[theta_db] = _crs_md_at(config, system, db_to_linear(theta_db), x, n_workers)
        return cache[theta_db]

    lo, hi = _RATE_BRACKET_DB
    if md_at(lo) < u or md_at(hi) >= u:
        return None
    while hi - lo > _RATE_TOL_DB:
        mid = 0.5 * (lo + hi)
        if md_at(mid) >= u:
            lo = mid
        else:
            hi = mid
    return math.log2(1.0 + db_to_linear(lo))


def run_rate_vs_m(
    config: ExperimentConfig,
    u_targets,
    x: float,
    m_grid=None,
    n_workers: int = 1,
) -> Table:
    """Transmit rate versus mean cluster size for fixed (reliability x,
    admitted fraction u).  RRS rates come from the closed-form threshold
    inverse; CRS rates from bisection on the semi-analytic curve."""
    _require_alpha_four(config.system, "the rate-vs-m pipeline")
    u_targets = tuple(float(u) for u in u_targets)
    if not u_targets:
        raise ValueError("at least one u target is required")
    for u in u_targets:
        if not (0.0 < u < 1.0):
            raise ValueError(f"u targets must lie in (0, 1), got {u!r}")
    x = float(x)
    if not (0.0 < x < 1.0):
        raise ValueError(f"x must lie in (0, 1), got {x!r}")
    grid = tuple(float(m) for m in (m_grid if m_grid is not None else DEFAULT_M_GRID))

    columns = ["m"]
    for u in u_targets:
        if Scheme.RRS in config.schemes:
            columns.append(f"rrs_rate_u{u:g}")
        if Scheme.CRS in config.schemes:
            columns.append(f"crs_rate_u{u:g}")

    rows = []
    for m in grid:
        row = [m]
        if m == 0.0:
            # no devices: no interference and nothing to schedule; the rate
            # is unbounded, emitted as the inf sentinel
            row += [math.inf] * (len(columns) - 1)
            rows.append(row)
            continue
        system_m = replace(config.system, m_mean=m)
        analytic = derive_params(system_m)
        for u in u_targets:
            if Scheme.RRS in config.schemes:
                if analytic.t == 0.0:
                    row.append(math.inf)
                else:
                    row.append(rrs_max_threshold(x, u, analytic).rate_bpcu)
            if Scheme.CRS in config.schemes:
                row.append(_crs_rate_bisect(config, system_m, u, x, n_workers))
        rows.append(row)
    return Table(columns=columns, rows=rows)


def _x_label(x: float) -> str:
    return f"{x:g}"


def run_md_vs_lambda(
    config: ExperimentConfig,
    lambda_grid=None,
    x_values=None,
    n_workers: int = 1,
) -> Table:
    """Deployment-density sweep: meta distribution and served density
    lambda_p * P0 * F(theta, x) per scheme and reliability."""
    _require_alpha_four(config.system, "the md-vs-lambda pipeline")
    theta = db_to_linear(_single_theta(config))
    grid = tuple(float(v) for v in (lambda_grid if lambda_grid is not None else DEFAULT_LAMBDA_GRID))
    xs = tuple(float(v) for v in (x_values if x_values is not None else (config.x or DEFAULT_LAMBDA_X)))
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("x values must be strictly increasing")
    p0 = occupation_probability(config.system.n_channels, config.system.m_mean)

    columns = ["lambda_p", "p0"]
    for x in xs:
        label = _x_label(x)
        if Scheme.RRS in config.schemes:
            columns += [f"rrs_md_analytic_x{label}", f"rrs_served_x{label}"]
        if Scheme.CRS in config.schemes:
            columns += [f"crs_md_x{label}", f"crs_md_ci95_x{label}", f"crs_served_x{label}"]

    rows = []
    for lam in grid:
        system_lam = replace(config.system, lambda_p=lam)
        row = [lam, p0]
        crs_curve = None
        if Scheme.CRS in config.schemes:
            values = simulate_conditional_success(
                Scheme.CRS, system_lam, theta, config.n_realizations,
                config.interference_model, config.crs_settings, config.master_seed, n_workers,
            )
            crs_curve = curve_from_success_values(theta, np.asarray(xs), values, Provenance.SEMI_ANALYTIC)
        analytic = derive_params(system_lam) if Scheme.RRS in config.schemes else None
        for i, x in enumerate(xs):
            if Scheme.RRS in config.schemes:
                md = rrs_meta(MetaQuery(theta=theta, x=x), analytic)
                row += [md, lam * p0 * md]
            if Scheme.CRS in config.schemes:
                md = float(crs_curve.values[i])
                row += [md, float(crs_curve.ci_halfwidth[i]), lam * p0 * md]
        rows.append(row)
    return Table(columns=columns, rows=rows)


def run_figure(figure_id: int, config: ExperimentConfig, n_workers: int = 1, **kwargs) -> Table:
    """Dispatch one of the four figure pipelines by id."""
    if figure_id == 2:
        return run_md_vs_x(config, n_workers=n_workers)
    if figure_id == 3:
        return run_md_vs_theta(config, n_workers=n_workers)
    if figure_id == 4:
        return run_rate_vs_m(
            config,
            kwargs.get("u_targets", (0.99, 0.95)),
            kwargs.get("x", 0.99),
            m_grid=kwargs.get("m_grid"),
            n_workers=n_workers,
        )
    if figure_id == 5:
        return run_md_vs_lambda(
            config,
            lambda_grid=kwargs.get("lambda_grid"),
            x_values=kwargs.get("x_values"),
            n_workers=n_workers,
        )
    raise ValueError(f"unknown figure id {figure_id!r} (expected 2, 3, 4, or 5)")
