"""Experiment configuration and the flat key=value config-file format.

Defaults reproduce the reference scenario: aggregator density 3e-6 per m^2 on
a 3 km disk (about 84.8 aggregators on average), N = 20 channels, mean
cluster size m = 60, cluster radius 40 m, path-loss exponent 4.

Config files are UTF-8 text, one ``key = value`` pair per line, ``#`` starts
a comment.  Keys are exactly the field names below; grids are comma-separated
numbers.  Unknown keys are errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .estimator import CrsEvalSettings
from .network import InterferenceModel, SystemParams
from .scheduling import Scheme

DEFAULT_SYSTEM = SystemParams(
    lambda_p=3e-6,
    n_channels=20,
    m_mean=60.0,
    r_cluster=40.0,
    alpha=4.0,
    sim_radius=3000.0,
)

DEFAULT_MASTER_SEED = 12345
DEFAULT_REALIZATIONS = 100_000


def db_to_linear(theta_db: float) -> float:
    return 10.0 ** (float(theta_db) / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """A complete run description.

    theta_db and x may be None, meaning "use the pipeline's documented
    default grid"; a single value or a grid otherwise.
    """

    system: SystemParams = DEFAULT_SYSTEM
    schemes: tuple[Scheme, ...] = (Scheme.RRS, Scheme.CRS)
    theta_db: tuple[float, ...] | None = None
    x: tuple[float, ...] | None = None
    n_realizations: int = DEFAULT_REALIZATIONS
    interference_model: InterferenceModel = InterferenceModel.THINNED
    master_seed: int = DEFAULT_MASTER_SEED
    output_path: str = ""
    crs_settings: CrsEvalSettings = field(default_factory=CrsEvalSettings)

    def __post_init__(self):
        if not self.schemes:
            raise ValueError("at least one scheme must be selected")
        if len(set(self.schemes)) != len(self.schemes):
            raise ValueError("schemes must be distinct")
        for name in ("theta_db", "x"):
            grid = getattr(self, name)
            if grid is None:
                continue
            if len(grid) == 0:
                raise ValueError(f"{name} grid must be nonempty")
            if any(not math.isfinite(v) for v in grid):
                raise ValueError(f"{name} grid must be finite")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError(f"{name} grid must be strictly increasing")
        if self.x is not None and any(not (0.0 <= v <= 1.0) for v in self.x):
            raise ValueError("x values must lie in [0, 1]")
        if not isinstance(self.n_realizations, int) or self.n_realizations < 1:
            raise ValueError(f"n_realizations must be >= 1, got {self.n_realizations!r}")
        if not (0 <= self.master_seed < 2**64):
            raise ValueError(f"master_seed must fit in 64 bits, got {self.master_seed!r}")

    def theta_grid_linear(self) -> tuple[float, ...] | None:
        if self.theta_db is None:
            return None
        return tuple(db_to_linear(v) for v in self.theta_db)


_SYSTEM_KEYS = ("lambda_p", "n_channels", "m_mean", "r_cluster", "alpha", "sim_radius", "rho")
_CONFIG_KEYS = _SYSTEM_KEYS + (
    "schemes",
    "theta_db",
    "x",
    "n_realizations",
    "interference_model",
    "master_seed",
    "output_path",
)


def _parse_float_list(raw: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip() != "")
    except ValueError as exc:
        raise ValueError(f"config key {key!r}: cannot parse {raw!r} as numbers") from exc


def parse_config_items(text: str) -> dict[str, str]:
    """Raw key -> value strings from the flat file format; unknown keys and
    malformed lines are errors."""
    items: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        items[key] = raw_value.strip()
    return items


def config_from_items(items: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply raw key=value items on top of a base config."""
    config = base if base is not None else ExperimentConfig()
    system_kwargs = {}
    config_kwargs = {}
    for key, value in items.items():
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        if key in _SYSTEM_KEYS:
            try:
                system_kwargs[key] = int(value) if key == "n_channels" else float(value)
            except ValueError as exc:
                raise ValueError(f"config key {key!r}: cannot parse {value!r}") from exc
        elif key == "schemes":
            try:
                config_kwargs["schemes"] = tuple(
                    Scheme(part.strip().lower()) for part in value.split(",") if part.strip()
                )
            except ValueError as exc:
                raise ValueError(f"config key 'schemes': unknown scheme in {value!r}") from exc
        elif key in ("theta_db", "x"):
            config_kwargs[key] = _parse_float_list(value, key)
        elif key == "n_realizations":
            config_kwargs[key] = int(value)
        elif key == "interference_model":
            try:
                config_kwargs[key] = InterferenceModel(value.lower())
            except ValueError as exc:
                raise ValueError(f"config key 'interference_model': unknown model {value!r}") from exc
        elif key == "master_seed":
            config_kwargs[key] = int(value)
        elif key == "output_path":
            config_kwargs[key] = value
    if system_kwargs:
        merged = {k: getattr(config.system, k) for k in _SYSTEM_KEYS}
        merged.update(system_kwargs)
        config_kwargs["system"] = SystemParams(**merged)
    return replace(config, **config_kwargs)


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse the flat key=value format into an ExperimentConfig."""
    return config_from_items(parse_config_items(text), base=base)


def load_config(path: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    return parse_config_text(text, base=base)


def config_to_dict(config: ExperimentConfig) -> dict:
    """Flat JSON-friendly view of a config, mirroring the file format."""
    out = {key: getattr(config.system, key) for key in _SYSTEM_KEYS}
    out["schemes"] = ",".join(s.value for s in config.schemes)
    out["theta_db"] = None if config.theta_db is None else list(config.theta_db)
    out["x"] = None if config.x is None else list(config.x)
    out["n_realizations"] = config.n_realizations
    out["interference_model"] = config.interference_model.value
    out["master_seed"] = config.master_seed
    out["output_path"] = config.output_path
    return out
