"""Simulator configuration: solver tolerances, geometry knobs, and the
center power fraction, loadable from a small YAML file.

CLI flags override config values, which override the built-in defaults.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .allocators import DEFAULT_BETA_TOLERANCE, DEFAULT_BISECTION_EPSILON_REL
from .geometry import DEFAULT_ALPHA, DEFAULT_RRU_RING_RADIUS


class ConfigError(ValueError):
    """Invalid configuration file or option combination."""


DEFAULT_ORACLE_GRID_POINTS = 100_001


@dataclass(frozen=True)
class SimulatorConfig:
    """Tunable parameters shared by the solvers and the sweep harness.

    bisection_epsilon is relative to P_cen (the bracket stops below
    bisection_epsilon * P_cen); beta_tolerance is the absolute golden-section
    bracket width on [0, 1].
    """

    bisection_epsilon: float = DEFAULT_BISECTION_EPSILON_REL
    beta_tolerance: float = DEFAULT_BETA_TOLERANCE
    oracle_grid_points: int = DEFAULT_ORACLE_GRID_POINTS
    alpha: float = DEFAULT_ALPHA
    rru_ring_radius: float = DEFAULT_RRU_RING_RADIUS
    center_fraction: float = 0.5

    def __post_init__(self) -> None:
        if self.bisection_epsilon <= 0.0:
            raise ConfigError("maxmin.bisection_epsilon must be positive")
        if self.beta_tolerance <= 0.0:
            raise ConfigError("jt.beta_tolerance must be positive")
        if self.oracle_grid_points < 2:
            raise ConfigError("oracle.grid_points must be at least 2")
        if self.alpha <= 0.0:
            raise ConfigError("geometry.alpha must be positive")
        if not 0.0 < self.rru_ring_radius < 1.0:
            raise ConfigError("geometry.rru_ring_radius must lie in (0, 1)")
        if not 0.0 < self.center_fraction <= 1.0:
            raise ConfigError("power.center_fraction must lie in (0, 1]")


_SCHEMA = {
    "maxmin": {"bisection_epsilon": ("bisection_epsilon", float)},
    "jt": {"beta_tolerance": ("beta_tolerance", float)},
    "oracle": {"grid_points": ("oracle_grid_points", int)},
    "geometry": {
        "alpha": ("alpha", float),
        "rru_ring_radius": ("rru_ring_radius", float),
    },
    "power": {"center_fraction": ("center_fraction", float)},
}


def load_config(path: str | Path) -> SimulatorConfig:
    """Parse a YAML config file into a SimulatorConfig.

    The file holds nested sections matching the documented keys, e.g.

        maxmin:
          bisection_epsilon: 1.0e-6
        power:
          center_fraction: 0.5

    Unknown sections or keys raise ConfigError so typos fail loudly.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    if data is None:
        return SimulatorConfig()
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping, got {type(data).__name__}")

    overrides: dict[str, object] = {}
    for section, entries in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(entries, dict):
            raise ConfigError(f"config section {section!r} must be a mapping")
        for key, value in entries.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            field_name, caster = _SCHEMA[section][key]
            try:
                overrides[field_name] = caster(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {section}.{key}: {value!r}") from exc
    try:
        return replace(SimulatorConfig(), **overrides)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
