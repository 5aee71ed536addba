"""Application configuration for the CLI and HTTP service.

Loaded from a JSON file (``--config path``), then overridden by environment
variables with the ``ATBAT_`` prefix: config key ``http.port`` becomes
``ATBAT_HTTP_PORT``, ``solver.gamma_cap`` becomes ``ATBAT_SOLVER_GAMMA_CAP``,
and so on.  All numeric fields are validated at load.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields

ENV_PREFIX = "ATBAT_"


@dataclass
class GridConfig:
    strike_x_min: float = -0.83
    strike_x_max: float = 0.83
    strike_z_min: float = 1.5
    strike_z_max: float = 3.5
    band: float = 0.4


@dataclass
class SolverSection:
    tolerance: float = 1e-9
    max_iterations: int = 10_000
    gamma_cap: float | None = None
    solver: str = "two_row"


@dataclass
class HttpConfig:
    host: str = "127.0.0.1"
    port: int = 8734


@dataclass
class AppConfig:
    store_path: str = "store"
    grid: GridConfig = field(default_factory=GridConfig)
    patience_threshold: float = 0.8
    solver: SolverSection = field(default_factory=SolverSection)
    outcome_alpha: float = 2.0
    behavioral_alpha: float = 2.0
    outcome_model: str = "empirical"  # empirical | softmax
    keep_fraction: float = 0.95
    ridge_lambda: float = 1.0
    seed: int = 0
    http: HttpConfig = field(default_factory=HttpConfig)

    def validate(self) -> "AppConfig":
        if not 0 < self.patience_threshold < 1:
            raise ValueError("patience_threshold must be in (0, 1)")
        if self.solver.tolerance <= 0:
            raise ValueError("solver.tolerance must be > 0")
        if self.solver.max_iterations < 1:
            raise ValueError("solver.max_iterations must be >= 1")
        if self.solver.gamma_cap is not None and not 0 < self.solver.gamma_cap <= 1:
            raise ValueError("solver.gamma_cap must be in (0, 1]")
        if not 1 <= self.http.port <= 65535:
            raise ValueError("http.port must be in 1..65535")
        if self.outcome_alpha < 0 or self.behavioral_alpha < 0:
            raise ValueError("smoothing alphas must be >= 0")
        if not 0 < self.keep_fraction <= 1:
            raise ValueError("keep_fraction must be in (0, 1]")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")
        if self.outcome_model not in ("empirical", "softmax"):
            raise ValueError("outcome_model must be empirical or softmax")
        return self

    def zone_grid(self):
        from .zones import ZoneGrid
        g = self.grid
        return ZoneGrid(g.strike_x_min, g.strike_x_max, g.strike_z_min,
                        g.strike_z_max, g.band)

    def solver_config(self, gamma_cap=None):
        from .solver import SolverConfig
        return SolverConfig(
            tolerance=self.solver.tolerance,
            max_iterations=self.solver.max_iterations,
            gamma_cap=self.solver.gamma_cap if gamma_cap is None else gamma_cap,
            solver=self.solver.solver)


_SECTIONS = {"grid": GridConfig, "solver": SolverSection, "http": HttpConfig}


def _coerce(value: str, current):
    if isinstance(current, bool):
        return value.lower() in ("1", "true", "yes")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(value)
    if isinstance(current, float) or current is None:
        try:
            return float(value)
        except ValueError:
            return value
    return value


def load_config(path: str | None = None, env: dict | None = None) -> AppConfig:
    """Build the config from defaults, optional JSON file, and environment."""
    doc = {}
    if path is not None:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    cfg = AppConfig()
    for key, value in doc.items():
        if key in _SECTIONS:
            setattr(cfg, key, _SECTIONS[key](**value))
        elif hasattr(cfg, key):
            setattr(cfg, key, value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    env = os.environ if env is None else env
    for section_name in (None, *_SECTIONS):
        target = cfg if section_name is None else getattr(cfg, section_name)
        for f in fields(target):
            if section_name is None and f.name in _SECTIONS:
                continue
            parts = [p for p in (section_name, f.name) if p]
            env_key = ENV_PREFIX + "_".join(parts).upper()
            if env_key in env:
                setattr(target, f.name, _coerce(env[env_key], getattr(target, f.name)))
    return cfg.validate()
