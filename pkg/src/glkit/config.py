from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ruamel.yaml import YAML

logger = logging.getLogger(__name__)

ENUM_CAP_ENV = "GLKIT_ENUM_CAP"


@dataclass(frozen=True)
class Settings:
    """Tolerances, caps and solver defaults.

    Everything numeric that is not part of the math itself lives here, so a
    YAML file (or a test) can move it without touching the algorithms.
    """

    # enumeration
    enum_cap: int = 1_000_000
    dense_oracle_cap: int = 20_000
    brute_force_cap: int = 500

    # GLPG loop
    max_iters: int = 200_000
    step_restarts: int = 5
    plateau_window: int = 1_000
    plateau_tol: float = 1e-7
    inflation_rounds: int = 10

    # tolerances
    feasibility_tol: float = 1e-9
    kkt_tol: float = 1e-6
    identity_tol: float = 1e-9

    # projection
    barrier_max_outer: int = 60
    barrier_max_newton: int = 100
    barrier_mu: float = 10.0
    active_set_max_rounds: int = 200

    # simulator
    ossb_max_iters: int = 5_000
    ossb_min_epsilon: float = 0.05
    ossb_delta: float = 0.1
    cucb_bonus: str = "printed"  # "printed" | "sqrt"

    def replace(self, **changes) -> "Settings":
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(Settings)}


def _coerce(name: str, value):
    kind = _FIELD_TYPES[name]
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    return str(value)


def _yaml_map(path: Path) -> dict:
    yaml = YAML(typ="safe")
    data = yaml.load(path.read_text(encoding="utf-8"))
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"Settings file {path} must contain a mapping")
    return data


def _env_overrides() -> dict:
    raw = os.environ.get(ENUM_CAP_ENV)
    if not raw:
        return {}
    try:
        cap = int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r (not an integer)", ENUM_CAP_ENV, raw)
        return {}
    if cap < 1:
        logger.warning("Ignoring %s=%r (must be positive)", ENUM_CAP_ENV, raw)
        return {}
    return {"enum_cap": cap}


def load_settings(path: Optional[str | Path] = None) -> Settings:
    """Build settings from defaults, an optional YAML file and the environment."""
    values: dict = {}
    if path is not None:
        for key, value in _yaml_map(Path(path)).items():
            if key not in _FIELD_TYPES:
                logger.warning("Unknown setting %r in %s ignored", key, path)
                continue
            values[key] = _coerce(key, value)
    values.update(_env_overrides())
    settings = Settings(**values)
    if settings.cucb_bonus not in ("printed", "sqrt"):
        raise ValueError(f"cucb_bonus must be 'printed' or 'sqrt', got {settings.cucb_bonus!r}")
    return settings


def default_settings() -> Settings:
    # Re-read the environment each time so GLKIT_ENUM_CAP applies without a restart.
    return Settings(**_env_overrides())
