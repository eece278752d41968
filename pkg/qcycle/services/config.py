"""Experiment configuration from flat key=value files."""

import logging
import os
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path

from dotenv import dotenv_values

from qcycle.services.faultsim import FaultMode

logger = logging.getLogger(__name__)

ENV_PREFIX = "QCYCLE_"


class Strategy(str, Enum):
    """Direction strategies compared by an experiment."""

    PAIRED = "paired"
    FORWARD = "forward"
    RANDOM = "random"
    GREEDY = "greedy"


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    topology: Path
    redundancy: int = 2
    strategies: tuple[Strategy, ...] = tuple(Strategy)
    mappings: int = 100
    seed: int = 0
    quorum_source: str = "search"
    quorum_search: str = "auto"
    search_budget: int = 20000
    fault_sweep: bool = True
    compensation: bool = False
    fault_mode: FaultMode = FaultMode.WHOLE_CYCLE
    count_pass_through: bool = True
    output_dir: Path = Path("results")
    name: str = ""
    route_budget: int = 200_000

    def __post_init__(self) -> None:
        if self.mappings < 1:
            raise ConfigError(f"mappings must be at least 1, got {self.mappings}")
        if self.redundancy < 1:
            raise ConfigError(f"redundancy must be at least 1, got {self.redundancy}")
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        if self.quorum_search not in ("auto", "exhaustive", "randomized"):
            raise ConfigError(f"unknown quorum_search '{self.quorum_search}'")

    @property
    def network(self) -> str:
        return self.name or self.topology.stem

    @property
    def quorum_file(self) -> Path | None:
        return None if self.quorum_source == "search" else Path(self.quorum_source)

    def to_values(self) -> dict[str, str]:
        """Flat key=value rendering, the inverse of `load_config`."""
        values = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(s.value for s in value)
            elif isinstance(value, Enum):
                value = value.value
            elif isinstance(value, bool):
                value = "true" if value else "false"
            values[f.name] = str(value)
        return values


_KEYS = {f.name for f in fields(ExperimentConfig)}
_PATH_KEYS = {"topology", "output_dir"}


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got '{raw}'")


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got '{raw}'") from None


def parse_config(
    values: dict[str, str], base_dir: Path | None = None
) -> ExperimentConfig:
    """Build a config from raw string values; relative paths resolve against base_dir.

    Raises:
        ConfigError: On unknown keys, bad values or a missing topology.
    """
    unknown = set(values) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if not values.get("topology"):
        raise ConfigError("config must name a topology")

    def resolve(raw: str) -> Path:
        path = Path(raw)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return path

    kwargs: dict = {}
    for key, raw in values.items():
        raw = raw.strip()
        if key in _PATH_KEYS:
            kwargs[key] = resolve(raw)
        elif key == "quorum_source":
            kwargs[key] = raw if raw == "search" else str(resolve(raw))
        elif key == "strategies":
            try:
                kwargs[key] = tuple(
                    Strategy(s.strip().lower()) for s in raw.split(",") if s.strip()
                )
            except ValueError as e:
                raise ConfigError(f"strategies: {e}") from None
        elif key == "fault_mode":
            try:
                kwargs[key] = FaultMode(raw.lower())
            except ValueError as e:
                raise ConfigError(f"fault_mode: {e}") from None
        elif key in ("fault_sweep", "compensation", "count_pass_through"):
            kwargs[key] = _parse_bool(key, raw)
        elif key in ("redundancy", "mappings", "seed", "search_budget", "route_budget"):
            kwargs[key] = _parse_int(key, raw)
        else:
            kwargs[key] = raw
    return ExperimentConfig(**kwargs)


def load_config(path: Path | str) -> ExperimentConfig:
    """Load a key=value config file.

    QCYCLE_<KEY> environment variables fill keys the file leaves unset.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigError: On invalid contents.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    values = {k: v for k, v in dotenv_values(path).items() if v is not None}
    for key in _KEYS - set(values):
        env = os.environ.get(f"{ENV_PREFIX}{key.upper()}")
        if env is not None:
            values[key] = env
            logger.debug(f"Config key '{key}' taken from environment")

    config = parse_config(values, base_dir=path.parent)
    logger.info(f"Loaded config {path.name}: network '{config.network}'")
    return config
