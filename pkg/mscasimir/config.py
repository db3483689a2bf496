from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Iterable

from mscasimir.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "config/tolerances.json"


@dataclass(slots=True)
class Tolerances:
    cluster_gap: float = 1e-7
    residual: float = 1e-9
    oracle: float = 1e-8
    null_vector: float = 1e-10
    kernel_rel: float = 1e-9
    wall: float = 1e-9
    coords: float = 1e-12
    seed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Tolerances":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {', '.join(unknown)}")
        values: Dict[str, Any] = {}
        for key, raw in data.items():
            try:
                values[key] = int(raw) if key == "seed" else float(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"tolerance {key} is not a number: {raw!r}") from exc
        return cls(**values)

    def with_overrides(self, overrides: Iterable[str]) -> "Tolerances":
        """Apply NAME=VALUE strings on top of the current values."""
        data = self.to_dict()
        for item in overrides:
            name, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"expected NAME=VALUE, got {item!r}")
            data[name.strip()] = value.strip()
        return Tolerances.from_dict(data)


DEFAULT_TOLERANCES = Tolerances()


def load_tolerances(config_path: str = DEFAULT_CONFIG_PATH) -> Tolerances:
    try:
        payload = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        logger.info("tolerance file %s not found, using defaults", config_path)
        return Tolerances()
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed tolerance file {config_path}: {exc}") from exc

    if not isinstance(payload, dict):
        raise ConfigError("tolerance config must be a JSON object")
    return Tolerances.from_dict(payload)
