from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional

from .core import DEFAULT_MAX_NODES
from .errors import DomainError

MAX_NODES_ENV = "BLOWUP_MAX_NODES"


def _presets_dir() -> str:
    here = os.path.dirname(os.path.abspath(__file__))
    return os.path.join(os.path.dirname(here), "presets")


def load_preset(name: str) -> Dict[str, Any]:
    if os.path.isabs(name) and os.path.exists(name):
        path = name
    else:
        fn = name if name.endswith(".json") else f"{name}.json"
        path = os.path.join(_presets_dir(), fn)
    if not os.path.exists(path):
        raise DomainError(f"unknown preset {name!r} (looked for {path})")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def max_nodes_from_env(default: int = DEFAULT_MAX_NODES) -> int:
    raw = os.environ.get(MAX_NODES_ENV)
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"{MAX_NODES_ENV} must be an integer, got {raw!r}")
    if value < 5:
        raise DomainError(f"{MAX_NODES_ENV} must be at least 5, got {value}")
    return value


@dataclass(frozen=True)
class ContinuationSettings:
    max_halvings: int = 10
    dp_min: float = 1e-5
    growth: float = 1.5
    successes_to_grow: int = 3
    max_growth: float = 8.0
    max_newton_iterations: int = 10
    jump_threshold: float = 0.3


@dataclass(frozen=True)
class OscillatorySettings:
    transient: float = 200.0
    return_tol: float = 1e-8
    rtol: float = 1e-11
    atol: float = 1e-13


@dataclass(frozen=True)
class SpectralSettings:
    l_max: int = 8
    cutoff: float = 3.2
    panels: int = 32
    panel_order: int = 16


@dataclass(frozen=True)
class SolverSettings:
    eps: float = 1e-10
    tol: float = 1e-10
    max_nodes: int = DEFAULT_MAX_NODES
    tail_threshold: float = 1e-4
    ladder_start: float = 1e-3
    initial_nodes: int = 801
    max_rung_splits: int = 3
    tol_relax_factor: float = 10.0
    max_tol_relaxations: int = 5
    continuation: ContinuationSettings = field(default_factory=ContinuationSettings)
    oscillatory: OscillatorySettings = field(default_factory=OscillatorySettings)
    spectral: SpectralSettings = field(default_factory=SpectralSettings)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolverSettings":
        data = dict(data)
        nested = {
            "continuation": ContinuationSettings,
            "oscillatory": OscillatorySettings,
            "spectral": SpectralSettings,
        }
        for key, klass in nested.items():
            if key in data:
                data[key] = klass(**data[key])
        return cls(**data)

    @classmethod
    def load(cls, preset: str = "default", **overrides: Any) -> "SolverSettings":
        settings = cls.from_dict(load_preset(preset))
        settings = replace(settings, max_nodes=max_nodes_from_env(settings.max_nodes))
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(settings, **clean) if clean else settings

    def eps_ladder(self, eps: Optional[float] = None):
        """Regularization rungs from ladder_start down to eps, one decade apart."""
        target = self.eps if eps is None else eps
        rungs = []
        value = self.ladder_start
        while value > target * (1 + 1e-12):
            rungs.append(value)
            value /= 10.0
        rungs.append(target)
        return tuple(rungs)
