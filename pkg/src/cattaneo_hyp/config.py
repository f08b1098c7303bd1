"""Experiment configuration: a single JSON document resolved into a dataclass."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .errors import ConfigError

MODELS = ("cattaneo-1m1-3d", "ccj-3d", "cattaneo-1d", "general-lambda-nu")


def _default_tolerances() -> Dict[str, float]:
    return {
        "pairing": 1e-10,
        "null_space": 1e-10,
        "symmetrizer_residual": 1e-10,
        "hermitian": 1e-12,
        "coupling": 1e-12,
        "energy_bound": 1e-12,
        "strict_dissipativity": 1e-10,
        "l2_drift": 1e-10,
        "q_leak": 1e-12,
        "translation": 1e-10,
        "realness": 1e-12,
    }


def _default_wave() -> Dict[str, Any]:
    return {
        "N": 32, "L": 6.283185307179586, "center": [3.0, 0.0, 0.0], "r_B": 1.2, "r_Omega": 2.4,
        "probe": [0.0, 0.0, 1.0], "t_end": 10.0, "checkpoints": 101, "write_field": False,
    }


@dataclass
class ExperimentConfig:
    model: str = "cattaneo-1m1-3d"
    closure: str = "ideal-gas"
    closure_params: Dict[str, float] = field(default_factory=dict)
    tau: float = 1.0
    lam: float = 1.0
    nu: float = -1.0
    state: Dict[str, Any] = field(
        default_factory=lambda: {"rho": 1.0, "v": [0.0, 0.0, 0.0], "theta": 1.0, "q": [1.0, 1.0, 1.0]})
    equilibrium: Dict[str, Any] = field(
        default_factory=lambda: {"rho": 1.0, "v": [1.0, 0.0, 0.0], "theta": 1.0})
    box: Dict[str, List[float]] = field(default_factory=lambda: {"rho": [0.5, 2.0], "theta": [0.5, 2.0]})
    gap_samples: int = 2000
    sweep_states: int = 50
    sweep_directions: int = 8
    feasibility_directions: int = 29
    microlocal_samples: int = 200
    wave: Dict[str, Any] = field(default_factory=_default_wave)
    tolerances: Dict[str, float] = field(default_factory=_default_tolerances)
    seed: int = 0
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    out: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"model: unknown model {self.model!r}; choose from {list(MODELS)}")
        if not (isinstance(self.tau, (int, float)) and self.tau > 0):
            raise ConfigError(f"tau: relaxation time must be positive, got {self.tau!r}")
        for key in ("rho", "theta"):
            for where, d in (("state", self.state), ("equilibrium", self.equilibrium)):
                if not d.get(key, 0) > 0:
                    raise ConfigError(f"{where}.{key}: must be positive, got {d.get(key)!r}")
            lo, hi = self.box.get(key, (0, 0))
            if not 0 < lo <= hi:
                raise ConfigError(f"box.{key}: need 0 < lower <= upper, got {self.box.get(key)!r}")
        for key in ("gap_samples", "sweep_states", "sweep_directions", "microlocal_samples", "threads"):
            if int(getattr(self, key)) < 1:
                raise ConfigError(f"{key}: must be >= 1")
        unknown = set(self.wave) - set(_default_wave())
        if unknown:
            raise ConfigError(f"wave: unknown fields {sorted(unknown)}")
        self.wave = {**_default_wave(), **self.wave}
        unknown = set(self.tolerances) - set(_default_tolerances())
        if unknown:
            raise ConfigError(f"tolerances: unknown fields {sorted(unknown)}")
        self.tolerances = {**_default_tolerances(), **self.tolerances}
        if self.model == "cattaneo-1m1-3d":
            self.lam, self.nu = 1.0, -1.0

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: Optional[str], **overrides) -> "ExperimentConfig":
        data: Dict[str, Any] = {}
        if path:
            try:
                with open(path) as fh:
                    data = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config must be a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def sha256(self) -> str:
        # threads and output location do not affect results
        d = self.to_dict()
        d.pop("threads")
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()
