"""Scenario configuration: one JSON document describing an experiment run.

Fields an experiment does not use stay ``None``; the fields it uses are
filled with its defaults before validation, so the normalized dump echoes
every value the run depends on.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from oqt_sim.config.settings import RunMode
from oqt_sim.errors import ConfigurationError


class ExperimentName(str, Enum):
    FIG1 = "fig1"
    NO_SIGNALLING = "no_signalling"
    APPENDIX_A = "appendix_a"
    CUSTOM = "custom"


class ObservableKind(str, Enum):
    COHERENCE = "coherence"
    RANDOM = "random"
    ENERGY = "energy"
    POPULATION = "population"


class ObservableSpec(BaseModel):
    """An observable in the energy basis.

    ``coherence`` is |i><j| + |j><i| for ``pair``; ``random`` a normalized
    random Hermitian matrix drawn from ``seed``; ``population`` the projector
    on ``index``; ``energy`` the Hamiltonian.
    """

    model_config = ConfigDict(extra="forbid")

    kind: ObservableKind
    label: Optional[str] = None
    pair: Optional[List[int]] = None
    index: Optional[int] = Field(default=None, ge=0)
    seed: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _check_kind(self) -> "ObservableSpec":
        if self.kind is ObservableKind.COHERENCE:
            if self.pair is None or len(self.pair) != 2 or self.pair[0] == self.pair[1]:
                raise ValueError("coherence observable needs a pair of two distinct levels")
        if self.kind is ObservableKind.POPULATION and self.index is None:
            raise ValueError("population observable needs an index")
        return self


EXPERIMENT_DEFAULTS: Dict[ExperimentName, Dict[str, Any]] = {
    ExperimentName.FIG1: {
        "dim": 25,
        "dt": 1e-4,
        "master_dt": 1e-3,
        "t_end": 32.0,
        "trajectory_t_end": 1.0,
        "alpha_grid": [0.0, 0.5, 1.0, 2.0],
        "sample_stride": 10,
        "ensemble_size": 200,
        "spectrum_range": [0.0, 10.0],
        "spacing_std": 0.01,
        "init_state_center": 0.6,
        "init_state_std": 0.2,
        "random_phases": True,
    },
    ExperimentName.NO_SIGNALLING: {
        "dim_a": 4,
        "dim_b": 4,
        "alpha_eff": 1.0,
        "dt": 1e-3,
        "n_steps": 2000,
        "sample_stride": 10,
    },
    ExperimentName.APPENDIX_A: {
        "dim": 8,
        "alpha_eff": 1.0,
        "j_eff": 1.0,
        "ensemble_size": 2000,
        "n_sectors": 2,
        "coupling_time": 8.0,
        "coupling_dt": 0.01,
    },
    ExperimentName.CUSTOM: {
        "dim": 8,
        "alpha_eff": 1.0,
        "j_eff": 0.0,
        "dt": 1e-3,
        "n_steps": 2000,
        "sample_stride": 10,
        "ensemble_size": 500,
        "n_sectors": 2,
        "spectrum_range": [0.0, 10.0],
        "spacing_std": 0.01,
        "init_state_center": 0.6,
        "init_state_std": 0.2,
        "random_phases": True,
        "observables": [{"kind": "energy"}],
    },
}

TRAJECTORY_GUARD = 0.1
MASTER_GUARD = 0.05


class ScenarioConfig(BaseModel):
    """Full description of one experiment run."""

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    experiment: ExperimentName
    seed: int = Field(default=0, ge=0)
    mode: RunMode = RunMode.MASTER
    output_dir: str = "out"

    dim: Optional[int] = Field(default=None, ge=1, le=200)
    dim_a: Optional[int] = Field(default=None, ge=1)
    dim_b: Optional[int] = Field(default=None, ge=1)

    alpha_eff: Optional[float] = Field(default=None, ge=0)
    alpha_grid: Optional[List[float]] = None
    j_eff: Optional[float] = Field(default=None, ge=0)

    dt: Optional[float] = Field(default=None, gt=0)
    master_dt: Optional[float] = Field(default=None, gt=0)
    n_steps: Optional[int] = Field(default=None, ge=0)
    t_end: Optional[float] = Field(default=None, gt=0)
    trajectory_t_end: Optional[float] = Field(default=None, gt=0)
    sample_stride: Optional[int] = Field(default=None, ge=1)
    coupling_time: Optional[float] = Field(default=None, gt=0)
    coupling_dt: Optional[float] = Field(default=None, gt=0)

    ensemble_size: Optional[int] = Field(default=None, ge=1)
    seeds: Optional[List[int]] = None
    n_sectors: Optional[int] = Field(default=None, ge=1)

    spectrum_range: Optional[List[float]] = None
    spacing_std: Optional[float] = Field(default=None, ge=0)
    init_state_center: Optional[float] = None
    init_state_std: Optional[float] = Field(default=None, gt=0)
    random_phases: Optional[bool] = None

    observables: Optional[List[ObservableSpec]] = None

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        try:
            name = ExperimentName(data.get("experiment"))
        except ValueError:
            return data
        filled = dict(data)
        for key, value in EXPERIMENT_DEFAULTS[name].items():
            if filled.get(key) is None:
                filled[key] = value
        return filled

    @model_validator(mode="after")
    def _check_guards(self) -> "ScenarioConfig":
        if self.alpha_grid is not None and any(a < 0 for a in self.alpha_grid):
            raise ValueError("alpha_grid values must be >= 0")
        if self.seeds is not None and any(s < 0 for s in self.seeds):
            raise ValueError("seeds must be >= 0")
        if self.spectrum_range is not None:
            if len(self.spectrum_range) != 2 or self.spectrum_range[0] >= self.spectrum_range[1]:
                raise ValueError("spectrum_range must be [low, high] with low < high")

        alpha_max = max(self.alpha_grid) if self.alpha_grid else (self.alpha_eff or 0.0)
        j = self.j_eff or 0.0

        if self.experiment is ExperimentName.APPENDIX_A:
            if self.coupling_dt > TRAJECTORY_GUARD:
                raise ValueError(
                    f"stability guard alpha_eff*dt <= {TRAJECTORY_GUARD} violated "
                    f"by coupling_dt {self.coupling_dt}"
                )
            if self.alpha_eff == 0 or self.j_eff == 0:
                raise ValueError("appendix_a needs alpha_eff > 0 and j_eff > 0")
            return self

        if self.dt is not None:
            if alpha_max * self.dt > TRAJECTORY_GUARD:
                raise ValueError(
                    f"stability guard alpha_eff*dt <= {TRAJECTORY_GUARD} violated: "
                    f"{alpha_max * self.dt:.4g}"
                )
            if j * self.dt > TRAJECTORY_GUARD:
                raise ValueError(
                    f"stability guard j_eff*dt <= {TRAJECTORY_GUARD} violated: {j * self.dt:.4g}"
                )

        master_dt = self.master_dt if self.master_dt is not None else self.dt
        if master_dt is not None and (alpha_max + j) * master_dt > MASTER_GUARD:
            raise ValueError(
                f"stability guard (alpha_eff+j_eff)*dt <= {MASTER_GUARD} violated: "
                f"{(alpha_max + j) * master_dt:.4g}"
            )
        return self

    @property
    def spectrum(self) -> Tuple[float, float]:
        low, high = self.spectrum_range or (0.0, 10.0)
        return float(low), float(high)


def _describe(error: ValidationError) -> str:
    unknown = [
        ".".join(str(p) for p in e["loc"])
        for e in error.errors()
        if e["type"] == "extra_forbidden"
    ]
    if unknown:
        return "unknown keys: " + ", ".join(unknown)
    parts = []
    for e in error.errors():
        where = ".".join(str(p) for p in e["loc"]) or "config"
        parts.append(f"{where}: {e['msg']}")
    return "; ".join(parts)


def parse_config(source: Union[str, Path, Dict[str, Any]]) -> ScenarioConfig:
    """Parse a config from a path, inline JSON text or an already-loaded mapping."""
    if isinstance(source, dict):
        data = source
    else:
        text = str(source)
        path = Path(text)
        if isinstance(source, Path) or not text.lstrip().startswith("{"):
            if not path.exists():
                raise ConfigurationError(f"config file not found: {path}")
            text = path.read_text(encoding="utf-8")
        if not text.strip():
            raise ConfigurationError("config text is empty")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config is not a JSON document: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")

    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(_describe(e)) from e


def config_to_dict(config: ScenarioConfig) -> Dict[str, Any]:
    return config.model_dump(mode="json")


def emit_config(config: ScenarioConfig) -> str:
    """Normalized JSON text; ``parse_config(emit_config(c)) == c``."""
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True)


def with_overrides(config: ScenarioConfig, overrides: Dict[str, Any]) -> ScenarioConfig:
    """Re-validate ``config`` with some fields replaced; ``None`` values are ignored."""
    data = config_to_dict(config)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(data)
