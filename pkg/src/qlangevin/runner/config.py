"""Scenario configuration with explicit units in key names.

Frequencies are given as ``value / 2 pi`` in MHz (``*_MHz`` keys), lengths in
cm (``*_cm``) and wavenumbers in rad/m (``*_rad_per_m``). Complex per-length
coefficients of a custom medium are ``[re, im]`` pairs in 1/m.

Example (YAML)::

    preset: rabi
    model: both
    drive:
      omega_c_MHz: 24
    grid:
      points: 16384
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from ..atomsfwm import MHZ, AtomicLevels, AtomicScenario, DriveParams, EnsembleParams
from ..correlator import FrequencyGrid, default_span
from ..errors import ConfigError
from ..phenomodel import BACKWARD, GEOMETRIES, CouplingSpec

PRESETS = ("group_delay", "rabi", "custom")
MODELS = ("macro", "micro", "both")

_LEVEL_KEYS = {
    "gamma31_MHz", "gamma32_MHz", "gamma41_MHz", "gamma42_MHz", "gamma12_MHz",
    "gamma13_MHz", "gamma23_MHz", "gamma14_MHz", "gamma24_MHz", "gamma34_MHz",
}

PRESET_VALUES = {
    "group_delay": {
        "drive": {"omega_p_MHz": 1.2, "omega_c_MHz": 12.0, "delta_p_MHz": 500.0},
        "ensemble": {"od": 80.0, "length_cm": 2.0, "delta_k_rad_per_m": 127.0},
    },
    "rabi": {
        "drive": {"omega_p_MHz": 1.2, "omega_c_MHz": 24.0, "delta_p_MHz": 500.0},
        "ensemble": {"od": 0.1, "length_cm": 0.2, "delta_k_rad_per_m": 127.0},
    },
}


@dataclass(frozen=True)
class CustomMedium:
    """Phenomenological medium with constant coefficients."""

    alpha1: complex = 0.0
    alpha2: complex = 0.0
    kappa: complex = 1.0
    delta_k: float = 0.0
    theta: float = 0.0
    length: float = 1.0

    def spec(self, geometry: str) -> CouplingSpec:
        return CouplingSpec(self.alpha1, self.alpha2, self.delta_k, self.kappa, self.theta, geometry, self.length)


@dataclass(frozen=True)
class ScenarioConfig:
    preset: str = "group_delay"
    model: str = "both"
    geometry: str = BACKWARD
    state: str = "full"
    levels: AtomicLevels = field(default_factory=AtomicLevels.rb85)
    drive: DriveParams | None = None
    ensemble: EnsembleParams | None = None
    custom: CustomMedium | None = None
    grid_points: int = 2**14
    span_mhz: float | None = None
    output_dir: str = "out"
    nln: bool = False
    plot: bool = False

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"unknown geometry {self.geometry!r}")
        if self.state not in ("full", "ground"):
            raise ConfigError(f"unknown steady state {self.state!r}")
        if self.preset == "custom":
            if self.custom is None:
                raise ConfigError("custom preset needs a 'medium' section")
            if self.model != "macro":
                raise ConfigError("custom media only support model=macro")
        elif self.drive is None or self.ensemble is None:
            raise ConfigError("atomic presets need drive and ensemble parameters")
        if self.span_mhz is not None and not self.span_mhz > 0:
            raise ConfigError("span must be positive")

    @property
    def is_atomic(self) -> bool:
        return self.preset != "custom"

    def scenario(self) -> AtomicScenario:
        return AtomicScenario(self.levels, self.drive, self.ensemble, self.state)

    def spec(self, geometry: str | None = None) -> CouplingSpec:
        geometry = geometry or self.geometry
        if self.is_atomic:
            return self.scenario().coupling_spec(geometry)
        return self.custom.spec(geometry)

    def grid(self) -> FrequencyGrid:
        if self.span_mhz is not None:
            span = self.span_mhz * MHZ
        elif self.is_atomic:
            span = default_span(self.drive.omega_c, self.levels.gamma13)
        else:
            span = 100 * MHZ
        return FrequencyGrid(self.grid_points, span)

    def models(self) -> tuple[str, ...]:
        return ("macro", "micro") if self.model == "both" else (self.model,)

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def echo(self) -> dict:
        """JSON-friendly summary in the configuration units."""
        out = {
            "preset": self.preset,
            "model": self.model,
            "geometry": self.geometry,
            "state": self.state,
            "grid_points": self.grid_points,
            "span_MHz": self.grid().span / MHZ,
            "nln": self.nln,
        }
        if self.is_atomic:
            out["drive"] = {
                "omega_p_MHz": _json_num(self.drive.omega_p / MHZ),
                "omega_c_MHz": _json_num(self.drive.omega_c / MHZ),
                "delta_p_MHz": self.drive.delta_p / MHZ,
            }
            out["ensemble"] = {
                "od": self.ensemble.od,
                "length_cm": self.ensemble.length * 100,
                "delta_k_rad_per_m": self.ensemble.delta_k,
            }
            out["levels"] = {f"{k}_MHz": getattr(self.levels, k) / MHZ for k in sorted(self.levels.__dataclass_fields__) if k.startswith("gamma")}
        else:
            c = self.custom
            out["medium"] = {
                "alpha1_per_m": _json_num(c.alpha1),
                "alpha2_per_m": _json_num(c.alpha2),
                "kappa_per_m": _json_num(c.kappa),
                "delta_k_rad_per_m": c.delta_k,
                "theta_rad": c.theta,
                "length_cm": c.length * 100,
            }
        return out


def _json_num(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _complex(value, key):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{key} must be a number or a [re, im] pair")
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} is not a number") from exc


def _take(section: dict, allowed: set, name: str) -> dict:
    if section is None:
        return {}
    if not isinstance(section, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return section


def from_mapping(data: dict) -> ScenarioConfig:
    """Build a configuration from a parsed mapping."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    top = {"preset", "model", "geometry", "state", "levels", "drive", "ensemble", "medium", "grid", "output_dir", "nln", "plot"}
    _take(data, top, "top level")
    preset = data.get("preset", "group_delay")
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")

    kw = {k: data[k] for k in ("model", "geometry", "state", "output_dir", "nln", "plot") if k in data}
    if preset == "custom":
        kw.setdefault("model", "macro")

    levels_in = _take(data.get("levels"), _LEVEL_KEYS, "levels")
    levels = AtomicLevels.rb85()
    if levels_in:
        levels = replace(levels, **{k[: -len("_MHz")]: float(v) * MHZ for k, v in levels_in.items()})

    drive = ensemble = custom = None
    if preset != "custom":
        base = PRESET_VALUES[preset]
        d = {**base["drive"], **_take(data.get("drive"), set(base["drive"]), "drive")}
        e = {**base["ensemble"], **_take(data.get("ensemble"), set(base["ensemble"]), "ensemble")}
        drive = DriveParams(
            _complex(d["omega_p_MHz"], "omega_p_MHz") * MHZ,
            _complex(d["omega_c_MHz"], "omega_c_MHz") * MHZ,
            float(d["delta_p_MHz"]) * MHZ,
        )
        ensemble = EnsembleParams(float(e["od"]), float(e["length_cm"]) / 100, float(e["delta_k_rad_per_m"]))
    else:
        keys = {"alpha1_per_m", "alpha2_per_m", "kappa_per_m", "delta_k_rad_per_m", "theta_rad", "length_cm"}
        m = _take(data.get("medium"), keys, "medium")
        custom = CustomMedium(
            alpha1=_complex(m.get("alpha1_per_m", 0.0), "alpha1_per_m"),
            alpha2=_complex(m.get("alpha2_per_m", 0.0), "alpha2_per_m"),
            kappa=_complex(m.get("kappa_per_m", 1.0), "kappa_per_m"),
            delta_k=float(m.get("delta_k_rad_per_m", 0.0)),
            theta=float(m.get("theta_rad", 0.0)),
            length=float(m.get("length_cm", 100.0)) / 100,
        )

    g = _take(data.get("grid"), {"points", "span_MHz"}, "grid")
    if "points" in g:
        kw["grid_points"] = int(g["points"])
    if "span_MHz" in g:
        kw["span_mhz"] = float(g["span_MHz"])
    cfg = ScenarioConfig(preset=preset, levels=levels, drive=drive, ensemble=ensemble, custom=custom, **kw)
    cfg.grid()  # validates the grid size
    if cfg.is_atomic and not np.isfinite(abs(cfg.drive.omega_c)):
        raise ConfigError("coupling Rabi frequency must be finite")
    return cfg


def load(path) -> ScenarioConfig:
    """Read a YAML or JSON configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return from_mapping(data or {})


def preset(name: str, **overrides) -> ScenarioConfig:
    return from_mapping({"preset": name, **overrides})
