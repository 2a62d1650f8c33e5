"""Scenario configuration: TOML parsing, validation, defaults.

A scenario file fully determines a run: beam geometry and material,
frequency grid, band plan, fitting and burst settings, and the sweep
schedule.  Unknown sections or keys are rejected so typos fail loudly.
The resolved (fully defaulted) configuration is embedded in every
artifact for reproducibility.
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidMaterialError
from .vecfit import BandPlan, default_band_plan
from .waveguide import IN, CrossSection, Material, WaveguideSpec

__all__ = ["ScenarioConfig", "load_config", "default_config"]

_SCHEMA = {
    "scenario": {"name", "excitation", "bc_left", "bc_right"},
    "material": {"rho", "E", "G", "eta"},
    "geometry": {
        "length_in", "width_in", "height_in",
        "actuator_left_in", "actuator_right_in",
        "sensor_start_in", "sensor_stop_in", "n_sensors",
    },
    "grid": {"f_start_hz", "f_stop_hz", "resolution_hz"},
    "bands": {"edges_hz", "budgets"},
    "vf": {"prominence_db"},
    "burst": {"n_cycles", "sample_rate_hz", "kappa", "gamma"},
    "sweep": {
        "f_center_start_hz", "f_center_stop_hz", "f_center_step_hz",
        "out_step_hz", "f_min_hz", "spread_rel_limit",
    },
}

_DEFAULTS = {
    "scenario": {"name": "free-free", "excitation": "flexural",
                 "bc_left": "free", "bc_right": "free"},
    "material": {"rho": 2700.0, "E": 69e9, "G": 26e9, "eta": 0.01},
    "geometry": {
        "length_in": 48.0, "width_in": 1.0, "height_in": 0.125,
        "actuator_left_in": 18.5, "actuator_right_in": 19.0,
        "sensor_start_in": 19.0, "sensor_stop_in": 41.0, "n_sensors": 23,
    },
    "grid": {"f_start_hz": 10.0, "f_stop_hz": 50000.0, "resolution_hz": 2.0},
    "bands": {"edges_hz": [], "budgets": []},
    "vf": {"prominence_db": 3.0},
    "burst": {"n_cycles": 0, "sample_rate_hz": 1e6, "kappa": 0.0, "gamma": 0.0},
    "sweep": {
        "f_center_start_hz": 2000.0, "f_center_stop_hz": 48000.0,
        "f_center_step_hz": 1000.0, "out_step_hz": 100.0, "f_min_hz": 2000.0,
        "spread_rel_limit": 0.05,
    },
}


@dataclass
class ScenarioConfig:
    """Validated, fully defaulted scenario settings."""

    sections: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {}
        for sec, defaults in _DEFAULTS.items():
            merged[sec] = dict(defaults)
            merged[sec].update(self.sections.get(sec, {}))
        for sec in self.sections:
            if sec not in _SCHEMA:
                raise ConfigError(f"unknown config section [{sec}]")
            extra = set(self.sections[sec]) - _SCHEMA[sec]
            if extra:
                raise ConfigError(
                    f"unknown key(s) in [{sec}]: {', '.join(sorted(extra))}"
                )
        self.sections = merged
        self._validate()

    def _validate(self):
        sc = self.sections["scenario"]
        if sc["excitation"] not in ("flexural", "longitudinal"):
            raise ConfigError(
                f"scenario.excitation must be 'flexural' or 'longitudinal', "
                f"got {sc['excitation']!r}"
            )
        for side in ("bc_left", "bc_right"):
            if sc[side] not in ("free", "clamped", "pinned"):
                raise ConfigError(f"scenario.{side} must be free/clamped/pinned")
        g = self.sections["grid"]
        if not (0 < g["f_start_hz"] < g["f_stop_hz"]):
            raise ConfigError("grid: need 0 < f_start_hz < f_stop_hz")
        if g["resolution_hz"] <= 0:
            raise ConfigError("grid.resolution_hz must be > 0")
        geo = self.sections["geometry"]
        if geo["n_sensors"] < 2:
            raise ConfigError("geometry.n_sensors must be >= 2")
        b = self.sections["bands"]
        if bool(b["edges_hz"]) != bool(b["budgets"]):
            raise ConfigError("bands: edges_hz and budgets must be given together")
        if b["edges_hz"] and len(b["edges_hz"]) != len(b["budgets"]) + 1:
            raise ConfigError("bands: need len(edges_hz) == len(budgets) + 1")
        # construct early so field errors surface as ConfigError
        try:
            self.waveguide_spec()
            self.band_plan()
        except ConfigError:
            raise
        except (ValueError, TypeError, InvalidMaterialError) as exc:
            raise ConfigError(str(exc)) from exc

    # -- derived objects --

    @property
    def excitation(self):
        return self.sections["scenario"]["excitation"]

    @property
    def name(self):
        return self.sections["scenario"]["name"]

    def material(self):
        m = self.sections["material"]
        return Material(rho=m["rho"], E=m["E"], G=m["G"], eta=m["eta"])

    def waveguide_spec(self):
        geo = self.sections["geometry"]
        sc = self.sections["scenario"]
        sensors = np.linspace(
            geo["sensor_start_in"], geo["sensor_stop_in"], int(geo["n_sensors"])
        ) * IN
        if sensors.size == 0:
            raise ConfigError("geometry: empty sensor list")
        mat = self.material()
        return WaveguideSpec(
            material=mat,
            section=CrossSection.rectangular(
                geo["width_in"] * IN, geo["height_in"] * IN, mat
            ),
            length=geo["length_in"] * IN,
            actuator_edges=(geo["actuator_left_in"] * IN, geo["actuator_right_in"] * IN),
            sensor_positions=sensors,
            bc_left=sc["bc_left"],
            bc_right=sc["bc_right"],
            excitation_mode=sc["excitation"],
        )

    def freq_grid(self, paper_grid=False):
        """Angular-frequency grid [rad/s] from the grid section."""
        g = self.sections["grid"]
        res = 0.25 if paper_grid else g["resolution_hz"]
        f = np.arange(g["f_start_hz"], g["f_stop_hz"] + 0.5 * res, res)
        return 2.0 * np.pi * f

    def band_plan(self):
        b = self.sections["bands"]
        if b["edges_hz"]:
            edges = [float(x) for x in b["edges_hz"]]
            bands = list(zip(edges[:-1], edges[1:]))
            return BandPlan(bands=bands, budgets=[int(x) for x in b["budgets"]])
        g = self.sections["grid"]
        return default_band_plan(self.excitation, g["f_start_hz"], g["f_stop_hz"])

    def burst_params(self):
        """(n_cycles, sample_rate, kappa, gamma) with mode-aware defaults."""
        bu = self.sections["burst"]
        n_cycles = int(bu["n_cycles"]) or 2
        kappa = bu["kappa"] or (3.0 if self.excitation == "flexural" else 1.2)
        gamma = bu["gamma"] or None  # None -> 3/T_b at extraction time
        return n_cycles, float(bu["sample_rate_hz"]), float(kappa), gamma

    def sweep_centers(self):
        s = self.sections["sweep"]
        return np.arange(
            s["f_center_start_hz"],
            s["f_center_stop_hz"] + 0.5 * s["f_center_step_hz"],
            s["f_center_step_hz"],
        )

    def to_dict(self):
        """Resolved configuration for embedding in artifacts."""
        return {sec: dict(vals) for sec, vals in self.sections.items()}

    @classmethod
    def from_dict(cls, d):
        return cls(sections={sec: dict(vals) for sec, vals in d.items()})


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return ScenarioConfig(sections=raw)


def default_config(**overrides):
    """Reference free-free scenario; ``overrides`` patch whole sections,
    e.g. ``default_config(scenario={'excitation': 'longitudinal'})``."""
    sections = {}
    for sec, vals in overrides.items():
        sections[sec] = dict(vals)
    return ScenarioConfig(sections=sections)
