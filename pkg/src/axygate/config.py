"""Run configuration: one JSON document with crystal, qubits, design, errors and run sections."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import constants

from .errors import ConfigError
from .physics import IonCrystal, QubitParams

TWO_PI = 2 * np.pi

DEFAULTS = {
    "crystal": {"axial_com_freq_hz": 120e3, "ion_mass_amu": 171.0, "gradient_t_per_m": 19.0},
    "qubits": {"rabi_freq_hz": 31e3, "zeeman_sensitivity_hz_per_t": 14e9,
               "qubit_freq_hz": 12.6e9},
    "design": {"target_phi_rad": float(np.pi / 4), "m": 16, "r_range": [45, 45],
               "tolerance_alpha": 1e-3, "tolerance_phi": 1e-3, "grid_points": 200,
               "gap_factor": 1.5},
    "errors": {"nbar": [0.0, 0.0], "trap_freq_offset": 0.0, "area_error": 0.0,
               "timing_error": 0.0, "readout_fidelity": [[1.0, 1.0], [1.0, 1.0]]},
    "run": {"path": "auto", "shots": 0, "seed": None, "output_dir": "out", "phases": 24,
            "fock_cutoff": [20, 20], "pulse_model": "resolved"},
}

_POSITIVE = {
    ("crystal", "axial_com_freq_hz"), ("crystal", "ion_mass_amu"), ("qubits", "rabi_freq_hz"),
    ("design", "tolerance_alpha"), ("design", "tolerance_phi"),
}


@dataclass(frozen=True)
class RunConfig:
    data: dict
    source: str = "<defaults>"

    def __getitem__(self, section: str) -> dict:
        return self.data[section]

    @property
    def hash(self) -> str:
        """Fingerprint of everything that affects results (the output location does not)."""
        data = copy.deepcopy(self.data)
        del data["run"]["output_dir"]
        canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def crystal(self) -> IonCrystal:
        c = self.data["crystal"]
        return IonCrystal.from_trap(TWO_PI * c["axial_com_freq_hz"],
                                    c["ion_mass_amu"] * constants.atomic_mass)

    def qubits(self) -> QubitParams:
        q = self.data["qubits"]
        return QubitParams.uniform(TWO_PI * q["rabi_freq_hz"],
                                   TWO_PI * q["zeeman_sensitivity_hz_per_t"],
                                   self.data["crystal"]["gradient_t_per_m"],
                                   TWO_PI * q["qubit_freq_hz"])

    def with_overrides(self, **run) -> "RunConfig":
        data = copy.deepcopy(self.data)
        data["run"].update({k: v for k, v in run.items() if v is not None})
        return validate(data, self.source)


def _merge(defaults: dict, given: dict, where: str) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if key not in defaults:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}.{key}: expected an object")
            out[key] = _merge(defaults[key], value, f"{where}.{key}")
        else:
            out[key] = value
    return out


def _number(data, section, key, integer=False):
    v = data[section][key]
    ok = isinstance(v, int) if integer else isinstance(v, (int, float))
    if isinstance(v, bool) or not ok or not np.isfinite(v):
        kind = "an integer" if integer else "a finite number"
        raise ConfigError(f"{section}.{key}: expected {kind}, got {v!r}")
    return v


def validate(data: dict, source: str = "<dict>") -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    data = _merge(DEFAULTS, data, "config")
    for section in ("crystal", "qubits", "errors"):
        for key, v in data[section].items():
            if not isinstance(v, list):
                _number(data, section, key)
    for section, key in _POSITIVE:
        if _number(data, section, key) <= 0:
            raise ConfigError(f"{section}.{key}: must be positive")
    d = data["design"]
    _number(data, "design", "target_phi_rad")
    if not -np.pi < d["target_phi_rad"] <= np.pi:
        raise ConfigError("design.target_phi_rad: must lie in (-pi, pi]")
    for key in ("m", "grid_points"):
        _number(data, "design", key, integer=True)
    if d["m"] < 2 or d["m"] % 2:
        raise ConfigError("design.m: must be an even integer >= 2")
    r = d["r_range"]
    if (not isinstance(r, list) or len(r) != 2 or not all(isinstance(x, int) for x in r)
            or r[0] < 1 or r[1] < r[0]):
        raise ConfigError(f"design.r_range: expected [lo, hi] integers with 1 <= lo <= hi, got {r}")
    if _number(data, "design", "gap_factor") < 1:
        raise ConfigError("design.gap_factor: must be >= 1")
    e = data["errors"]
    nbar = e["nbar"]
    if not isinstance(nbar, list) or len(nbar) != 2 or any(
            not isinstance(x, (int, float)) or x < 0 for x in nbar):
        raise ConfigError(f"errors.nbar: expected two non-negative numbers, got {nbar}")
    if e["trap_freq_offset"] <= -1:
        raise ConfigError("errors.trap_freq_offset: must exceed -1")
    for key in ("area_error", "timing_error"):
        if e[key] <= -1:
            raise ConfigError(f"errors.{key}: must exceed -1")
    rf = e["readout_fidelity"]
    if (not isinstance(rf, list) or len(rf) != 2
            or any(not isinstance(p, list) or len(p) != 2 for p in rf)
            or any(not isinstance(x, (int, float)) or not 0 <= x <= 1 for p in rf for x in p)):
        raise ConfigError("errors.readout_fidelity: expected [[dark, bright], [dark, bright]] in [0, 1]")
    run = data["run"]
    if run["path"] not in ("auto", "analytic", "oracle"):
        raise ConfigError(f"run.path: expected auto|analytic|oracle, got {run['path']!r}")
    if run["pulse_model"] not in ("kick", "resolved"):
        raise ConfigError(f"run.pulse_model: expected kick|resolved, got {run['pulse_model']!r}")
    for key in ("shots", "phases"):
        _number(data, "run", key, integer=True)
    if run["shots"] < 0:
        raise ConfigError("run.shots: must be >= 0")
    if run["phases"] < 5:
        raise ConfigError("run.phases: need at least 5 phase points")
    if run["seed"] is not None and (isinstance(run["seed"], bool) or not isinstance(run["seed"], int)
                                    or run["seed"] < 0):
        raise ConfigError(f"run.seed: expected a non-negative integer, got {run['seed']!r}")
    if run["shots"] > 0 and run["seed"] is None:
        raise ConfigError("run.seed: required when run.shots > 0")
    fc = run["fock_cutoff"]
    if not isinstance(fc, list) or len(fc) != 2 or any(not isinstance(x, int) or x < 2 for x in fc):
        raise ConfigError(f"run.fock_cutoff: expected two integers >= 2, got {fc}")
    if not isinstance(run["output_dir"], str) or not run["output_dir"]:
        raise ConfigError("run.output_dir: expected a non-empty path")
    return RunConfig(data, source)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return validate({}, "<defaults>")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc
    try:
        return validate(data, str(path))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
