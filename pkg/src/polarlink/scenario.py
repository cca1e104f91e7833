"""Scenario files.

INI-style text with sections ``[link]``, ``[surface]``, ``[controller]``,
``[estimator]`` and ``[experiment]``. Keys in the first three are the field
names of LinkScenario, SurfaceModel and SweepConfig. Lists are comma
separated; ``none`` leaves an optional value unset. Relative paths resolve
against the scenario file's directory. Units are SI (Hz, m, degrees, volts,
seconds) except powers (dBm) and gains/losses (dB, dBi).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .channel import LinkScenario
from .controller import SweepConfig
from .metasurface import RotationTable, SurfaceModel, load_loss_table

DEFAULT_SEED = 42


class ConfigError(ValueError):
    pass


def _float(v):
    return float(v)


def _opt_float(v):
    return None if v.strip().lower() in ("", "none") else float(v)


def _bool(v):
    t = v.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _floats(v):
    return tuple(float(x) for x in v.split(",") if x.strip())


def _bypass(v):
    return None if v.strip().lower() in ("geometry", "none") else float(v)


LINK_KEYS = {
    "frequency": _float,
    "tx_power_dbm": _float,
    "tx_orientation": _float,
    "rx_orientation": _float,
    "tx_rx_distance": _float,
    "tx_surface_distance": _float,
    "bypass_fraction": _bypass,
    "surface_side": _opt_float,
    "beamwidth_deg": _opt_float,
    "combining_phase_deg": _float,
    "crosspol_floor_db": _float,
    "noise_floor_dbm": _float,
    "noise_enabled": _bool,
    "noise_sigma_db": _float,
    "n_samples": int,
    "rx_sensitivity_dbm": _opt_float,
    "antenna_gains_dbi": _floats,
    "rng_seed": int,
}
LINK_REQUIRED = ("frequency", "tx_power_dbm", "tx_orientation", "rx_orientation", "tx_rx_distance")

SURFACE_KEYS = {
    "enabled": _bool,
    "rotation_table": str,
    "insertion_loss_db": _float,
    "mode": str,
    "reflective_rotation_factor": _float,
    "loss_table": str,
}

CONTROLLER_KEYS = {
    "n_iterations": int,
    "steps_per_axis": int,
    "v_min": _float,
    "v_max": _float,
    "settle_time_s": _float,
    "window": str,
    "attribution_lag": int,
}

ESTIMATOR_KEYS = {"resolution": _float, "alignment": str, "step": _float}

EXPERIMENT_KEYS = {"distances": _floats, "frequencies": _floats, "tx_powers_dbm": _floats}

SECTIONS = {
    "link": LINK_KEYS,
    "surface": SURFACE_KEYS,
    "controller": CONTROLLER_KEYS,
    "estimator": ESTIMATOR_KEYS,
    "experiment": EXPERIMENT_KEYS,
}


@dataclass(frozen=True)
class EstimatorConfig:
    resolution: float = 1.0
    alignment: str = "absent"
    step: float = 1.0


@dataclass(frozen=True)
class Scenario:
    link: LinkScenario
    controller: SweepConfig = SweepConfig()
    estimator: EstimatorConfig = EstimatorConfig()
    distances: tuple = ()
    frequencies: tuple = ()
    tx_powers_dbm: tuple = ()
    source: Path | None = field(default=None, compare=False)

    def distance_list(self) -> tuple:
        return self.distances or (self.link.tx_rx_distance,)


def _parse_section(cp, name) -> dict:
    if not cp.has_section(name):
        return {}
    schema = SECTIONS[name]
    out = {}
    for key, raw in cp.items(name):
        if key not in schema:
            raise ConfigError(f"[{name}] unknown key {key!r}")
        try:
            out[key] = schema[key](raw)
        except ValueError as exc:
            raise ConfigError(f"[{name}] {key} = {raw!r}: {exc}") from None
    return out


def parse_scenario(text: str, base_dir: Path | None = None, seed: int | None = None) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed scenario file: {exc}") from None
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
    base_dir = base_dir or Path(".")

    link = _parse_section(cp, "link")
    missing = [k for k in LINK_REQUIRED if k not in link]
    if missing:
        raise ConfigError(f"[link] missing required keys: {', '.join(missing)}")
    link.setdefault("rng_seed", DEFAULT_SEED)
    if seed is not None:
        link["rng_seed"] = seed

    surf = _parse_section(cp, "surface")
    surface = None
    if cp.has_section("surface") and surf.pop("enabled", True):
        table = surf.pop("rotation_table", "builtin")
        try:
            if table != "builtin":
                surf["rotation_table"] = RotationTable.from_csv(base_dir / table)
            if "loss_table" in surf:
                surf["loss_table"] = load_loss_table(base_dir / surf["loss_table"])
            surface = SurfaceModel(**surf)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"[surface] {exc}") from None

    try:
        link_scenario = LinkScenario(surface=surface, **link)
    except ValueError as exc:
        raise ConfigError(f"[link] {exc}") from None
    try:
        controller = SweepConfig(**_parse_section(cp, "controller"))
    except ValueError as exc:
        raise ConfigError(f"[controller] {exc}") from None
    est = EstimatorConfig(**_parse_section(cp, "estimator"))
    if est.alignment not in ("absent", "min_rotation") or est.resolution <= 0 or est.step <= 0:
        raise ConfigError(f"[estimator] invalid settings: {est}")
    exp = _parse_section(cp, "experiment")
    if any(d <= 0 for d in exp.get("distances", ())):
        raise ConfigError("[experiment] distances must be positive")
    return Scenario(link_scenario, controller, est, **exp)


def load_scenario(path, seed: int | None = None) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from None
    sc = parse_scenario(text, path.parent, seed)
    return Scenario(sc.link, sc.controller, sc.estimator, sc.distances, sc.frequencies, sc.tx_powers_dbm, path)
