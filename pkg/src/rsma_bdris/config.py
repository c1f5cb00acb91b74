"""Plain ``key = value`` experiment configuration.

One assignment per line, ``#`` starts a comment, lists are
comma-separated.  Missing keys keep the reference-scenario defaults and
unknown keys are rejected.  Every diagnostic carries a line number.
"""
from __future__ import annotations

from dataclasses import fields

from .channel import Scenario
from .errors import ConfigError
from .sim import ATTACKS, SAFE_MODES, ALLOCATION_CSI, SWEEP_AXES, ExperimentSpec

_INT = {"num_antennas", "num_elements", "group_size", "num_users", "trials", "seed", "grid_size"}
_FLOAT = {"ris_distance", "ris_azimuth", "pathloss_exponent", "csi_error_bs_user", "csi_error_bs_ris",
          "csi_error_ris_user", "csi_error", "sic_error", "noise_power_dbm", "transmit_power_dbm"}
_LIST = {"user_distances", "user_azimuths", "adversary_weights", "sweep_values"}
_CHOICE = {
    "uplink_mode": ("absorb", "reflect"),
    "scheme": ("rsma", "sdma", "both"),
    "attack": ATTACKS,
    "architecture": ("single", "group", "fully"),
    "safe_mode": SAFE_MODES,
    "allocation_csi": ALLOCATION_CSI,
    "sweep_axis": SWEEP_AXES,
}
_ALIASES = {"mode": "uplink_mode", "arch": "architecture"}
_FRACTIONS = {"csi_error_bs_user", "csi_error_bs_ris", "csi_error_ris_user", "csi_error", "sic_error"}
KEYS = _INT | _FLOAT | _LIST | set(_CHOICE) | {"sweep"}


def _parse_value(key, raw, lineno):
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
        if key in _LIST:
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if not items:
                raise ValueError("empty list")
            return tuple(float(x) for x in items)
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r} for {key}", lineno) from None
    if key in _CHOICE:
        if raw not in _CHOICE[key]:
            raise ConfigError(f"{key} must be one of {', '.join(_CHOICE[key])}, got {raw!r}", lineno)
        return raw
    if key == "sweep":
        return parse_sweep(raw, lineno)
    raise ConfigError(f"unknown key {key!r}", lineno)


def parse_sweep(text, lineno=None):
    """``axis=v1,v2,...`` to ``(axis, values)``; values must be sorted."""
    if "=" not in text:
        raise ConfigError("sweep must look like axis=v1,v2,...", lineno)
    axis, raw = (s.strip() for s in text.split("=", 1))
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}", lineno)
    try:
        values = tuple(float(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"cannot parse sweep values {raw!r}", lineno) from None
    if not values:
        raise ConfigError("sweep value list is empty", lineno)
    if list(values) != sorted(values):
        raise ConfigError("sweep values must be sorted", lineno)
    return axis, values


def parse_config_text(text):
    """Parse configuration text into ``(Scenario, ExperimentSpec)``."""
    values, where = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in where:
            raise ConfigError(f"duplicate key {key!r} (first set on line {where[key]})", lineno)
        val = _parse_value(key, raw, lineno)
        if key in _FRACTIONS and not 0.0 <= val <= 1.0:
            raise ConfigError(f"{key} must lie in [0, 1]", lineno)
        if key in ("trials", "num_antennas", "num_elements", "group_size", "num_users", "grid_size") and val < 1:
            raise ConfigError(f"{key} must be >= 1", lineno)
        values[key], where[key] = val, lineno
    return build(values, where)


def _last_line(where, *keys):
    lines = [where[k] for k in keys if k in where]
    return max(lines) if lines else None


def build(values, where=None):
    """Validate parsed values and assemble the scenario and experiment."""
    where = where or {}
    defaults = Scenario()
    M = values.get("num_antennas", defaults.num_antennas)
    U = values.get("num_users", defaults.num_users)
    if M < U:
        raise ConfigError(f"M ≥ U violated (M={M}, U={U})", _last_line(where, "num_antennas", "num_users"))
    D = values.get("num_elements", defaults.num_elements)
    Dg = values.get("group_size", defaults.group_size)
    arch = values.get("architecture", "fully")
    if (arch == "group" or "group_size" in values) and D % Dg:
        raise ConfigError(f"D divisible by D_g violated (D={D}, D_g={Dg})",
                          _last_line(where, "num_elements", "group_size", "architecture"))
    kw = {f.name: values[f.name] for f in fields(Scenario) if f.name in values}
    if "csi_error" in values:
        for k in ("csi_error_bs_user", "csi_error_bs_ris", "csi_error_ris_user"):
            kw.setdefault(k, values["csi_error"])
    if U != defaults.num_users:
        for k in ("user_distances", "user_azimuths"):
            if k not in kw:
                raise ConfigError(f"{k} must be given when num_users differs from {defaults.num_users}",
                                  where.get("num_users"))
    try:
        scenario = Scenario(**kw)
    except ConfigError as exc:
        bad = [k for k in kw if k in exc.message]
        raise ConfigError(exc.message, _last_line(where, *bad) if bad else None) from None

    axis, sweep_values = None, ()
    if "sweep" in values:
        axis, sweep_values = values["sweep"]
    if "sweep_axis" in values:
        axis = values["sweep_axis"]
        sweep_values = values.get("sweep_values", ())
    scheme = values.get("scheme", "both")
    try:
        spec = ExperimentSpec(
            scenario=scenario,
            schemes=("rsma", "sdma") if scheme == "both" else (scheme,),
            attack=values.get("attack", "aligned"),
            architecture=arch,
            trials=values.get("trials", 1000),
            seed=values.get("seed", 0),
            sweep_axis=axis,
            sweep_values=sweep_values,
            safe_mode=values.get("safe_mode", "static-ris"),
            allocation_csi=values.get("allocation_csi", "pilot"),
            grid_size=values.get("grid_size", 128),
        )
    except ConfigError as exc:
        bad = [k for k in values if k in exc.message]
        raise ConfigError(exc.message, _last_line(where, *bad) if bad else None) from None
    return scenario, spec


def parse_config(path):
    """Read and validate a configuration file."""
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())
