"""Flat ``key = value`` run configuration for the command-line front end.

Frequencies are always MHz meaning value/2pi.  Symbolic values:

* ``delta_w_mhz``: ``light_shift``, ``corrected`` or ``cooling``
  (delta_LS - Gamma_eff/2), resolved for every curve / point;
* ``omega_st_mhz``: ``optimal`` (closed-form optimum ratio) or ``numeric``
  (golden-section optimizer).

At most one of the drive keys may hold a comma-separated list; each value
produces its own set of output columns.  ``output = -`` writes to stdout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import AMU, AtomSpec, Scheme, mhz, preset


class ConfigError(ValueError):
    pass


ATOM_KEYS = ("ion", "gamma_mhz", "beta_eg", "lambda_w_nm", "lambda_st_nm", "mass_u")
DRIVE_KEYS = ("omega_w_mhz", "omega_st_mhz", "delta_w_mhz", "delta_st_mhz")
SERIES_KEYS = DRIVE_KEYS + ("beta_eg",)
SCAN_KEYS = ("scan", "scan_start", "scan_stop", "scan_points", "scan_spacing")
OTHER_KEYS = ("scheme", "copropagating", "output", "format")
KNOWN_KEYS = ATOM_KEYS + DRIVE_KEYS + SCAN_KEYS + OTHER_KEYS

DELTA_W_RULES = ("light_shift", "corrected", "cooling")
OMEGA_ST_RULES = ("optimal", "numeric")


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _float(raw: dict, key: str, default=None) -> float:
    if key not in raw:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        value = float(raw[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {raw[key]!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite")
    return value


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


@dataclass
class RunConfig:
    raw: dict[str, str]
    atom: AtomSpec
    scheme: Scheme
    copropagating: bool
    drive: dict[str, str] = field(default_factory=dict)
    series_key: str | None = None
    series_values: list[str] = field(default_factory=list)
    scan: str | None = None
    grid: np.ndarray | None = None
    output: str | None = None
    format: str = "csv"

    def series(self):
        """Yield ``(suffix, drive_values, atom)`` for each curve."""
        if self.series_key is None:
            yield "", dict(self.drive), self.atom
            return
        for value in self.series_values:
            drive = dict(self.drive)
            atom = self.atom
            if self.series_key == "beta_eg":
                atom = _atom_with_beta(atom, value)
            else:
                drive[self.series_key] = value
            yield f"@{self.series_key}={value}", drive, atom


def _atom_with_beta(atom: AtomSpec, value: str) -> AtomSpec:
    try:
        return atom.with_(beta_eg=float(value))
    except ValueError as exc:
        raise ConfigError(f"invalid beta_eg {value!r}: {exc}") from None


def build_atom(raw: dict) -> AtomSpec:
    try:
        atom = preset(raw.get("ion", "Ca+"))
        changes = {}
        if "gamma_mhz" in raw:
            changes["gamma"] = mhz(_float(raw, "gamma_mhz"))
        if "beta_eg" in raw and "," not in raw["beta_eg"]:
            changes["beta_eg"] = _float(raw, "beta_eg")
        if "lambda_w_nm" in raw:
            changes["lambda_w"] = _float(raw, "lambda_w_nm") * 1e-9
        if "lambda_st_nm" in raw:
            changes["lambda_st"] = _float(raw, "lambda_st_nm") * 1e-9
        if "mass_u" in raw:
            changes["mass"] = _float(raw, "mass_u") * AMU
        return atom.with_(**changes) if changes else atom
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def build_grid(raw: dict) -> np.ndarray | None:
    if "scan_start" not in raw and "scan_stop" not in raw:
        return None
    start, stop = _float(raw, "scan_start"), _float(raw, "scan_stop")
    points = int(_float(raw, "scan_points", 201))
    spacing = raw.get("scan_spacing", "linear")
    if points < 1:
        raise ConfigError("scan_points must be >= 1")
    if points > 1 and start == stop:
        raise ConfigError("scan range is empty (scan_start == scan_stop)")
    if spacing == "linear":
        return np.linspace(start, stop, points)
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log spacing needs a positive range")
        return np.geomspace(start, stop, points)
    raise ConfigError(f"scan_spacing must be 'linear' or 'log', got {spacing!r}")


def from_mapping(raw: dict[str, str]) -> RunConfig:
    for key in raw:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}")
    series = [k for k in SERIES_KEYS if k in raw and "," in raw[k]]
    if len(series) > 1:
        raise ConfigError(f"only one key may hold a list of values, got {series}")
    try:
        scheme = Scheme.parse(raw.get("scheme", "ladder"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(
        raw=dict(raw),
        atom=build_atom(raw),
        scheme=scheme,
        copropagating=_bool(raw.get("copropagating", "true")),
        drive={k: raw[k] for k in DRIVE_KEYS if k in raw},
        scan=raw.get("scan"),
        grid=build_grid(raw),
        output=raw.get("output"),
        format=raw.get("format", "csv"),
    )
    if series:
        cfg.series_key = series[0]
        cfg.series_values = [v.strip() for v in raw[series[0]].split(",") if v.strip()]
        if not cfg.series_values:
            raise ConfigError(f"{series[0]} list is empty")
        for v in cfg.series_values:
            if cfg.series_key == "beta_eg":
                _atom_with_beta(cfg.atom, v)
            else:
                _check_drive_value(cfg.series_key, v)
    for key, value in cfg.drive.items():
        if key != cfg.series_key:
            _check_drive_value(key, value)
    if cfg.format not in ("csv", "json", "both"):
        raise ConfigError(f"format must be csv, json or both, got {cfg.format!r}")
    return cfg


def _check_drive_value(key: str, value: str) -> None:
    allowed = {"delta_w_mhz": DELTA_W_RULES, "omega_st_mhz": OMEGA_ST_RULES}.get(key, ())
    if value in allowed:
        return
    try:
        x = float(value)
    except ValueError:
        extra = f" or one of {allowed}" if allowed else ""
        raise ConfigError(f"{key} must be a number{extra}, got {value!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{key} must be finite")
    if key.startswith("omega") and x < 0:
        raise ConfigError(f"{key} must be >= 0")


def load(path: str | Path | None = None, overrides: list[str] | None = None) -> RunConfig:
    raw: dict[str, str] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        raw.update(parse_text(text, str(path)))
    for item in overrides or []:
        raw.update(parse_text(item, "--set"))
    return from_mapping(raw)
