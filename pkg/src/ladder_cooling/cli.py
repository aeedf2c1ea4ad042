"""``ladder-cooling`` command line: figure-style scans as CSV / JSON and the
acceptance-suite runner."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, acceptance, analytics, cooling
from .config import ConfigError, RunConfig, load
from .model import AMU, AtomSpec, LaserDrive, mhz
from .optimize import OptimumAtBoundary
from .results import ScanResult
from .steady_state import (DegenerateSteadyState, HalfMaxNotBracketed, PeakNotBracketed,
                           default_delta_w_grid, peak_and_fwhm, scan_delta_st, scan_delta_w)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 2, 3, 4

MHZ = mhz(1.0)
NUMERIC_ERRORS = (DegenerateSteadyState, cooling.NotCooling, PeakNotBracketed,
                  HalfMaxNotBracketed, OptimumAtBoundary, ZeroDivisionError)


class NumericalError(RuntimeError):
    pass


def _number(values: dict, key: str, default: float | None = None) -> float:
    if key not in values:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(values[key])
    except ValueError:
        raise ConfigError(f"{key} = {values[key]!r} is not allowed here") from None


def resolve_drive(atom: AtomSpec, values: dict, copropagating: bool,
                  default_delta_w: str = "light_shift") -> tuple[LaserDrive, dict]:
    """Turn MHz / symbolic drive values into a LaserDrive plus the rules used."""
    rules = {}
    omega_w = mhz(_number(values, "omega_w_mhz"))
    delta_st = mhz(_number(values, "delta_st_mhz"))
    ost = values.get("omega_st_mhz", "optimal")
    if ost == "optimal":
        if not omega_w > 0:
            raise ConfigError("omega_st_mhz = optimal needs omega_w_mhz > 0")
        omega_st = analytics.optimal_ratio(atom, omega_w, delta_st).omega_st
        rules["omega_st_rule"] = "optimal"
    elif ost == "numeric":
        try:
            omega_st = cooling.optimize_drive(atom, omega_w, delta_st, copropagating).omega_st
        except OptimumAtBoundary:
            raise
        except ValueError as exc:
            raise ConfigError(f"omega_st_mhz = numeric: {exc}") from None
        rules["omega_st_rule"] = "numeric"
    else:
        omega_st = mhz(float(ost))
    drive = LaserDrive(omega_w, omega_st, 0.0, delta_st, copropagating)
    dw = values.get("delta_w_mhz", default_delta_w)
    if dw == "light_shift":
        drive = drive.with_(delta_w=analytics.light_shift(drive))
    elif dw == "corrected":
        drive = drive.with_(delta_w=analytics.corrected_resonance(atom, drive))
    elif dw == "cooling":
        drive = drive.with_(delta_w=cooling.cooling_detuning(atom, drive))
    else:
        drive = drive.with_(delta_w=mhz(float(dw)))
    if dw in ("light_shift", "corrected", "cooling"):
        rules["delta_w_rule"] = dw
    return drive, rules


def combine(curves: list[tuple[str, ScanResult]], meta: dict) -> ScanResult:
    """Join per-series curves sharing one abscissa into a single result."""
    first = curves[0][1]
    columns, units = {}, {}
    common = dict(first.fixed)
    for _, c in curves[1:]:
        if not np.array_equal(c.abscissa, first.abscissa):
            raise NumericalError("series curves do not share an abscissa")
        for key in list(common):
            if key not in c.fixed or c.fixed[key] != common[key]:
                del common[key]
    per_series = {}
    for suffix, c in curves:
        for key, col in c.columns.items():
            columns[key + suffix] = col
            units[key + suffix] = c.column_units.get(key, "")
        if suffix:
            per_series[suffix[1:]] = {k: v for k, v in c.fixed.items() if k not in common}
    fixed = dict(common)
    if per_series:
        fixed["series"] = per_series
    fixed.update(meta)
    return ScanResult(first.name, first.unit, first.abscissa, columns, fixed, units)


def _meta(cfg: RunConfig, command: str) -> dict:
    meta = {"command": command, "version": __version__, "scan": cfg.scan}
    if cfg.grid is not None:
        meta["scan_grid"] = {"start": float(cfg.grid[0]), "stop": float(cfg.grid[-1]),
                             "points": int(cfg.grid.size),
                             "spacing": cfg.raw.get("scan_spacing", "linear")}
    return meta


def _require_grid(cfg: RunConfig, default=None) -> np.ndarray:
    if cfg.grid is not None:
        return cfg.grid
    if default is None or cfg.series_key is not None:
        raise ConfigError(f"scan '{cfg.scan}' needs scan_start / scan_stop"
                          + (" when a series key is used" if cfg.series_key else ""))
    return default


def _scan_axis(cfg: RunConfig, allowed: tuple[str, ...]) -> str:
    if cfg.scan is None:
        cfg.scan = allowed[0]
    if cfg.scan not in allowed:
        raise ConfigError(f"scan must be one of {allowed}, got {cfg.scan!r}")
    return cfg.scan


def _with_rules(result: ScanResult, rules: dict, drive: LaserDrive | None = None) -> ScanResult:
    result.fixed.update(rules)
    if drive is not None:
        result.fixed.setdefault("omega_st_mhz", drive.omega_st / MHZ)
    return result


def cmd_spectrum(cfg: RunConfig) -> ScanResult:
    axis = _scan_axis(cfg, ("delta_w", "delta_st"))
    curves = []
    for suffix, values, atom in cfg.series():
        if axis == "delta_w":
            drive, rules = resolve_drive(atom, values, cfg.copropagating)
            rules.pop("delta_w_rule", None)
            grid = _require_grid(cfg, default=default_delta_w_grid(atom, drive) / MHZ)
            res = scan_delta_w(atom, drive, cfg.scheme, grid * MHZ)
            res.fixed["light_shift_mhz"] = analytics.light_shift(drive) / MHZ
        else:
            grid = _require_grid(cfg)
            vals = dict(values)
            dw = vals.get("delta_w_mhz", "light_shift")
            lock = dw if dw in ("light_shift", "corrected") else "none"
            if dw == "cooling":
                raise ConfigError("delta_w_mhz = cooling is not available for a delta_st scan")
            # delta_st is scanned; any placeholder satisfies the resolver
            vals["delta_st_mhz"] = str(grid[0])
            if vals.get("omega_st_mhz", "optimal") in ("optimal", "numeric"):
                raise ConfigError("a delta_st scan needs a numeric omega_st_mhz")
            drive, rules = resolve_drive(atom, vals, cfg.copropagating)
            rules.pop("delta_w_rule", None)
            res = scan_delta_st(atom, drive, cfg.scheme, grid * MHZ, lock=lock)
        curves.append((suffix, _with_rules(res.rescaled(1 / MHZ, "MHz"), rules)))
    return combine(curves, _meta(cfg, "spectrum"))


def cmd_linewidth(cfg: RunConfig) -> ScanResult:
    _scan_axis(cfg, ("ratio",))
    grid = _require_grid(cfg, default=np.linspace(0.05, 1.0, 20))
    if np.any(grid <= 0):
        raise ConfigError("ratio grid must be positive")
    curves = []
    for suffix, values, atom in cfg.series():
        omega_w = mhz(_number(values, "omega_w_mhz"))
        delta_st = mhz(_number(values, "delta_st_mhz"))
        half = atom.gamma / 2
        fwhm, geff, g0 = [], [], []
        for ratio in grid:
            d = LaserDrive(omega_w, ratio * abs(delta_st), 0.0, delta_st, cfg.copropagating)
            fwhm.append(peak_and_fwhm(scan_delta_w(atom, d, cfg.scheme), "p_e").fwhm / half)
            geff.append(analytics.gamma_eff(atom, d) / half)
            g0.append(analytics.gamma_limit(atom, d) / half)
        fixed = {
            "ion": atom.name, "gamma_mhz": atom.gamma / MHZ, "beta_eg": atom.beta_eg,
            "lambda_w_nm": atom.lambda_w * 1e9, "lambda_st_nm": atom.lambda_st * 1e9,
            "mass_u": atom.mass / AMU,
            "omega_w_mhz": omega_w / MHZ, "delta_st_mhz": delta_st / MHZ,
            "scheme": cfg.scheme.value, "st_copropagates": cfg.copropagating,
            "fwhm_method": "delta_w scan, delta_LS +/- 10 Gamma_eff, 801 points, bisection-refined",
        }
        res = ScanResult("ratio", "|omega_st/delta_st|", grid,
                         {"fwhm": np.array(fwhm), "gamma_eff": np.array(geff),
                          "gamma_0": np.array(g0)},
                         fixed, {"fwhm": "gamma/2", "gamma_eff": "gamma/2", "gamma_0": "gamma/2"})
        curves.append((suffix, res))
    return combine(curves, _meta(cfg, "linewidth"))


def cmd_cooling(cfg: RunConfig) -> ScanResult:
    axis = _scan_axis(cfg, ("relative_detuning", "ratio", "k_v_rms"))
    curves = []
    for suffix, values, atom in cfg.series():
        if axis == "ratio":
            grid = _require_grid(cfg, default=np.geomspace(0.05, 10, 41))
            if np.any(grid <= 0):
                raise ConfigError("ratio grid must be positive")
            res = cooling.min_temperature_curve(
                atom, mhz(_number(values, "omega_w_mhz")), grid,
                mhz(_number(values, "delta_st_mhz")), cfg.copropagating, cfg.scheme)
            res.columns["T_D"] = res.columns["T_D"] * 1e6
            res.column_units["T_D"] = "uK"
        elif axis == "relative_detuning":
            drive, rules = resolve_drive(atom, values, cfg.copropagating)
            rules.pop("delta_w_rule", None)
            width = analytics.gamma_eff(atom, drive) / MHZ
            grid = _require_grid(cfg, default=np.linspace(-3 * width, 0.5 * width, 71))
            res = cooling.damping_curve(atom, drive, grid * MHZ, cfg.scheme)
            res = _with_rules(res.rescaled(1 / MHZ, "MHz"), rules, drive)
            res.fixed["gamma_eff_mhz"] = width
        else:
            drive, rules = resolve_drive(atom, values, cfg.copropagating, default_delta_w="cooling")
            grid = _require_grid(cfg, default=np.linspace(0.0, 10.0, 101))
            if np.any(grid < 0):
                raise ConfigError("k_v_rms grid must be >= 0")
            keff = abs(cooling._k_scale(atom, drive))
            res = cooling.effective_force_curve(atom, drive, grid * (atom.gamma / 2) / keff,
                                                cfg.scheme)
            res.abscissa = grid.astype(float)
            res = _with_rules(res, rules, drive)
            res.fixed["capture_k_v_rms"] = cooling.capture_range(res)
        curves.append((suffix, res))
    return combine(curves, _meta(cfg, "cooling"))


def _output_paths(cfg: RunConfig, override: str | None, fmt: str | None) -> list[tuple[str, Path]]:
    target = override or cfg.output
    fmt = fmt or cfg.format
    if target is None or target == "-":
        return []
    path = Path(target)
    if path.suffix in (".csv", ".json"):
        stem = path.with_suffix("")
        if fmt == "csv" and path.suffix == ".json":
            fmt = "json"
    else:
        stem = path
    kinds = ["csv", "json"] if fmt == "both" else [fmt]
    return [(k, stem.with_name(stem.name + "." + k)) for k in kinds]


def _emit(result: ScanResult, cfg: RunConfig, args) -> None:
    targets = _output_paths(cfg, args.output, args.format)
    if not targets:
        fmt = args.format or cfg.format
        sys.stdout.write(result.to_json() if fmt == "json" else result.to_csv())
        return
    for kind, path in targets:
        path.parent.mkdir(parents=True, exist_ok=True)
        (result.to_csv if kind == "csv" else result.to_json)(path)
        print(f"wrote {path}", file=sys.stderr)


HELP = {
    "spectrum": "steady populations versus delta_w or delta_st",
    "linewidth": "resonance FWHM and linewidth formulas versus |omega_st/delta_st|",
    "cooling": "damping, limit temperature or effective force curves",
}
SCAN_COMMANDS = {"spectrum": cmd_spectrum, "linewidth": cmd_linewidth, "cooling": cmd_cooling}


def cmd_verify(args) -> int:
    results = acceptance.run_all(mutate_denominator=args.mutate_denominator)
    if args.json:
        print(json.dumps({"passed": all(r.passed for r in results),
                          "criteria": [r.to_dict() for r in results]}, indent=2, default=str))
    else:
        for r in results:
            print(r.line())
            for c in r.checks:
                print(f"      {'ok  ' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ladder-cooling", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in SCAN_COMMANDS.items():
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("config", nargs="?", help="key = value configuration file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a configuration key (repeatable)")
        p.add_argument("-o", "--output", help="output path; extension chosen by --format")
        p.add_argument("--format", choices=("csv", "json", "both"))
    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--json", action="store_true", help="machine-readable report")
    v.add_argument("--mutate-denominator", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args)
    try:
        cfg = load(args.config, args.overrides)
        result = SCAN_COMMANDS[args.command](cfg)
        _emit(result, cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS + (NumericalError,) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
