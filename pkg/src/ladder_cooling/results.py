"""Sampled curves and their CSV / JSON serialization."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

POPULATION_COLUMNS = ("p_g", "p_m", "p_e")
SIGNIFICANT_DIGITS = 12


def _fmt(value: float) -> str:
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def _round(value):
    if isinstance(value, float):
        return float(_fmt(value)) if math.isfinite(value) else str(value)
    if isinstance(value, (np.floating, np.integer)):
        return _round(value.item())
    if isinstance(value, Mapping):
        return {str(k): _round(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    return value


def _label(name: str, unit: str) -> str:
    return f"{name} [{unit}]" if unit else name


@dataclass
class ScanResult:
    """A curve: strictly monotone ``abscissa`` plus named observable columns.

    ``fixed`` records every parameter held constant during the scan.
    ``evaluate``, when present, maps an abscissa value to a dict of column
    values by re-running the model; it is used for refinement and is never
    serialized.
    """

    name: str
    unit: str
    abscissa: np.ndarray
    columns: dict[str, np.ndarray]
    fixed: dict = field(default_factory=dict)
    column_units: dict[str, str] = field(default_factory=dict)
    evaluate: Callable[[float], Mapping[str, float]] | None = field(
        default=None, repr=False, compare=False)

    def __post_init__(self):
        self.abscissa = np.asarray(self.abscissa, dtype=float)
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}
        n = self.abscissa.size
        if self.abscissa.ndim != 1 or n == 0:
            raise ValueError("abscissa must be a non-empty 1-D array")
        if n > 1:
            steps = np.diff(self.abscissa)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError("abscissa must be strictly monotone")
        for key, col in self.columns.items():
            if col.shape != (n,):
                raise ValueError(f"column {key!r} has length {col.size}, expected {n}")
        pops = [self.columns[c] for c in POPULATION_COLUMNS if c in self.columns]
        for col in pops:
            if np.any(col < -1e-9) or np.any(col > 1 + 1e-9):
                raise ValueError("population column outside [0, 1]")
        if len(pops) == len(POPULATION_COLUMNS):
            if np.max(np.abs(sum(pops) - 1.0)) > 1e-8:
                raise ValueError("populations do not sum to 1")

    def __len__(self) -> int:
        return self.abscissa.size

    def rescaled(self, factor: float, unit: str, name: str | None = None) -> "ScanResult":
        """Copy with the abscissa multiplied by ``factor`` (evaluator adapted)."""
        evaluate = None
        if self.evaluate is not None:
            inner = self.evaluate
            evaluate = lambda x: inner(x / factor)  # noqa: E731
        return ScanResult(name or self.name, unit, self.abscissa * factor, dict(self.columns),
                          dict(self.fixed), dict(self.column_units), evaluate)

    def header(self) -> list[str]:
        return [_label(self.name, self.unit)] + [
            _label(k, self.column_units.get(k, "")) for k in self.columns]

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        for key in sorted(self.fixed):
            buf.write(f"# {key} = {json.dumps(_round(self.fixed[key]))}\n")
        buf.write(",".join(self.header()) + "\n")
        cols = list(self.columns.values())
        for i, x in enumerate(self.abscissa):
            buf.write(",".join([_fmt(x)] + [_fmt(c[i]) for c in cols]) + "\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def to_dict(self) -> dict:
        return {
            "meta": {
                "abscissa": {"name": self.name, "unit": self.unit},
                "columns": {k: self.column_units.get(k, "") for k in self.columns},
                "fixed": _round(self.fixed),
            },
            "data": {
                self.name: _round(self.abscissa.tolist()),
                **{k: _round(v.tolist()) for k, v in self.columns.items()},
            },
        }

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _split_label(label: str) -> tuple[str, str]:
    label = label.strip()
    if label.endswith("]") and " [" in label:
        name, unit = label[:-1].split(" [", 1)
        return name, unit
    return label, ""


def read_csv(source: str | Path) -> ScanResult:
    """Parse text written by :meth:`ScanResult.to_csv` (path or CSV text)."""
    text = source if isinstance(source, str) and "\n" in source else Path(source).read_text("utf-8")
    fixed, rows, header = {}, [], None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            fixed[key.strip()] = json.loads(value)
        elif header is None:
            header = line.split(",")
        else:
            rows.append([float(x) for x in line.split(",")])
    if header is None:
        raise ValueError("CSV has no header row")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    name, unit = _split_label(header[0])
    columns, units = {}, {}
    for j, label in enumerate(header[1:], start=1):
        key, u = _split_label(label)
        columns[key] = data[:, j]
        if u:
            units[key] = u
    return ScanResult(name, unit, data[:, 0], columns, fixed, units)
