"""CSV series and report files."""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .series import TimeSeries, Timestep, as_array

OUTPUT_DIR_ENV = "RCFEEDBACK_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "rc_output"


def output_dir(explicit=None) -> Path:
    """``explicit``, else ``$RCFEEDBACK_OUTPUT_DIR``, else ``./rc_output``."""
    path = Path(explicit or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_series_csv(path, series, header: str | None = None) -> None:
    """One value per line after a single header line."""
    values = as_array(series)
    if header is None:
        header = series.label if isinstance(series, TimeSeries) and series.label else "value"
    header = header.replace("\n", " ").replace(",", ";")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        fh.writelines(f"{v!r}\n" for v in values.tolist())


def read_series_csv(path, semantics=Timestep.RESERVOIR_STEP, dt: float = 1.0) -> TimeSeries:
    """Read a one-column CSV; a non-numeric first line is taken as the header.

    Multi-column files use the last column.
    """
    with open(path, encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty series file")
    label = ""
    try:
        float(rows[0][-1])
    except ValueError:
        label = rows[0][-1].strip()
        rows = rows[1:]
    try:
        values = np.array([float(r[-1]) for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if values.size == 0:
        raise ValueError(f"{path}: no values")
    return TimeSeries(values, semantics, dt, label)


def write_table_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row.get(k)) for k in columns})


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
