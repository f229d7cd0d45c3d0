"""
Data files and configuration.

CSV files open with a ``#`` comment naming every column and its unit,
followed by a plain header row; numbers are written in scientific notation
with 17 significant digits so that reruns can be compared byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import yaml

from .hamiltonian import PhysicalParams

NUMBER_FORMAT = "{:.16e}"

# config keys holding frequencies, given in Hz and stored as rad/s
FREQUENCY_KEYS = ("omega_c", "omega_1", "omega_2", "a", "Omega", "delta", "nu_1", "nu_2",
                  "gamma_c", "gamma_b", "gamma_op")
PARAM_KEYS = tuple(PhysicalParams.__dataclass_fields__)


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return NUMBER_FORMAT.format(float(x))
    return str(x)


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], units: Optional[Sequence[str]] = None,
              comment: Optional[str] = None) -> Path:
    """Write ``rows`` with a self-describing header; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    units = list(units) if units is not None else ["1"] * len(columns)
    if len(units) != len(columns):
        raise ValueError("one unit per column is required")
    described = ", ".join(f"{c} [{u}]" for c, u in zip(columns, units))
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(f"# columns: {described}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} entries, expected {len(columns)}")
            w.writerow([format_value(x) for x in row])
    return path


def write_matrix_csv(path, matrix: np.ndarray, row_axis: Sequence[float], col_axis: Sequence[float],
                     row_name: str, col_name: str, value_name: str) -> Path:
    """Matrix with the column axis as the first data row and the row axis as the first column."""
    matrix = np.asarray(matrix)
    if matrix.shape != (len(row_axis), len(col_axis)):
        raise ValueError("matrix shape does not match the axes")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {value_name}; first row: {col_name}; first column: {row_name}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{row_name}\\{col_name}"] + [format_value(float(x)) for x in col_axis])
        for r, values in zip(row_axis, matrix):
            w.writerow([format_value(float(r))] + [format_value(float(v)) for v in values])
    return path


def read_csv(path) -> Dict[str, np.ndarray]:
    """Columns of a file written by :func:`write_csv` (numeric where possible)."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    cols: Dict[str, List[str]] = {h: [] for h in header}
    for row in reader:
        for h, v in zip(header, row):
            cols[h].append(v)
    out = {}
    for h, vals in cols.items():
        try:
            out[h] = np.array([float(v) if v != "" else math.nan for v in vals])
        except ValueError:
            out[h] = np.array(vals, dtype=object)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_mapping(path) -> Dict:
    """Read a YAML (or JSON) mapping."""
    with open(os.fspath(path)) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a mapping")
    return data


def params_from_config(cfg: Dict, defaults: Optional[PhysicalParams] = None) -> PhysicalParams:
    """PhysicalParams from flat config keys; frequencies in Hz, ``tau0`` in seconds.

    Keys absent from ``cfg`` fall back to ``defaults``. Unknown keys are
    ignored here (run-level keys share the file).
    """
    kw = {} if defaults is None else {k: getattr(defaults, k) for k in PARAM_KEYS}
    for key in PARAM_KEYS:
        if key not in cfg or cfg[key] is None:
            continue
        value = float(cfg[key])
        kw[key] = 2 * math.pi * value if key in FREQUENCY_KEYS else value
    missing = [k for k in ("omega_c", "omega_1", "omega_2", "a", "N") if k not in kw]
    if missing:
        raise ValueError(f"config lacks required keys: {missing}")
    return PhysicalParams(**kw)


def params_to_config(params: PhysicalParams) -> Dict:
    """Inverse of :func:`params_from_config`."""
    out = {}
    for key in PARAM_KEYS:
        v = getattr(params, key)
        if v is not None and key in FREQUENCY_KEYS:
            v = v / (2 * math.pi)
        out[key] = v
    return out
