"""Deterministic CSV / JSON output and config parsing.

CSV: '.' decimal point, '\\n' line endings, 17 significant digits, so a
float survives a write/read round trip bit for bit.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Dict, Mapping, Sequence

import numpy as np

from . import errors
from .model import parse_key_values
from .spectral import PeriodicGrid, RealField

FLOAT_FMT = "%.17g"
OUT_ENV = "KGB_LAB_OUT"


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return FLOAT_FMT % float(x)


def write_csv(path, header: Sequence[str], columns: Sequence[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = {len(c) for c in columns}
    if len(n) > 1:
        raise errors.ValidationError(f"columns have different lengths {sorted(n)}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path, expect: Sequence[str] = None) -> Dict[str, np.ndarray]:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise errors.ValidationError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise errors.ValidationError(f"{path} is empty")
    header = rows[0]
    if expect is not None and list(header) != list(expect):
        raise errors.ValidationError(f"{path}: header {header} != expected {list(expect)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise errors.ValidationError(f"{path}: non-numeric entry ({exc})") from exc
    if data.size and (data.ndim != 2 or data.shape[1] != len(header)):
        raise errors.ValidationError(f"{path}: ragged rows")
    if data.size and not np.all(np.isfinite(data)):
        raise errors.ValidationError(f"{path}: non-finite values")
    data = data.reshape(-1, len(header))
    return {h: data[:, j] for j, h in enumerate(header)}


def write_field(path, field: RealField) -> Path:
    return write_csv(path, ["x", "value"], [field.grid.x, field.values])


def read_field(path, grid: PeriodicGrid) -> RealField:
    d = read_csv(path, ["x", "value"])
    if d["x"].size != grid.N or np.max(np.abs(d["x"] - grid.x)) > 1e-12 * max(1.0, grid.L):
        raise errors.GridMismatch(f"{path}: nodes do not match the grid (L={grid.L}, N={grid.N})")
    return RealField(grid, d["value"])


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else repr(f)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj))
    return path


def load_config(path) -> dict:
    """Flat key=value file, or a JSON object when the text starts with '{'."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise errors.ValidationError(f"cannot read config {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise errors.ValidationError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise errors.ValidationError(f"{path}: top level must be an object")
        return data
    return parse_key_values(text)


def check_keys(cfg: Mapping, allowed) -> None:
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise errors.ValidationError(f"unknown config keys: {unknown}")


def output_dir(name) -> Path:
    """Relative output paths live under $KGB_LAB_OUT when it is set; absolute paths win."""
    root = Path(os.environ.get(OUT_ENV, "."))
    return root / Path(name)
