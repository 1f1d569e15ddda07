"""File formats: driver/trace CSVs with JSON sidecars, curves, reports."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import Trace
from .driver import INTERPOLATIONS, Driver, make_driver
from .errors import InputError
from .grid import TimeGrid
from .zipper import RawCurve


def atomic_write_text(path, text: str) -> Path:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def content_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def write_driver(path, d: Driver) -> Path:
    """Driver CSV with header t,value plus a JSON sidecar."""
    path = Path(path)
    lines = ["t,value"]
    for t, v in zip(d.grid.times, d.values):
        lines.append(f"{t!r},{v!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")
    meta = {"interpolation": d.interpolation, "t_end": d.t_end}
    atomic_write_text(sidecar_path(path), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def _read_rows(path, expected_fields: int):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader, start=1):
            if not row or (i == 1 and not _is_number(row[0])):
                continue  # header or blank
            if len(row) != expected_fields:
                raise InputError(f"{path}: line {i}: expected {expected_fields} fields, "
                                 f"got {len(row)}")
            try:
                rows.append([float(x) for x in row])
            except ValueError as exc:
                raise InputError(f"{path}: line {i}: {exc}") from None
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.asarray(rows)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_driver(path) -> Driver:
    arr = _read_rows(path, 2)
    interpolation = "piecewise-linear"
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
        interpolation = meta.get("interpolation", interpolation)
        if interpolation not in INTERPOLATIONS:
            raise InputError(f"{side}: unknown interpolation {interpolation!r}")
    try:
        return make_driver(arr[:, 0], arr[:, 1], interpolation)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_trace(path, tr: Trace, extra_meta: dict | None = None) -> Path:
    """Trace CSV with header t,re,im plus a provenance sidecar."""
    path = Path(path)
    lines = ["t,re,im"]
    for t, p in zip(tr.times, tr.points):
        lines.append(f"{t!r},{p.real!r},{p.imag!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")
    meta = {"y0": tr.y0, "driver_ref": tr.driver_ref}
    if extra_meta:
        meta.update(extra_meta)
    atomic_write_text(sidecar_path(path), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_trace(path) -> Trace:
    arr = _read_rows(path, 3)
    try:
        return Trace(TimeGrid(arr[:, 0]), arr[:, 1] + 1j * arr[:, 2])
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def read_curve(path) -> RawCurve:
    """Accept a trace CSV (t,re,im) or a bare polyline CSV (re,im)."""
    with open(path, newline="") as fh:
        first = fh.readline().strip().lower().split(",")
    fields = 3 if (len(first) == 3) else 2
    arr = _read_rows(path, fields)
    pts = arr[:, -2] + 1j * arr[:, -1]
    try:
        return RawCurve(pts)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_report(path, payload: dict) -> Path:
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_table(path, header: list, rows: list) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(x) if isinstance(x, float) else str(x) for x in row))
    return atomic_write_text(path, "\n".join(lines) + "\n")
