"""CSV conventions shared by every on-disk matrix.

UTF-8, LF line endings, one header row of column ids, shortest
round-tripping positional decimals, empty field for a missing cell.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import FaultLocError


def format_value(x: float) -> str:
    if math.isnan(x):
        return ""
    if math.isinf(x):
        raise FaultLocError("cannot serialize an infinite value")
    s = np.format_float_positional(x, unique=True, trim="-")
    return "0" if s == "-0" else s


def write_matrix(path, values, header) -> None:
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != len(header):
        raise FaultLocError(f"matrix shape {values.shape} does not match {len(header)} columns")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in values:
            w.writerow([format_value(float(v)) for v in row])


def read_matrix(path) -> tuple[np.ndarray, list[str]]:
    """Read a matrix CSV; empty fields become NaN."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FaultLocError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise FaultLocError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    out = np.empty((len(body), len(header)))
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise FaultLocError(f"{path}:{i + 2}: expected {len(header)} fields, got {len(row)}")
        for j, field in enumerate(row):
            if field == "":
                out[i, j] = np.nan
                continue
            try:
                out[i, j] = float(field)
            except ValueError:
                raise FaultLocError(f"{path}:{i + 2}: bad number {field!r}") from None
    return out, header


def write_mask(path, mask, header) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.asarray(mask, dtype=bool):
            w.writerow(["1" if v else "0" for v in row])


def read_mask(path) -> tuple[np.ndarray, list[str]]:
    values, header = read_matrix(path)
    if np.isnan(values).any() or not np.isin(values, (0.0, 1.0)).all():
        raise FaultLocError(f"{path}: mask entries must be 0 or 1")
    return values.astype(bool), header
