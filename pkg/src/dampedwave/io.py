"""
Field snapshots on disk.

A snapshot is one line of JSON describing the grid and layout, terminated by
a newline, followed by the raw samples: little-endian float64 pairs
(re, im), component by component, in C order over the lattice.
"""
from __future__ import annotations

import csv
import json

import numpy as np

from .spectral import SpectralField, make_grid

__all__ = ["SnapshotFormatError", "write_snapshot", "read_snapshot", "export_field_csv"]

FORMAT = "dampedwave-snapshot"
VERSION = 1
_DTYPE = np.dtype("<c16")
CSV_MAX_POINTS = 1 << 16


class SnapshotFormatError(ValueError):
    pass


def write_snapshot(path, fields) -> None:
    """Write one or more fields sharing a grid (e.g. psi and psi_t)."""
    if isinstance(fields, SpectralField):
        fields = [fields]
    fields = list(fields)
    if not fields:
        raise ValueError("nothing to write")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise ValueError("all components must share one grid")
    header = {
        "format": FORMAT,
        "version": VERSION,
        "n": grid.n,
        "N": grid.N,
        "L": grid.L,
        "components": len(fields),
        "endianness": "little",
        "dtype": "complex128",
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("ascii") + b"\n")
        for f in fields:
            fh.write(np.ascontiguousarray(f.values, dtype=_DTYPE).tobytes())


def read_snapshot(path) -> list:
    """Inverse of `write_snapshot`; returns a list of fields."""
    with open(path, "rb") as fh:
        line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(line)
    except ValueError as exc:
        raise SnapshotFormatError("missing or malformed header") from exc
    if header.get("format") != FORMAT or header.get("endianness") != "little":
        raise SnapshotFormatError(f"unsupported snapshot header {header}")
    grid = make_grid(header["n"], header["N"], header["L"])
    k = header["components"]
    size = int(np.prod(grid.shape))
    data = np.frombuffer(payload, dtype=_DTYPE)
    if data.size != k * size:
        raise SnapshotFormatError(f"expected {k * size} samples, found {data.size}")
    return [SpectralField(grid, data[i * size:(i + 1) * size].reshape(grid.shape).copy()) for i in range(k)]


def export_field_csv(path, v: SpectralField) -> None:
    """Columns x0..x{n-1}, re, im; refused for grids above 65536 points."""
    grid = v.grid
    if v.values.size > CSV_MAX_POINTS:
        raise ValueError(f"{v.values.size} points is too many for CSV export")
    coords = [c.ravel() for c in grid.coords]
    vals = v.values.ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(grid.n)] + ["re", "im"])
        for i in range(vals.size):
            w.writerow([repr(float(c[i])) for c in coords] + [repr(float(vals[i].real)), repr(float(vals[i].imag))])
