"""Binary snapshot container and CSV / JSON writers.

Snapshot layout (little endian):
    8 bytes   magic b"SLITSNAP"
    6 x u32   version, nx, ny, ncomp, is_complex, reserved (0)
    2 x f64   lx, ly
    data      f64, shape (ncomp, nx, ny, 2) if complex (re, im) else (ncomp, nx, ny)

CSV floats use the shortest round-trip representation (``repr``), so
identical arrays always produce identical bytes.
"""
from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from slitlab.fields import ComplexField2D, DiracField2D, GridSpec, PauliField2D, VectorField2D

MAGIC = b"SLITSNAP"
VERSION = 1
_HEADER = struct.Struct("<8s6I2d")


class SnapshotError(ValueError):
    """Malformed or incompatible snapshot file."""


def _field_array(field) -> tuple[GridSpec, np.ndarray, bool]:
    if isinstance(field, ComplexField2D):
        return field.grid, field.values[np.newaxis], True
    if isinstance(field, (PauliField2D, DiracField2D)):
        return field.grid, field.values, True
    if isinstance(field, VectorField2D):
        return field.grid, field.values, False
    raise TypeError(f"cannot store {type(field).__name__}")


def write_snapshot(path, field) -> None:
    grid, values, is_complex = _field_array(field)
    ncomp = values.shape[0]
    header = _HEADER.pack(MAGIC, VERSION, grid.nx, grid.ny, ncomp, int(is_complex), 0, grid.lx, grid.ly)
    if is_complex:
        data = np.stack([values.real, values.imag], axis=-1)
    else:
        data = values
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(data, dtype="<f8").tobytes())


def read_snapshot(path):
    """Inverse of ``write_snapshot``; the field type follows (ncomp, is_complex)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError("file too short for snapshot header")
    magic, version, nx, ny, ncomp, is_complex, _, lx, ly = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError("bad magic")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    shape = (ncomp, nx, ny, 2) if is_complex else (ncomp, nx, ny)
    expected = _HEADER.size + 8 * int(np.prod(shape))
    if len(raw) != expected:
        raise SnapshotError(f"size {len(raw)} does not match header ({expected})")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(shape).astype(float)
    grid = GridSpec(nx, ny, lx, ly)
    if not is_complex:
        return VectorField2D(grid, data)
    values = data[..., 0] + 1j * data[..., 1]
    if ncomp == 1:
        return ComplexField2D(grid, values[0])
    if ncomp == 2:
        return PauliField2D(grid, values)
    if ncomp == 4:
        return DiracField2D(grid, values)
    raise SnapshotError(f"unsupported complex component count {ncomp}")


def fmt(x) -> str:
    return repr(float(x))


def _column(c) -> list[str]:
    a = np.asarray(c).ravel()
    if a.dtype.kind in "biu":
        return [str(int(v)) for v in a]
    return [fmt(v) for v in a.astype(float)]


def write_csv(path, header: list[str], columns) -> None:
    """Integer and boolean columns are written as integers, the rest via ``fmt``."""
    cols = [_column(c) for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols) or len(cols) != len(header):
        raise ValueError("column lengths or header mismatch")
    lines = [",".join(header)]
    lines += [",".join(c[i] for c in cols) for i in range(n)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]) if len(lines) > 1 \
        else np.empty((0, len(header)))
    return header, data


def write_field_csv(path, field) -> None:
    """Long-format table: x,y then re/im per component (complex) or v0.. (real vector)."""
    grid, values, is_complex = _field_array(field)
    X, Y = grid.mesh()
    cols = [X, Y]
    if is_complex:
        if values.shape[0] == 1:
            header = ["x", "y", "re", "im"]
        else:
            header = ["x", "y"] + [f"{p}{c}" for c in range(values.shape[0]) for p in ("re", "im")]
        for comp in values:
            cols += [comp.real, comp.imag]
    else:
        header = ["x", "y"] + [f"v{c}" for c in range(values.shape[0])]
        cols += list(values)
    write_csv(path, header, cols)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
