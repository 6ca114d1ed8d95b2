"""Model file format: a flat binary container with a versioned header.

Layout (all integers little-endian int64, all floats little-endian
float64):

    magic "MEN1"
    config block:  int64 byte length, then that many UTF-8 bytes of
                   key=value lines
    mean:          int64 length m (0 when absent), then m floats
    pca_basis:     int64 rows, int64 cols (0 0 when absent), then
                   rows*cols floats row-major
    W:             int64 p, int64 d, int64 nnz, then nnz (row, col,
                   value) float triplets in column-major order

The text export renders the same content losslessly (floats via repr).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .config import MenConfig, config_from_mapping, config_to_lines, parse_kv_lines
from .errors import DataError
from .pipeline import ProjectionMatrix

__all__ = ["save_model", "load_model", "model_to_text"]

MAGIC = b"MEN1"


def _pack_int(value: int) -> bytes:
    return struct.pack("<q", value)


def _pack_floats(values: np.ndarray) -> bytes:
    return np.ascontiguousarray(values, dtype="<f8").tobytes()


def _triplets(values: np.ndarray) -> np.ndarray:
    col_idx, row_idx = np.nonzero(values.T)  # ordered by column, then row
    out = np.empty((row_idx.size, 3))
    out[:, 0] = row_idx
    out[:, 1] = col_idx
    out[:, 2] = values[row_idx, col_idx]
    return out


def save_model(model: ProjectionMatrix, path) -> None:
    path = Path(path)
    chunks = [MAGIC]
    config_text = "\n".join(config_to_lines(model.config)) + "\n"
    config_bytes = config_text.encode("utf-8")
    chunks.append(_pack_int(len(config_bytes)))
    chunks.append(config_bytes)
    if model.pca_mean is None:
        chunks.append(_pack_int(0))
    else:
        chunks.append(_pack_int(model.pca_mean.size))
        chunks.append(_pack_floats(model.pca_mean))
    if model.pca_basis is None:
        chunks.append(_pack_int(0))
        chunks.append(_pack_int(0))
    else:
        rows, cols = model.pca_basis.shape
        chunks.append(_pack_int(rows))
        chunks.append(_pack_int(cols))
        chunks.append(_pack_floats(model.pca_basis))
    p, d = model.values.shape
    trip = _triplets(model.values)
    chunks.append(_pack_int(p))
    chunks.append(_pack_int(d))
    chunks.append(_pack_int(trip.shape[0]))
    chunks.append(_pack_floats(trip))
    path.write_bytes(b"".join(chunks))


class _Reader:
    def __init__(self, data: bytes, name: str):
        self.data = data
        self.name = name
        self.offset = 0

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.data):
            raise DataError(f"{self.name}: truncated model file")
        out = self.data[self.offset : self.offset + count]
        self.offset += count
        return out

    def read_int(self) -> int:
        return struct.unpack("<q", self.take(8))[0]

    def read_floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)


def load_model(path) -> ProjectionMatrix:
    path = Path(path)
    reader = _Reader(path.read_bytes(), str(path))
    if reader.take(4) != MAGIC:
        raise DataError(f"{path}: not a model file (bad magic)")
    config_len = reader.read_int()
    config_text = reader.take(config_len).decode("utf-8")
    cfg = config_from_mapping(parse_kv_lines(config_text.splitlines()))
    mean_len = reader.read_int()
    mean = reader.read_floats(mean_len) if mean_len else None
    rows = reader.read_int()
    cols = reader.read_int()
    basis = reader.read_floats(rows * cols).reshape(rows, cols) if rows else None
    p = reader.read_int()
    d = reader.read_int()
    nnz = reader.read_int()
    trip = reader.read_floats(3 * nnz).reshape(nnz, 3)
    values = np.zeros((p, d))
    if nnz:
        values[trip[:, 0].astype(np.int64), trip[:, 1].astype(np.int64)] = trip[:, 2]
    return ProjectionMatrix(
        values=values,
        sparsity=[int(np.count_nonzero(values[:, t])) for t in range(d)],
        pca_basis=basis,
        pca_mean=mean,
        config=cfg,
    )


def _format_array(name: str, values: np.ndarray | None) -> list[str]:
    if values is None:
        return [f"{name} absent"]
    arr = np.atleast_2d(values)
    lines = [f"{name} {arr.shape[0]} {arr.shape[1]}"]
    for row in arr:
        lines.append(" ".join(repr(float(v)) for v in row))
    return lines


def model_to_text(model: ProjectionMatrix) -> str:
    """Lossless human-readable dump of a model (floats as repr)."""
    lines = ["MEN1 text export", "[config]"]
    lines.extend(config_to_lines(model.config))
    lines.append("[mean]")
    lines.extend(_format_array("mean", model.pca_mean))
    lines.append("[pca_basis]")
    lines.extend(_format_array("pca_basis", model.pca_basis))
    lines.append("[projection]")
    p, d = model.values.shape
    trip = _triplets(model.values)
    lines.append(f"W {p} {d} nnz {trip.shape[0]}")
    for row, col, value in trip:
        lines.append(f"{int(row)} {int(col)} {repr(float(value))}")
    return "\n".join(lines) + "\n"
