"""Matrix and label files.

Matrices are csv (header ``f0,...,f{p-1}``) or raw binary: magic ``GSUP``,
little-endian u32 version, u64 n, u64 p, then n*p float64 values in
row-major order. Version 2 appends u64 d1, u64 d2 to the header for image
stacks (p = d1*d2). The format is picked from the file suffix: ``.csv``
means csv, anything else raw.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"GSUP"
_HEAD = struct.Struct("<4sIQQ")
_IMG = struct.Struct("<QQ")


def is_csv(path) -> bool:
    return Path(path).suffix.lower() == ".csv"


def write_csv(path, matrix) -> None:
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    header = ",".join(f"f{j}" for j in range(m.shape[1]))
    # 17 significant digits round-trip every double exactly
    np.savetxt(path, m, delimiter=",", header=header, comments="", fmt="%.17g")


def read_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().strip()
    if not header.startswith("f0"):
        raise ValueError(f"{path}: expected a header row f0,...,f{{p-1}}")
    p = len(header.split(","))
    m = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if m.size == 0:
        return np.empty((0, p))
    if m.shape[1] != p:
        raise ValueError(f"{path}: header has {p} columns, rows have {m.shape[1]}")
    return m


def write_raw(path, matrix, image_shape: tuple[int, int] | None = None) -> None:
    m = np.ascontiguousarray(np.atleast_2d(np.asarray(matrix, dtype="<f8")))
    n, p = m.shape
    with open(path, "wb") as fh:
        if image_shape is None:
            fh.write(_HEAD.pack(MAGIC, 1, n, p))
        else:
            d1, d2 = image_shape
            if d1 * d2 != p:
                raise ValueError(f"image shape {image_shape} does not match p={p}")
            fh.write(_HEAD.pack(MAGIC, 2, n, p))
            fh.write(_IMG.pack(d1, d2))
        fh.write(m.tobytes(order="C"))


def read_raw(path) -> tuple[np.ndarray, tuple[int, int] | None]:
    """Return the matrix and, for version-2 files, the image shape."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEAD.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, n, p = _HEAD.unpack_from(blob)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a GSUP raw matrix")
    off = _HEAD.size
    shape = None
    if version == 2:
        shape = _IMG.unpack_from(blob, off)
        off += _IMG.size
    elif version != 1:
        raise ValueError(f"{path}: unsupported version {version}")
    need = off + 8 * n * p
    if len(blob) != need:
        raise ValueError(f"{path}: expected {need} bytes, found {len(blob)}")
    m = np.frombuffer(blob, dtype="<f8", offset=off, count=n * p).reshape(n, p).astype(float)
    return m, shape


def read_matrix(path) -> np.ndarray:
    return read_csv(path) if is_csv(path) else read_raw(path)[0]


def write_matrix(path, matrix) -> None:
    (write_csv if is_csv(path) else write_raw)(path, matrix)


def read_images(path) -> np.ndarray:
    """Image stack ``(n, d1, d2)`` from a version-2 raw file."""
    m, shape = read_raw(path)
    if shape is None:
        raise ValueError(f"{path}: no image dimensions in header (version 1 file)")
    return m.reshape(len(m), *shape)


def write_images(path, images) -> None:
    a = np.asarray(images, dtype=float)
    write_raw(path, a.reshape(len(a), -1), image_shape=a.shape[1:])


def write_labels(path, labels) -> None:
    np.savetxt(path, np.asarray(labels).astype(np.int64).ravel(), fmt="%d")


def read_labels(path) -> np.ndarray:
    """Integer labels when every line parses as one, otherwise the raw strings."""
    raw = np.loadtxt(path, dtype=str, ndmin=1)
    try:
        return raw.astype(np.int64)
    except ValueError:
        return raw


def write_mpca(path, model) -> None:
    """MPCA model as one raw row: ``d1, d2, r1, r2``, then left, right and mean, row-major."""
    d1, d2 = model.mean_image.shape
    r1, r2 = model.ranks
    row = np.concatenate([[d1, d2, r1, r2], model.left.ravel(), model.right.ravel(), model.mean_image.ravel()])
    write_raw(path, row[None, :])


def read_mpca(path):
    from .reduce import MpcaModel

    row = read_raw(path)[0].ravel()
    d1, d2, r1, r2 = (int(v) for v in row[:4])
    if len(row) != 4 + d1 * r1 + d2 * r2 + d1 * d2:
        raise ValueError(f"{path}: not an MPCA model file")
    a = 4 + d1 * r1
    b = a + d2 * r2
    return MpcaModel(row[4:a].reshape(d1, r1), row[a:b].reshape(d2, r2), row[b:].reshape(d1, d2))
