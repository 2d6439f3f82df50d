"""Binary field-file ("LBF") serialization.

Layout: magic "LBF1"; little-endian u32 version=1, u32 n, u32 N per axis
(n entries), u32 component count, u32 domain tag (0 physical, 1 spectral),
f64 L; payload of c·N^n entries in component-major, lexicographic
wavevector/grid order — f64 values (physical) or f64 re,im pairs
(spectral). Round trips are bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .field import GridSpec, SpectralField

__all__ = ["save", "load", "FieldFileError",
           "BadMagicError", "VersionError", "ShortPayloadError"]

MAGIC = b"LBF1"
VERSION = 1


class FieldFileError(Exception):
    """Base class for field-file format errors."""


class BadMagicError(FieldFileError):
    pass


class VersionError(FieldFileError):
    pass


class ShortPayloadError(FieldFileError):
    pass


def save(field: SpectralField, path: Union[str, Path]) -> None:
    grid = field.grid
    c = field.components
    tag = 1 if field.domain == "spectral" else 0
    header = MAGIC + struct.pack(
        f"<II{grid.n}III d", VERSION, grid.n, *((grid.N,) * grid.n), c, tag, grid.L
    )
    if field.domain == "spectral":
        payload = np.ascontiguousarray(field.data, dtype="<c16").tobytes()
    else:
        payload = np.ascontiguousarray(field.data, dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def load(path: Union[str, Path]) -> SpectralField:
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: not a field file")
    off = 4
    try:
        version, n = struct.unpack_from("<II", raw, off)
    except struct.error as exc:
        raise ShortPayloadError(f"{path}: short payload (truncated header)") from exc
    off += 8
    if version != VERSION:
        raise VersionError(f"{path}: unsupported field-file version {version}")
    try:
        dims = struct.unpack_from(f"<{n}I", raw, off)
        off += 4 * n
        c, tag = struct.unpack_from("<II", raw, off)
        off += 8
        (L,) = struct.unpack_from("<d", raw, off)
        off += 8
    except struct.error as exc:
        raise ShortPayloadError(f"{path}: short payload (truncated header)") from exc
    if len(set(dims)) != 1:
        raise FieldFileError(f"{path}: anisotropic grids unsupported: {dims}")
    N = dims[0]
    grid = GridSpec(n=n, N=N, L=L)
    count = c * N ** n
    itemsize = 16 if tag == 1 else 8
    if len(raw) - off < count * itemsize:
        raise ShortPayloadError(
            f"{path}: short payload ({len(raw) - off} bytes, need {count * itemsize})"
        )
    if tag == 1:
        data = np.frombuffer(raw, dtype="<c16", count=count, offset=off)
        data = data.reshape((c,) + grid.shape).astype(np.complex128)
        return SpectralField(grid, "spectral", data)
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
    data = data.reshape((c,) + grid.shape).astype(np.float64)
    return SpectralField(grid, "physical", data)
