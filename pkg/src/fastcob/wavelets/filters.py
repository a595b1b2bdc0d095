"""Shipped filter data: interior taps and boundary-corrected refinement matrices.

File layout (all integers little-endian)::

    b"CWWF"                magic
    u32  version
    u8   family tag        0 = db, 1 = sym
    u8   nu
    u16  number of arrays
    per array:
        4 bytes name       ASCII, NUL padded
        u32 rows, u32 cols
        rows * cols f64    row-major
    u32  CRC32 of everything above
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .spec import FAMILIES, WaveletSpec

MAGIC = b"CWWF"
VERSION = 1
_HEADER = struct.Struct("<4sIBBH")
_ARRAY = struct.Struct("<4sII")

REQUIRED = ("h",)
BOUNDARY_ARRAYS = ("CL", "CR", "SL", "SR", "WL", "WR")


class FilterFileError(ValueError):
    """Raised for a malformed, truncated or mismatched filter data file."""


def write_filter_file(path, spec: WaveletSpec, arrays: dict) -> None:
    chunks = [_HEADER.pack(MAGIC, VERSION, FAMILIES.index(spec.family), spec.nu, len(arrays))]
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr, dtype="<f8")
        if arr.ndim != 2 or len(name) > 4:
            raise ValueError(f"array {name!r} must be 2-D with a name of at most 4 characters")
        chunks.append(_ARRAY.pack(name.encode("ascii"), *arr.shape))
        chunks.append(arr.tobytes())
    body = b"".join(chunks)
    Path(path).write_bytes(body + struct.pack("<I", zlib.crc32(body)))


def parse_filter_bytes(data: bytes) -> tuple[str, int, dict]:
    """Decode a filter file; returns ``(family, nu, arrays)``."""
    if len(data) < _HEADER.size + 4:
        raise FilterFileError("filter file truncated")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise FilterFileError("filter file checksum mismatch")
    magic, version, tag, nu, count = _HEADER.unpack_from(body, 0)
    if magic != MAGIC:
        raise FilterFileError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FilterFileError(f"unsupported filter file version {version}")
    if tag >= len(FAMILIES):
        raise FilterFileError(f"unknown family tag {tag}")
    pos = _HEADER.size
    arrays = {}
    for _ in range(count):
        if pos + _ARRAY.size > len(body):
            raise FilterFileError("filter file truncated")
        raw, rows, cols = _ARRAY.unpack_from(body, pos)
        pos += _ARRAY.size
        nbytes = 8 * rows * cols
        if pos + nbytes > len(body):
            raise FilterFileError("filter file truncated")
        arr = np.frombuffer(body, dtype="<f8", count=rows * cols, offset=pos).reshape(rows, cols)
        arrays[raw.rstrip(b"\0").decode("ascii")] = arr.astype(float)
        pos += nbytes
    if pos != len(body):
        raise FilterFileError("trailing bytes in filter file")
    return FAMILIES[tag], nu, arrays


@dataclass(frozen=True)
class BoundaryFilterSet:
    """Interior filters and, for ``nu >= 2``, the boundary-corrected matrices.

    ``CL[m]`` / ``CR[m]`` expand the edge scaling functions in half-line
    restricted translates ``phi(x-n)`` over ``left_index`` / ``right_index``.
    ``SL``/``SR`` and ``WL``/``WR`` hold the two-scale rows of edge scaling
    functions and edge wavelets in mirrored fine-level coordinates: entry
    ``t < nu`` is fine edge function ``t``, entry ``t >= nu`` the interior
    translate at distance ``t`` from the boundary.
    """

    spec: WaveletSpec
    h: np.ndarray
    CL: np.ndarray | None = None
    CR: np.ndarray | None = None
    SL: np.ndarray | None = None
    SR: np.ndarray | None = None
    WL: np.ndarray | None = None
    WR: np.ndarray | None = None

    @property
    def nu(self) -> int:
        return self.spec.nu

    @property
    def g(self) -> np.ndarray:
        """High-pass taps ``g_r = (-1)**r h_{1-r}`` on the same index range ``-nu+1 .. nu``."""
        nu = self.nu
        r = np.arange(-nu + 1, nu + 1)
        return np.where(r % 2 == 0, 1.0, -1.0) * self.h[(1 - r) + nu - 1]

    @property
    def left_index(self) -> np.ndarray:
        return np.arange(-self.nu + 1, self.nu)

    @property
    def right_index(self) -> np.ndarray:
        return np.arange(-self.nu, self.nu - 1)

    @property
    def has_boundary(self) -> bool:
        return self.CL is not None


def _validate(spec: WaveletSpec, family: str, nu: int, arrays: dict) -> BoundaryFilterSet:
    if family != spec.family or nu != spec.nu:
        raise FilterFileError(f"file holds {family}{nu}, expected {spec.name}")
    missing = [k for k in REQUIRED if k not in arrays]
    if nu >= 2:
        missing += [k for k in BOUNDARY_ARRAYS if k not in arrays]
    if missing:
        raise FilterFileError(f"filter file lacks arrays {missing}")
    h = arrays["h"].ravel()
    if h.size != 2 * nu:
        raise FilterFileError(f"expected {2 * nu} taps, found {h.size}")
    if abs(h.sum() - np.sqrt(2.0)) > 1e-12 or abs(h @ h - 1.0) > 1e-12:
        raise FilterFileError("interior taps are not an orthonormal scaling filter")
    if nu == 1:
        return BoundaryFilterSet(spec, h)
    expect = {"CL": (nu, 2 * nu - 1), "CR": (nu, 2 * nu - 1)}
    for key in ("SL", "SR", "WL", "WR"):
        expect[key] = (nu, arrays["SL"].shape[1])
    for key, shape in expect.items():
        if arrays[key].shape != shape:
            raise FilterFileError(f"array {key} has shape {arrays[key].shape}, expected {shape}")
    return BoundaryFilterSet(spec, h, **{k: arrays[k] for k in BOUNDARY_ARRAYS})


def read_filter_file(path, spec: WaveletSpec) -> BoundaryFilterSet:
    return _validate(spec, *parse_filter_bytes(Path(path).read_bytes()))


@lru_cache(maxsize=32)
def _load_shipped(family: str, nu: int) -> BoundaryFilterSet:
    spec = WaveletSpec(family, nu, "periodic")
    ref = resources.files("fastcob") / "data" / f"{family}{nu}.cwwf"
    try:
        data = ref.read_bytes()
    except FileNotFoundError:
        raise FilterFileError(f"no shipped filter data for {spec.name}") from None
    return _validate(spec, *parse_filter_bytes(data))


def load_filters(spec: WaveletSpec) -> BoundaryFilterSet:
    """Filters for ``spec`` from the data files shipped with the package."""
    fs = _load_shipped(spec.family, spec.nu)
    if spec.boundary == "vmp" and not fs.has_boundary:
        raise FilterFileError(f"{spec.name} has no boundary-corrected data")
    return BoundaryFilterSet(spec, fs.h, fs.CL, fs.CR, fs.SL, fs.SR, fs.WL, fs.WR)
