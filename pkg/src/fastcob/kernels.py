"""Continuous Walsh transforms of unit translates of the scaling functions.

For the interior scaling function

    kappa_l(s) = int_0^1 phi(x + l) w_s(x) dx,   l = -nu+1 .. nu-1,  s < 2**q.

Every inner product between a scaled translate and a Walsh function reduces
to these numbers, independently of the level ``j``.  ``w_s`` is constant on
the dyadic cells of width ``2**-q``, so ``kappa_l`` is one sequency FWHT of
the cell masses of ``phi(. + l)`` over ``[0, 1)``.

Edge tables have shape ``(nu, 2nu-1, 2**q)``:

* VMP left, ``[m, l]``: ``int_0^1 phi_m^left(x + l) w_s(x) dx`` for ``l = 0 .. nu-1+m``;
* VMP right, ``[m, r]``: the same for ``phi_m^right`` at ``l = -1 - r``,
  ``r = 0 .. nu-1+m``, which keeps the window independent of ``j``;
* periodic: ``[m, l + nu - 1]`` is ``kappa_l`` for every ``m``.  The wrap
  around the interval only changes the Walsh arguments, not the integrals.
"""
from __future__ import annotations

import logging
import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dyadic import fwht_sequency
from .wavelets.cascade import antiderivative_samples, edge_samples, interior_samples
from .wavelets.filters import BoundaryFilterSet, load_filters
from .wavelets.spec import BOUNDARIES, FAMILIES, WaveletSpec

log = logging.getLogger(__name__)

METHODS = ("exact", "trapezoid")
DEFAULT_METHOD = "exact"
DEFAULT_RESOLUTION = 14


@dataclass(frozen=True)
class KernelTable:
    """Kernel values for one wavelet, boundary mode and ``q``.

    ``interior[l + nu - 1, s]``; ``left`` and ``right`` as described in the
    module docstring.  ``resolution`` is the cascade resolution used by the
    trapezoid method (``0`` for exact tables).
    """

    spec: WaveletSpec
    q: int
    interior: np.ndarray
    left: np.ndarray
    right: np.ndarray
    method: str = DEFAULT_METHOD
    resolution: int = 0

    def __post_init__(self):
        nu, S = self.spec.nu, 1 << self.q
        if self.interior.shape != (2 * nu - 1, S):
            raise ValueError(f"interior kernels have shape {self.interior.shape}, expected {(2 * nu - 1, S)}")
        for name in ("left", "right"):
            arr = getattr(self, name)
            if arr.shape != (nu, 2 * nu - 1, S):
                raise ValueError(f"{name} kernels have shape {arr.shape}, expected {(nu, 2 * nu - 1, S)}")
        for arr in (self.interior, self.left, self.right):
            arr.setflags(write=False)

    @property
    def nu(self) -> int:
        return self.spec.nu

    def kappa(self, l: int) -> np.ndarray:
        """``kappa_l(s)`` for ``s < 2**q``; zero outside ``|l| <= nu-1``."""
        if abs(l) > self.nu - 1:
            return np.zeros(1 << self.q)
        return self.interior[l + self.nu - 1]

    def truncate(self, q: int) -> "KernelTable":
        """The same kernels restricted to ``s < 2**q``."""
        if q > self.q:
            raise ValueError(f"table only holds q <= {self.q}")
        S = 1 << q
        return KernelTable(self.spec, q, self.interior[:, :S].copy(), self.left[..., :S].copy(),
                           self.right[..., :S].copy(), self.method, self.resolution)

    @property
    def nbytes(self) -> int:
        return self.interior.nbytes + self.left.nbytes + self.right.nbytes


# ---------------------------------------------------------------------------
# computation


def _cell_masses_exact(h, q: int) -> np.ndarray:
    """``masses[l + nu - 1, c] = int_{c/2^q}^{(c+1)/2^q} phi(x + l) dx``."""
    nu = len(h) // 2
    A = antiderivative_samples(h, q)
    S = 1 << q
    out = np.zeros((2 * nu - 1, S))
    for i, l in enumerate(range(-nu + 1, nu)):
        y = l + np.arange(S + 1) / S
        vals = np.where(y >= A.right, 1.0, 0.0)
        inside = (y > A.left) & (y < A.right)
        vals[inside] = A.at(y[inside])
        out[i] = np.diff(vals)
    return out


def _trapezoid_cells(samples: np.ndarray, resolution: int, q: int) -> np.ndarray:
    """Composite trapezoid per cell of width ``2**-q`` of samples on ``[0, 1]``."""
    per = 1 << (resolution - q)
    S = 1 << q
    w = np.full(samples.size, 2.0 ** -resolution)
    out = np.empty(S)
    for c in range(S):
        seg = samples[c * per:(c + 1) * per + 1]
        out[c] = (seg.sum() - 0.5 * (seg[0] + seg[-1])) * w[0]
    return out


def _cell_masses_trapezoid(h, q: int, R: int) -> np.ndarray:
    nu = len(h) // 2
    if R < q:
        raise ValueError("cascade resolution must be at least q")
    phi = interior_samples(h, R)
    grid = np.arange((1 << R) + 1) / (1 << R)
    out = np.zeros((2 * nu - 1, 1 << q))
    for i, l in enumerate(range(-nu + 1, nu)):
        out[i] = _trapezoid_cells(phi.at(grid + l), R, q)
    return out


def compute_interior_kernels(spec: WaveletSpec, q: int, method: str = DEFAULT_METHOD,
                             R: int = DEFAULT_RESOLUTION) -> np.ndarray:
    """``kappa_l(s)`` as an array indexed ``[l + nu - 1, s]``.

    ``"exact"`` integrates with the antiderivative of ``phi``, which satisfies
    its own two-scale relation and is therefore known exactly at dyadic
    points.  ``"trapezoid"`` applies the composite trapezoid rule to cascade
    samples at resolution ``R``.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    h = load_filters(spec).h
    if method == "exact":
        masses = _cell_masses_exact(h, q)
    elif method == "trapezoid":
        masses = _cell_masses_trapezoid(h, q, R)
    else:
        raise ValueError(f"method must be one of {METHODS}")
    return fwht_sequency(masses, axis=1)


def _edge_from_translates(C, idx, interior: np.ndarray, nu: int, side: str) -> np.ndarray:
    out = np.zeros((nu, 2 * nu - 1, interior.shape[1]))
    for r in range(2 * nu - 1):
        l = r if side == "left" else -1 - r
        for k, n in enumerate(idx):
            shift = l - int(n)
            if abs(shift) <= nu - 1:
                out[:, r] += np.outer(C[:, k], interior[shift + nu - 1])
    return out


def _edge_trapezoid(fs: BoundaryFilterSet, q: int, R: int, side: str) -> np.ndarray:
    nu = fs.nu
    S = fs.SL if side == "left" else fs.SR
    C = fs.CL if side == "left" else fs.CR
    idx = fs.left_index if side == "left" else fs.right_index
    funcs = edge_samples(fs.h, S, C, idx, R, side)
    grid = np.arange((1 << R) + 1) / (1 << R)
    out = np.zeros((nu, 2 * nu - 1, 1 << q))
    for m, f in enumerate(funcs):
        for r in range(nu + m):
            l = r if side == "left" else -1 - r
            out[m, r] = fwht_sequency(_trapezoid_cells(f.at(grid + l), R, q))
    return out


def compute_edge_kernels(spec: WaveletSpec, q: int, interior: np.ndarray | None = None,
                         method: str = DEFAULT_METHOD, R: int = DEFAULT_RESOLUTION):
    """``(left, right)`` edge kernel arrays of shape ``(nu, 2nu-1, 2**q)``."""
    nu = spec.nu
    if interior is None:
        interior = compute_interior_kernels(spec, q, method, R)
    if spec.boundary == "periodic":
        tiled = np.broadcast_to(interior, (nu,) + interior.shape).copy()
        return tiled, tiled.copy()
    fs = load_filters(spec)
    if method == "trapezoid":
        return _edge_trapezoid(fs, q, R, "left"), _edge_trapezoid(fs, q, R, "right")
    # the edge functions are fixed combinations of restricted translates; for
    # x + l on one side of the boundary the restriction is inactive
    left = _edge_from_translates(fs.CL, fs.left_index, interior, nu, "left")
    right = _edge_from_translates(fs.CR, fs.right_index, interior, nu, "right")
    for m in range(nu):
        left[m, nu + m:] = 0.0
        right[m, nu + m:] = 0.0
    return left, right


def compute_kernels(spec: WaveletSpec, q: int, method: str = DEFAULT_METHOD,
                    R: int = DEFAULT_RESOLUTION) -> KernelTable:
    interior = compute_interior_kernels(spec, q, method, R)
    left, right = compute_edge_kernels(spec, q, interior, method, R)
    return KernelTable(spec, q, interior, left, right, method, R if method == "trapezoid" else 0)


# ---------------------------------------------------------------------------
# cache files
#
#   b"CWWK"  u32 version
#   u8 family, u8 nu, u8 boundary, u8 method, u8 q, u8 R, u16 reserved
#   u32 x 3  interior dims (2), then edge dims (3) as u32 x 3
#   f64 LE   interior, left, right (row-major)
#   u32      CRC32 of everything above

CACHE_MAGIC = b"CWWK"
CACHE_VERSION = 1
_CACHE_HEAD = struct.Struct("<4sIBBBBBBH")
_DIMS = struct.Struct("<5I")


class KernelCacheError(ValueError):
    """Raised for corrupt, truncated or mismatched kernel cache files."""


def _encode(table: KernelTable) -> bytes:
    spec = table.spec
    head = _CACHE_HEAD.pack(CACHE_MAGIC, CACHE_VERSION, FAMILIES.index(spec.family), spec.nu,
                            BOUNDARIES.index(spec.boundary), METHODS.index(table.method), table.q,
                            table.resolution, 0)
    dims = _DIMS.pack(*table.interior.shape, *table.left.shape)
    payload = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes()
                       for a in (table.interior, table.left, table.right))
    body = head + dims + payload
    return body + struct.pack("<I", zlib.crc32(body))


def _decode(data: bytes) -> KernelTable:
    fixed = _CACHE_HEAD.size + _DIMS.size
    if len(data) < fixed + 4:
        raise KernelCacheError("kernel cache truncated")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise KernelCacheError("kernel cache checksum mismatch")
    magic, version, fam, nu, bd, method, q, R, _ = _CACHE_HEAD.unpack_from(body, 0)
    if magic != CACHE_MAGIC:
        raise KernelCacheError(f"bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise KernelCacheError(f"kernel cache version {version}, expected {CACHE_VERSION}")
    try:
        spec = WaveletSpec(FAMILIES[fam], nu, BOUNDARIES[bd])
        method_name = METHODS[method]
    except (IndexError, ValueError) as exc:
        raise KernelCacheError(f"invalid header: {exc}") from None
    a, b, c, d, e = _DIMS.unpack_from(body, _CACHE_HEAD.size)
    S = 1 << q
    if (a, b) != (2 * nu - 1, S) or (c, d, e) != (nu, 2 * nu - 1, S):
        raise KernelCacheError("array dimensions do not match the header")
    sizes = [a * b, c * d * e, c * d * e]
    if len(body) != fixed + 8 * sum(sizes):
        raise KernelCacheError("payload size does not match the header")
    arrays, pos = [], fixed
    for n, shape in zip(sizes, [(a, b), (c, d, e), (c, d, e)]):
        arrays.append(np.frombuffer(body, "<f8", n, pos).reshape(shape).astype(float))
        pos += 8 * n
    return KernelTable(spec, q, *arrays, method=method_name, resolution=R)


def save_kernels(table: KernelTable, path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(_encode(table))
    os.replace(tmp, path)


def load_kernels(path, spec: WaveletSpec | None = None, q: int | None = None) -> KernelTable:
    """Read a cache file; optionally check that it holds ``spec`` and ``q``."""
    table = _decode(Path(path).read_bytes())
    if spec is not None and table.spec != spec:
        raise KernelCacheError(f"cache holds {table.spec}, expected {spec}")
    if q is not None and table.q != q:
        raise KernelCacheError(f"cache holds q={table.q}, expected q={q}")
    return table


def kernel_cache_io(table_or_none, path, direction: str):
    """``direction="save"`` writes ``table``; ``"load"`` reads and returns it."""
    if direction == "save":
        save_kernels(table_or_none, path)
        return table_or_none
    if direction == "load":
        return load_kernels(path)
    raise ValueError("direction must be 'save' or 'load'")


def default_cache_dir() -> Path:
    env = os.environ.get("CWW_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "fastcob"


def cache_path(cache_dir, spec: WaveletSpec, q: int, method: str = DEFAULT_METHOD,
               R: int = DEFAULT_RESOLUTION) -> Path:
    tag = "exact" if method == "exact" else f"trap{R}"
    return Path(cache_dir) / f"{spec.name}-{spec.boundary}-q{q}-{tag}-v{CACHE_VERSION}.cwwk"


def get_kernels(spec: WaveletSpec, q: int, cache_dir=None, method: str = DEFAULT_METHOD,
                R: int = DEFAULT_RESOLUTION, use_cache: bool = True) -> KernelTable:
    """Kernels from the on-disk cache, computing and storing them when missing or stale."""
    if not use_cache:
        return compute_kernels(spec, q, method, R)
    path = cache_path(cache_dir or default_cache_dir(), spec, q, method, R)
    if path.exists():
        try:
            return load_kernels(path, spec, q)
        except KernelCacheError as exc:
            log.info("recomputing stale kernel cache %s (%s)", path, exc)
    table = compute_kernels(spec, q, method, R)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_kernels(table, path)
    except OSError as exc:
        log.warning("could not write kernel cache %s: %s", path, exc)
    return table
