"""Orthogonal discrete wavelet transform on [0, 1] (periodic or boundary corrected).

Coefficient layout after ``L`` levels on a length ``2**j`` vector::

    [a_{j-L} | d_{j-L} | d_{j-L+1} | ... | d_{j-1}]

Each single-level step is an orthogonal sparse matrix; its rows are the
coarse scaling functions followed by the wavelets, written in the fine
scaling basis.  Both are ordered left edge, interior, right edge, matching
the scaling-basis ordering used by the change-of-basis operator.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import sparse

from .filters import load_filters
from .spec import WaveletSpec

__all__ = ["analysis_matrix", "dwt", "idwt", "dwt_matrix_apply", "coarsest_level"]


def coarsest_level(spec: WaveletSpec) -> int:
    return spec.j0


def _periodic_rows(taps, nu, M):
    half = M // 2
    n = np.repeat(np.arange(half), taps.size)
    k = np.tile(np.arange(-nu + 1, nu + 1), half)
    return n, (2 * n + k) % M, np.tile(taps, half)


def _vmp_rows(fs, taps, M, edge_left, edge_right):
    nu = fs.nu
    half = M // 2
    width = edge_left.shape[1]
    rows, cols, vals = [], [], []
    t = np.arange(width)
    for m in range(nu):
        rows.append(np.full(width, m))
        cols.append(t)
        vals.append(edge_left[m])
        rows.append(np.full(width, half - 1 - m))
        cols.append(M - 1 - t)
        vals.append(edge_right[m])
    inner = np.arange(nu, half - nu)
    k = np.arange(-nu + 1, nu + 1)
    rows.append(np.repeat(inner, k.size))
    cols.append((2 * inner[:, None] + k).ravel())
    vals.append(np.tile(taps, inner.size))
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


@lru_cache(maxsize=64)
def analysis_matrix(spec: WaveletSpec, M: int) -> sparse.csr_matrix:
    """Single-level orthogonal analysis matrix taking length ``M`` to ``[a | d]``."""
    if M < 2 or M & (M - 1):
        raise ValueError(f"length must be a power of two >= 2, got {M}")
    if (M // 2).bit_length() - 1 < spec.j0:
        raise ValueError(f"{spec} needs the coarse level >= {spec.j0}; length {M} is too short")
    fs = load_filters(spec)
    nu, half = spec.nu, M // 2
    if spec.boundary == "periodic":
        r1, c1, v1 = _periodic_rows(fs.h, nu, M)
        r2, c2, v2 = _periodic_rows(fs.g, nu, M)
    else:
        if 3 * nu > M:
            raise ValueError("boundary windows do not fit")
        r1, c1, v1 = _vmp_rows(fs, fs.h, M, fs.SL, fs.SR)
        r2, c2, v2 = _vmp_rows(fs, fs.g, M, fs.WL, fs.WR)
    A = sparse.coo_matrix(
        (np.concatenate([v1, v2]), (np.concatenate([r1, r2 + half]), np.concatenate([c1, c2]))),
        shape=(M, M),
    ).tocsr()
    A.sum_duplicates()
    A.eliminate_zeros()
    return A


def _levels(spec: WaveletSpec, j: int, levels: int | None) -> int:
    if j < spec.j0:
        raise ValueError(f"{spec} needs j >= {spec.j0}, got j={j}")
    full = j - spec.j0
    if levels is None:
        return full
    if not 0 <= levels <= full:
        raise ValueError(f"levels must be in 0..{full}")
    return levels


def _check(x, j):
    x = np.asarray(x, dtype=float)
    if x.shape[0] != 1 << j:
        raise ValueError(f"expected leading length {1 << j}, got {x.shape[0]}")
    return x


def dwt(spec: WaveletSpec, x, levels: int | None = None, axis: int = 0) -> np.ndarray:
    """Forward transform along ``axis`` (scaling coefficients to wavelet coefficients)."""
    out = np.moveaxis(np.array(x, dtype=float, copy=True), axis, 0)
    j = out.shape[0].bit_length() - 1
    _check(out, j)
    L = _levels(spec, j, levels)
    size = 1 << j
    flat = out.reshape(size, -1)
    for _ in range(L):
        flat[:size] = analysis_matrix(spec, size) @ flat[:size]
        size //= 2
    return np.moveaxis(out, 0, axis)


def idwt(spec: WaveletSpec, c, levels: int | None = None, axis: int = 0) -> np.ndarray:
    """Inverse of :func:`dwt` (the transpose, since every step is orthogonal)."""
    out = np.moveaxis(np.array(c, dtype=float, copy=True), axis, 0)
    j = out.shape[0].bit_length() - 1
    _check(out, j)
    L = _levels(spec, j, levels)
    flat = out.reshape(1 << j, -1)
    size = 1 << (j - L + 1)
    for _ in range(L):
        flat[:size] = analysis_matrix(spec, size).T @ flat[:size]
        size *= 2
    return np.moveaxis(out, 0, axis)


def dwt_matrix_apply(spec: WaveletSpec, j: int, coeffs, direction: str = "forward") -> np.ndarray:
    """Multi-level DWT (``"forward"``) or IDWT (``"inverse"``) of a length ``2**j`` vector."""
    coeffs = _check(coeffs, j)
    if direction == "forward":
        return dwt(spec, coeffs)
    if direction == "inverse":
        return idwt(spec, coeffs)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
