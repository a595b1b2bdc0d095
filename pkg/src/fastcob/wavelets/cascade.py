"""Cascade evaluation of scaling functions and their antiderivatives on dyadic grids."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ScalingSamples:
    """Samples ``values[k] = f(left + k / 2**resolution)`` over the support of ``f``."""

    values: np.ndarray
    resolution: int
    left: int

    @property
    def grid(self) -> np.ndarray:
        return self.left + np.arange(self.values.size) / (1 << self.resolution)

    @property
    def right(self) -> float:
        return self.left + (self.values.size - 1) / (1 << self.resolution)

    def at(self, x) -> np.ndarray:
        """Values at dyadic points of this grid (zero outside the support)."""
        pos = (np.asarray(x, dtype=float) - self.left) * (1 << self.resolution)
        idx = np.rint(pos).astype(np.int64)
        if np.any(np.abs(pos - idx) > 1e-9):
            raise ValueError("points are not on the sample grid")
        inside = (idx >= 0) & (idx < self.values.size)
        out = np.zeros(idx.shape)
        out[inside] = self.values[idx[inside]]
        return out

    def downsample(self) -> "ScalingSamples":
        if self.resolution == 0:
            raise ValueError("already on the integer grid")
        return ScalingSamples(self.values[::2].copy(), self.resolution - 1, self.left)


def _taps(h):
    h = np.asarray(h, dtype=float)
    nu = h.size // 2
    return h, nu, np.arange(-nu + 1, nu + 1)


def integer_values(h) -> np.ndarray:
    """``phi(i)`` for ``i = -nu+1 .. nu``: eigenvector of the two-scale matrix for eigenvalue 1."""
    h, nu, ks = _taps(h)
    if nu == 1:
        # the box: eigenvalue 1 is double here; take the right-continuous values
        return np.array([1.0, 0.0])
    pts = np.arange(-nu + 1, nu + 1)
    T = np.zeros((pts.size, pts.size))
    for a, i in enumerate(pts):
        for b, k in enumerate(ks):
            c = 2 * i - k
            if -nu + 1 <= c <= nu:
                T[a, c + nu - 1] += SQRT2 * h[b]
    w, V = np.linalg.eig(T)
    close = np.abs(w - 1.0)
    best = int(np.argmin(close))
    if close[best] > 1e-8 or np.sort(close)[1] < 1e-6:
        raise ArithmeticError("two-scale matrix has no simple eigenvalue 1; bad filter data")
    v = np.real(V[:, best])
    return v / v.sum()


def _refine(prev: np.ndarray, h, nu, r: int, fill_right: float, gain: float) -> np.ndarray:
    # one cascade step from spacing 2**-(r-1) to 2**-r over [-nu+1, nu]
    half = 1 << (r - 1)
    n_new = (2 * nu - 1) * (1 << r) + 1
    out = np.zeros(n_new)
    i = np.arange(n_new)
    for b, k in enumerate(range(-nu + 1, nu + 1)):
        src = i + (-nu + 1 - k) * half
        vals = np.zeros(n_new)
        ok = (src >= 0) & (src < prev.size)
        vals[ok] = prev[src[ok]]
        vals[src >= prev.size] = fill_right
        out += gain * h[b] * vals
    return out


@lru_cache(maxsize=64)
def _interior_cached(htuple: tuple, R: int) -> np.ndarray:
    h, nu, _ = _taps(htuple)
    v = integer_values(h)
    for r in range(1, R + 1):
        v = _refine(v, h, nu, r, 0.0, SQRT2)
    v.setflags(write=False)
    return v


def interior_samples(h, R: int) -> ScalingSamples:
    """``phi`` on ``[-nu+1, nu]`` at spacing ``2**-R``."""
    h = tuple(float(x) for x in np.asarray(h))
    nu = len(h) // 2
    return ScalingSamples(_interior_cached(h, R), R, -nu + 1)


def antiderivative_integers(h) -> np.ndarray:
    """``Phi(i) = int_{-inf}^i phi`` for ``i = -nu+1 .. nu`` from its two-scale relation.

    ``Phi(x) = 2**-1/2 sum_k h_k Phi(2x - k)`` with ``Phi = 0`` left of the
    support and ``Phi = 1`` right of it.
    """
    h, nu, ks = _taps(h)
    unknown = np.arange(-nu + 2, nu)
    if unknown.size == 0:
        return np.array([0.0, 1.0])
    A = np.eye(unknown.size)
    b = np.zeros(unknown.size)
    for a, i in enumerate(unknown):
        for c, k in enumerate(ks):
            y = 2 * i - k
            w = h[c] / SQRT2
            if y >= nu:
                b[a] += w
            elif y > -nu + 1:
                A[a, y - (-nu + 2)] -= w
    inner = np.linalg.solve(A, b)
    return np.concatenate([[0.0], inner, [1.0]])


@lru_cache(maxsize=64)
def _antiderivative_cached(htuple: tuple, R: int) -> np.ndarray:
    h, nu, _ = _taps(htuple)
    v = antiderivative_integers(h)
    for r in range(1, R + 1):
        v = _refine(v, h, nu, r, 1.0, 1.0 / SQRT2)
    v.setflags(write=False)
    return v


def antiderivative_samples(h, R: int) -> ScalingSamples:
    """``Phi(x) = int_{-inf}^x phi`` on ``[-nu+1, nu]`` at spacing ``2**-R`` (exact up to rounding)."""
    h = tuple(float(x) for x in np.asarray(h))
    nu = len(h) // 2
    return ScalingSamples(_antiderivative_cached(h, R), R, -nu + 1)


# ---------------------------------------------------------------------------
# boundary functions


def _edge_integer_values(C, idx, interior: ScalingSamples, side: str) -> np.ndarray:
    # one-sided values at 0, +-1, ..., +-(2nu-1) from the translate representation;
    # at the boundary point the two-scale system is singular, so it cannot fix them
    nu = C.shape[0]
    pts = np.arange(2 * nu)
    x = pts if side == "left" else -pts
    return np.array([sum(c * interior.at(x - n) for c, n in zip(row, idx)) for row in C])


def edge_samples(h, S, C, idx, R: int, side: str) -> list[ScalingSamples]:
    """Cascade for the edge scaling functions from their two-scale rows ``S``.

    The integer grid is seeded from the translate coefficients ``C`` over
    ``idx``; every finer level then comes from ``S`` alone.

    ``side == "left"``: samples of ``phi_m^left`` on ``[0, 2nu-1]``.
    ``side == "right"``: samples of ``phi_m^right`` on ``[-2nu+1, 0]``.
    """
    h = np.asarray(h, dtype=float)
    nu = S.shape[0]
    span = 2 * nu - 1
    interiors = [interior_samples(h, r) for r in range(R + 1)]
    F = _edge_integer_values(C, idx, interiors[0], side)
    for r in range(1, R + 1):
        half = 1 << (r - 1)
        n_new = span * (1 << r) + 1
        i = np.arange(n_new)
        prev_int = interiors[r - 1]
        new = np.zeros((nu, n_new))
        for t in range(S.shape[1]):
            col = S[:, t]
            if not np.any(col):
                continue
            if t < nu:
                vals = np.zeros(n_new)
                ok = i < F.shape[1]
                vals[ok] = F[t, i[ok]]
            else:
                x = (i - t * half) / half if side == "left" else (-i + (1 + t) * half) / half
                vals = prev_int.at(x)
            new += SQRT2 * np.outer(col, vals)
        F = new
    out = []
    for m in range(nu):
        if side == "left":
            out.append(ScalingSamples(F[m].copy(), R, 0))
        else:
            out.append(ScalingSamples(F[m, ::-1].copy(), R, -span))
    return out
