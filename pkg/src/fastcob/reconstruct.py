"""Reconstruction from Walsh samples: truncated Walsh series, GS, PBDW and QCBP.

Samples are ``y_n = <f, w_n>`` for the first ``N`` sequency-ordered Walsh
functions (``N x N`` in 2D).  The wavelet side is a :class:`FastOp`.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg, lsqr

from .dyadic import fwht_sequency
from .fastop import CSOperator, FastOp, SamplingMask
from .wavelets.cascade import edge_samples, interior_samples
from .wavelets.filters import load_filters
from .wavelets.spec import WaveletSpec

log = logging.getLogger(__name__)


class ConvergenceError(ArithmeticError):
    """An iterative solver stopped before reaching its tolerance."""


class InfeasibleError(ArithmeticError):
    """The data-fidelity ball of the QCBP problem does not meet the range of the operator."""


@dataclass
class SolverParams:
    cg_maxiter: int = 500
    cg_tol: float = 1e-10
    eta: float = 1e-3
    pd_maxiter: int = 3000
    pd_tol: float = 1e-6
    tau: float = 0.01
    sigma: float = 99.0
    feas_tol: float = 1e-6
    K: int | None = None

    def __post_init__(self):
        if self.cg_tol <= 0 or self.pd_tol <= 0 or self.feas_tol <= 0 or self.eta < 0:
            raise ValueError("tolerances must be positive")
        if self.tau * self.sigma > 1.0:
            raise ValueError("need tau * sigma <= 1 (the operator norm is at most 1)")


@dataclass
class ReconProblem:
    """Samples plus everything needed to run one of the solvers."""

    spec: WaveletSpec
    j: int
    q: int
    y: np.ndarray
    dim: int = 1
    mask: SamplingMask | None = None
    params: SolverParams = field(default_factory=SolverParams)

    def operator(self, cache_dir=None) -> FastOp:
        return FastOp(self.spec, self.j, self.q, dim=self.dim, cache_dir=cache_dir)


# ---------------------------------------------------------------------------
# acquisition


def midpoints(R: int) -> np.ndarray:
    return (np.arange(1 << R) + 0.5) / (1 << R)


def acquire_samples(f, j: int, q: int, Rs: int | None = None, dim: int = 1) -> np.ndarray:
    """First ``N = 2**(j+q)`` (``N x N``) Walsh coefficients of ``f`` by midpoint sampling.

    ``f`` is sampled at the midpoints of ``2**Rs`` dyadic cells per axis; the
    FWHT then integrates each Walsh function exactly against that piecewise
    constant interpolant.  Default ``Rs = j + q + 4``.
    """
    if j < 0 or q < 0:
        raise ValueError("j and q must be non-negative")
    r = j + q
    N = 1 << r
    Rs = r + 4 if Rs is None else Rs
    if Rs < r:
        raise ValueError("sampling grid must be at least as fine as the Walsh resolution")
    t = midpoints(Rs)
    scale = 2.0 ** -Rs
    if dim == 1:
        return fwht_sequency(f(t))[:N] * scale
    if dim == 2:
        vals = f(t[:, None], t[None, :])
        out = fwht_sequency(vals, axis=0)[:N]
        return fwht_sequency(out, axis=1)[:, :N] * scale * scale
    raise ValueError("dim must be 1 or 2")


# ---------------------------------------------------------------------------
# solvers


def truncated_walsh(y) -> np.ndarray:
    """Coefficients of the truncated Walsh series (the samples themselves)."""
    return np.array(y, dtype=float, copy=True)


def gs_solve(op: FastOp, y, params: SolverParams | None = None, x0=None) -> np.ndarray:
    """Generalised sampling: least squares ``min ||A x - y||`` by CG on the normal equations."""
    params = params or SolverParams()
    y = np.asarray(y, dtype=float)
    if y.shape != (op.N,) * op.dim:
        raise ValueError(f"samples must have shape {(op.N,) * op.dim}")
    shape = (op.M,) * op.dim
    n = op.M**op.dim
    normal = LinearOperator((n, n), matvec=lambda v: op.adjoint(op.forward(v.reshape(shape))).ravel(),
                            dtype=float)
    rhs = op.adjoint(y).ravel()
    x, info = cg(normal, rhs, x0=None if x0 is None else np.ravel(x0), rtol=params.cg_tol,
                 atol=0.0, maxiter=params.cg_maxiter)
    if info != 0:
        res = np.linalg.norm(normal @ x - rhs) / max(np.linalg.norm(rhs), 1e-300)
        raise ConvergenceError(f"CG stopped after {params.cg_maxiter} iterations, relative residual {res:.2e}")
    return x.reshape(shape)


def pbdw_solve(op: FastOp, y, params: SolverParams | None = None) -> np.ndarray:
    """PBDW estimate as Walsh coefficients up to ``K`` (``K x K`` in 2D).

    The first ``N`` coefficients are the samples; the rest come from the GS
    reconstruction seen through a taller operator.  ``K`` defaults to ``4N``.
    """
    params = params or SolverParams()
    y = np.asarray(y, dtype=float)
    K = params.K or 4 * op.N
    if K < op.N or K & (K - 1):
        raise ValueError("K must be a power of two with K >= N")
    qk = (K.bit_length() - 1) - op.j
    x = gs_solve(op, y, params)
    tall = op.taller(qk)
    out = tall.forward(x)
    N = op.N
    if op.dim == 1:
        out[:N] = y
    else:
        out[:N, :N] = y
    return out


def _soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def cs_solve(A: CSOperator, y, params: SolverParams | None = None, x0=None, history: list | None = None):
    """QCBP ``min ||z||_1  s.t.  ||A z - y||^2 <= eta`` by Chambolle-Pock.

    Uses ``tau * sigma <= 1`` since ``||A|| <= 1``; a small ``tau`` with a
    large ``sigma`` suits coefficient vectors of order one.  On return
    ``||A z - y||^2 <= eta + feas_tol * max(eta, 1e-12)``; a least-squares
    correction enforces this if the iteration stopped outside the ball.  ``history`` (if given) receives the
    squared residual of every iterate.
    """
    params = params or SolverParams()
    y = np.asarray(y, dtype=float).ravel()
    eta = params.eta
    eps = math.sqrt(eta)
    tau, sigma = params.tau, params.sigma
    z = np.zeros(A.shape[1]) if x0 is None else np.asarray(x0, dtype=float).ravel().copy()
    p = np.zeros_like(y)
    slack = eta + params.feas_tol * max(eta, 1e-12)
    Az = A.forward(z)
    if np.linalg.norm(y) ** 2 <= eta and x0 is None:
        return z
    for k in range(params.pd_maxiter):
        z_new = _soft(z - tau * A.adjoint(p), tau)
        Az_new = A.forward(z_new)
        v = p + sigma * (2.0 * Az_new - Az)
        # prox of sigma F* for F the indicator of the ball B(y, eps) (Moreau)
        w = v / sigma - y
        nw = np.linalg.norm(w)
        proj = y + (w if nw <= eps else w * (eps / nw))
        p = v - sigma * proj
        step = np.linalg.norm(z_new - z)
        z, Az = z_new, Az_new
        res2 = float(np.sum((Az - y) ** 2))
        if history is not None:
            history.append(res2)
        if k > 10 and step <= params.pd_tol * max(np.linalg.norm(z), 1e-12) and res2 <= slack:
            break
    return _make_feasible(A, z, y, eta, slack)


def _make_feasible(A, z, y, eta, slack):
    r = y - A.forward(z)
    if r @ r <= slack:
        return z
    log.info("primal-dual iterate outside the data ball (%.3e > %.3e); correcting", r @ r, eta)
    op = A.aslinearoperator()
    d = lsqr(op, r, atol=1e-12, btol=1e-12, iter_lim=500)[0]
    r_d = r - A.forward(d)
    if r_d @ r_d > slack:
        raise InfeasibleError(f"least-squares residual {r_d @ r_d:.3e} exceeds eta = {eta:.3e}")
    # smallest t in [0, 1] with ||r - t A d||^2 <= eta (a quadratic in t)
    Ad = r - r_d
    a, b, c = Ad @ Ad, -2.0 * (r @ Ad), r @ r - eta * (1 - 1e-9)
    disc = max(b * b - 4 * a * c, 0.0)
    t = min(1.0, (-b - math.sqrt(disc)) / (2 * a)) if a > 0 else 1.0
    return z + t * d


# ---------------------------------------------------------------------------
# sampling patterns


def _bands(N: int, dim: int) -> np.ndarray:
    """Dyadic band of every flat index: band b holds ``2**(b-1) <= max(n) < 2**b``."""
    n = np.arange(N)
    b1 = np.where(n == 0, 0, np.floor(np.log2(np.maximum(n, 1))).astype(int) + 1)
    if dim == 1:
        return b1
    return np.maximum(b1[:, None], b1[None, :]).ravel()


def variable_density_mask(N: int, m: int, seed: int = 0, decay: float = 1.0, floor: int | None = None,
                          dim: int = 1) -> SamplingMask:
    """Fully sample indices below ``floor`` (per axis), then draw the rest with band weights ``2**(-decay*b)``.

    ``floor`` defaults to the largest power of two whose fully sampled block
    uses at most half of the budget.
    """
    total = N**dim
    if not 0 < m <= total:
        raise ValueError(f"m must be in 1..{total}")
    if floor is None:
        floor = 1
        while (2 * floor) ** dim <= m // 2 and 2 * floor <= N:
            floor *= 2
    n = np.arange(N)
    low = n < floor
    base = low if dim == 1 else (low[:, None] & low[None, :]).ravel()
    nfloor = int(base.sum())
    if m < nfloor:
        raise ValueError(f"m = {m} is below the fully sampled floor of {nfloor} indices")
    rest = np.nonzero(~base)[0]
    weights = 2.0 ** (-decay * _bands(N, dim)[rest])
    rng = np.random.default_rng(seed)
    pick = rng.choice(rest, size=m - nfloor, replace=False, p=weights / weights.sum()) if m > nfloor else []
    return SamplingMask(np.concatenate([np.nonzero(base)[0], np.asarray(pick, dtype=np.int64)]), total)


# ---------------------------------------------------------------------------
# evaluation on a grid


@lru_cache(maxsize=32)
def _basis_on_grid(spec: WaveletSpec, j: int, R: int) -> np.ndarray:
    """``B[k, m] = phi_{j,m}(t_k)`` at the midpoints ``t_k`` of ``2**(j+R)`` cells."""
    M = 1 << j
    fs = load_filters(spec)
    nu = spec.nu
    res = R + 1
    y = (2 * np.arange(M << R) + 1) / (1 << res)  # midpoints in level units
    B = np.zeros((y.size, M))
    phi = interior_samples(fs.h, res)
    periodic = spec.boundary == "periodic"
    for m in range(M):
        if not periodic and (m < nu or m >= M - nu):
            continue
        if periodic:
            B[:, m] = sum(phi.at(y - m - w) for w in (-M, 0, M))
        else:
            B[:, m] = phi.at(y - m)
    if not periodic:
        lefts = edge_samples(fs.h, fs.SL, fs.CL, fs.left_index, res, "left")
        rights = edge_samples(fs.h, fs.SR, fs.CR, fs.right_index, res, "right")
        for m in range(nu):
            B[:, m] = lefts[m].at(y)
            B[:, M - 1 - m] = rights[m].at(y - M)
    B *= 2.0 ** (j / 2)
    B.setflags(write=False)
    return B


def synthesize(spec: WaveletSpec, j: int, coeffs, R: int = 5) -> np.ndarray:
    """Values of ``sum_m c_m phi_{j,m}`` at the cell midpoints of a ``2**(j+R)`` grid (per axis)."""
    B = _basis_on_grid(spec, j, R)
    c = np.asarray(coeffs, dtype=float)
    if c.ndim == 1:
        return B @ c
    return B @ c @ B.T


def project(spec: WaveletSpec, j: int, f, dim: int = 1, R: int = 5) -> np.ndarray:
    """Orthogonal projection coefficients ``<f, phi_{j,m}>`` by midpoint quadrature on the grid."""
    B = _basis_on_grid(spec, j, R)
    t = midpoints(j + R)
    w = 1.0 / t.size
    if dim == 1:
        return B.T @ f(t) * w
    return B.T @ f(t[:, None], t[None, :]) @ B * (w * w)


def walsh_series(y, G: int) -> np.ndarray:
    """Truncated Walsh series with coefficients ``y`` at the midpoints of ``G`` cells (per axis)."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        pad = np.zeros(G)
        pad[: y.size] = y
        return fwht_sequency(pad)
    pad = np.zeros((G, G))
    pad[: y.shape[0], : y.shape[1]] = y
    return fwht_sequency(fwht_sequency(pad, axis=0), axis=1)


def pbdw_values(op: FastOp, x, y, R: int = 5) -> np.ndarray:
    """The untruncated PBDW estimate ``f~ + sum_{n<N} (y - A x)_n w_n`` on the synthesis grid.

    ``x`` is the GS solution.  The error of this function is the part of
    ``f - f~`` orthogonal to the sampled Walsh functions, so it never exceeds
    the GS error; :func:`pbdw_solve` returns its first ``K`` Walsh coefficients.
    """
    vals = synthesize(op.spec, op.j, x, R)
    return vals + walsh_series(np.asarray(y, dtype=float) - op.forward(x), vals.shape[0])


def relative_error(f, values, dim: int = 1) -> float:
    """``||f - values|| / ||f||`` over the cell midpoints matching ``values``."""
    G = values.shape[0]
    t = midpoints(G.bit_length() - 1)
    ref = f(t) if dim == 1 else f(t[:, None], t[None, :])
    return float(np.linalg.norm(ref - values) / np.linalg.norm(ref))


# ---------------------------------------------------------------------------
# file formats


def write_vector_csv(path, v, header: bool = True) -> None:
    """1D: ``index,value`` rows; 2D: one CSV row per array row, with a shape header."""
    v = np.asarray(v, dtype=float)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        if v.ndim == 1:
            if header:
                wr.writerow(["index", "value"])
            for i, x in enumerate(v):
                wr.writerow([i, repr(float(x))])
        else:
            if header:
                wr.writerow([f"# shape {v.shape[0]}x{v.shape[1]}"])
            for row in v:
                wr.writerow([repr(float(x)) for x in row])


def read_vector_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if rows and rows[0] == ["index", "value"]:
        rows = rows[1:]
        idx = np.array([int(r[0]) for r in rows])
        if not np.array_equal(idx, np.arange(idx.size)):
            raise ValueError("1D CSV indices must run 0..n-1")
        return np.array([float(r[1]) for r in rows])
    return np.array([[float(x) for x in r] for r in rows])


def write_mask(path, mask: SamplingMask) -> None:
    Path(path).write_text("".join(f"{i}\n" for i in mask.indices))


def read_mask(path, size: int) -> SamplingMask:
    lines = [s.strip() for s in Path(path).read_text().splitlines()]
    return SamplingMask([int(s) for s in lines if s], size)
