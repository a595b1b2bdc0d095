"""Dense reference matrices, subspace angles and stable sampling rates.

Two independent constructions of the ``N x M`` change-of-basis matrix:

* ``"lemma"`` assembles each entry from the kernel table and exact Walsh
  evaluations (the same factorisation the fast operator uses, without FWHTs);
* ``"quadrature"`` samples every basis function with the cascade algorithm
  and integrates it against each Walsh function cell by cell.  It shares
  nothing with the kernel code beyond the filter data.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicRational, walsh_eval
from .kernels import get_kernels
from .wavelets.cascade import edge_samples, interior_samples
from .wavelets.filters import load_filters
from .wavelets.spec import WaveletSpec

MAX_ENTRIES = 1 << 26
DEFAULT_QUAD_RESOLUTION = 14

# Table 1 of the reference results: VMP boundaries, 1D at j = 7 and 2D at j = 5
TABLE1_WAVELETS = ("db2", "db3", "db4", "db5", "db6", "sym2", "sym3", "sym4", "sym5", "sym6")
TABLE1_Q = (1, 2, 3, 4)


@dataclass(frozen=True)
class DenseCob:
    matrix: np.ndarray
    spec: WaveletSpec
    j: int
    q: int


@dataclass(frozen=True)
class AngleReport:
    mu: float
    sigma_max: float
    sigma_min: float
    cond: float


def walsh_matrix(N: int) -> np.ndarray:
    """Dense sequency Hadamard matrix ``H[n, k] = w_n(k/N)`` by scalar evaluation."""
    r = N.bit_length() - 1
    return np.array([[walsh_eval(n, DyadicRational(k, r)) for k in range(N)] for n in range(N)], dtype=float)


def _check_size(j: int, q: int, dim: int = 1):
    entries = (1 << (j + q)) ** dim * (1 << j) ** dim
    if entries > MAX_ENTRIES:
        raise ValueError(f"dense matrix would have {entries} entries (limit {MAX_ENTRIES})")


def _lemma(spec: WaveletSpec, j: int, q: int, cache_dir=None) -> np.ndarray:
    kt = get_kernels(spec, max(q, 1), cache_dir)
    nu, M, N = spec.nu, 1 << j, 1 << (j + q)
    s = np.arange(N) >> j
    n = np.arange(N)
    wcache: dict[int, np.ndarray] = {}

    def w(p):
        if p not in wcache:
            wcache[p] = np.array([walsh_eval(int(k), DyadicRational(p, j)) for k in n], dtype=float)
        return wcache[p]

    D = np.zeros((N, M))
    periodic = spec.boundary == "periodic"
    for m in range(M):
        if not periodic and (m < nu or m >= M - nu):
            continue
        for l in range(-nu + 1, nu):
            D[:, m] += w((l + m) % M) * kt.kappa(l)[s]
    if not periodic:
        for m in range(nu):
            for r in range(nu + m):
                D[:, m] += w(r) * kt.left[m, r][s]
                D[:, M - 1 - m] += w(M - 1 - r) * kt.right[m, r][s]
    return D * 2.0 ** (-j / 2)


def _cell_integrals(values: np.ndarray, start: int, R: int, q: int, ncells: int) -> np.ndarray:
    """Trapezoid integrals over cells ``[c, c+1] / 2**q`` of samples at ``start + k / 2**R``.

    ``start`` is given in cells; samples outside ``0 .. ncells`` are ignored.
    """
    per = 1 << (R - q)
    out = np.zeros(ncells)
    ncell_f = (values.size - 1) // per
    for c in range(ncell_f):
        cell = start + c
        if 0 <= cell < ncells:
            seg = values[c * per:(c + 1) * per + 1]
            out[cell] += (seg.sum() - 0.5 * (seg[0] + seg[-1])) / (1 << R)
    return out


def _quadrature(spec: WaveletSpec, j: int, q: int, R: int) -> np.ndarray:
    fs = load_filters(spec)
    nu, M, N = spec.nu, 1 << j, 1 << (j + q)
    cells_per_unit = 1 << q
    phi = interior_samples(fs.h, R)
    masses = np.zeros((N, M))
    periodic = spec.boundary == "periodic"
    for m in range(M):
        if not periodic and (m < nu or m >= M - nu):
            continue
        for wrap in ((-M, 0, M) if periodic else (0,)):
            left = m + wrap + phi.left
            masses[:, m] += _cell_integrals(phi.values, left * cells_per_unit, R, q, N)
    if not periodic:
        lefts = edge_samples(fs.h, fs.SL, fs.CL, fs.left_index, R, "left")
        rights = edge_samples(fs.h, fs.SR, fs.CR, fs.right_index, R, "right")
        for m in range(nu):
            masses[:, m] = _cell_integrals(lefts[m].values, 0, R, q, N)
            start = (M + rights[m].left) * cells_per_unit
            masses[:, M - 1 - m] = _cell_integrals(rights[m].values, start, R, q, N)
    return walsh_matrix(N) @ masses * 2.0 ** (-j / 2)


def build_dense(spec: WaveletSpec, j: int, q: int, method: str = "lemma",
                R: int = DEFAULT_QUAD_RESOLUTION, cache_dir=None) -> DenseCob:
    """Dense ``P_N U P_M`` for small sizes, by either independent construction."""
    _check_size(j, q)
    if spec.nu > 1 and j < spec.j0:
        raise ValueError(f"{spec} needs j >= {spec.j0}")
    if method == "lemma":
        D = _lemma(spec, j, q, cache_dir)
    elif method == "quadrature":
        if R < q:
            raise ValueError("quadrature resolution must be >= q")
        D = _quadrature(spec, j, q, R)
    else:
        raise ValueError("method must be 'lemma' or 'quadrature'")
    return DenseCob(D, spec, j, q)


def subspace_angle(dense) -> AngleReport:
    """``mu = 1 / sigma_min`` of the dense matrix (``inf`` when numerically rank deficient)."""
    A = dense.matrix if isinstance(dense, DenseCob) else np.asarray(dense)
    if A.shape[0] < A.shape[1]:
        raise ValueError("need at least as many rows as columns")
    s = np.linalg.svd(A, compute_uv=False)
    smin, smax = float(s[-1]), float(s[0])
    if smin < 1e-12:
        return AngleReport(math.inf, smax, smin, math.inf)
    return AngleReport(1.0 / smin, smax, smin, smax / smin)


def mu_1d(spec: WaveletSpec, j: int, q: int, cache_dir=None) -> float:
    """``mu`` from the fast operator's columns (cheap route for Table 1)."""
    from .fastop import FastOp

    _check_size(j, q)
    op = FastOp(spec, j, q, cache_dir=cache_dir)
    return subspace_angle(op.to_dense()).mu


def stable_sampling_probe(spec: WaveletSpec, j_range, gamma: float, q_max: int = 6,
                          cache_dir=None) -> dict:
    """Smallest ``q`` with ``mu <= gamma`` for each ``j`` (``None`` if the size guard is hit first)."""
    if gamma <= 1:
        raise ValueError("gamma must exceed 1")
    out = {}
    for j in j_range:
        found = None
        for q in range(1, q_max + 1):
            try:
                mu = mu_1d(spec, j, q, cache_dir)
            except ValueError:
                break
            if mu <= gamma:
                found = q
                break
        out[j] = found
    return out


def table1(wavelets=TABLE1_WAVELETS, qs=TABLE1_Q, j: int = 7, boundary: str = "vmp",
           cache_dir=None) -> dict:
    """``{name: [mu for q in qs]}`` for the 1D operator at level ``j``."""
    return {w: [mu_1d(WaveletSpec.parse(w, boundary), j, q, cache_dir) for q in qs] for w in wavelets}


def table1_csv(results: dict, qs=TABLE1_Q, with_2d: bool = True) -> str:
    """CSV with one row per wavelet; the 2D panel squares the 1D values."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    head = ["wavelet"] + [f"q{q}_1d" for q in qs]
    if with_2d:
        head += [f"q{q}_2d" for q in qs]
    wr.writerow(head)
    for name, mus in results.items():
        row = [name] + [f"{m:.3f}" for m in mus]
        if with_2d:
            row += [f"{m * m:.3f}" for m in mus]
        wr.writerow(row)
    return buf.getvalue()
