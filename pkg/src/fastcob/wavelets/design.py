"""Offline construction of filter data: spectral factorisation and boundary-corrected bases.

Nothing here runs on the hot path.  ``tools/generate_filters.py`` calls
:func:`build_filter_set` once per wavelet and writes the result with
:func:`fastcob.wavelets.filters.write_filter_file`.

Index conventions (``nu`` vanishing moments):

* interior taps ``h[k]`` for ``k = -nu+1 .. nu``, so ``supp(phi) = [-nu+1, nu]``;
* left edge functions are combinations of the half-line restrictions
  ``phi(x - n) | [0, inf)`` for ``n = -nu+1 .. nu-1``;
* right edge functions use ``phi(x - n) | (-inf, 0]`` for ``n = -nu .. nu-2``.

The left edge space is spanned by the boundary parts of the polynomial
reproductions ``x**k = sum_n c_k(n) phi(x - n)``, ``k < nu``.  Choosing
polynomial sequences that vanish on ``n = m+1 .. nu-1`` yields functions
supported on ``[0, nu + m]``; Gram-Schmidt in order of ``m`` keeps the
staggered supports.
"""
from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np
from scipy import linalg

from .spec import WaveletSpec

mpmath.mp.dps = 40


# ---------------------------------------------------------------------------
# interior filters


def _daubechies_y_roots(nu: int):
    coeffs = [mpmath.binomial(nu - 1 + k, k) for k in range(nu)]
    if nu == 1:
        return []
    # mpmath wants the leading coefficient first
    return mpmath.polyroots(coeffs[::-1], maxsteps=200, extraprec=200)


def _z_pairs(nu: int):
    """For each root y of the Daubechies polynomial, the reciprocal pair (z, 1/z)."""
    pairs = []
    for y in _daubechies_y_roots(nu):
        b = 2 - 4 * y
        disc = mpmath.sqrt(b * b - 4)
        z1 = (b + disc) / 2
        z2 = (b - disc) / 2
        if abs(z1) > abs(z2):
            z1, z2 = z2, z1
        pairs.append((z1, z2))
    return pairs


def _filter_from_roots(nu: int, roots) -> list:
    poly = [mpmath.mpf(1)]
    factors = [[mpmath.mpf(1), mpmath.mpf(1)]] * nu + [[-r, mpmath.mpf(1)] for r in roots]
    for f in factors:
        new = [mpmath.mpf(0)] * (len(poly) + 1)
        for i, a in enumerate(poly):
            new[i] += a * f[0]
            new[i + 1] += a * f[1]
        poly = new
    taps = [mpmath.re(c) for c in poly]
    scale = mpmath.sqrt(2) / mpmath.fsum(taps)
    return [t * scale for t in taps]


def _root_choices(nu: int):
    pairs = _z_pairs(nu)
    # complex roots come in conjugate pairs; the choice must be made consistently
    groups = []
    used = set()
    for i, (a, _) in enumerate(pairs):
        if i in used:
            continue
        used.add(i)
        partner = None
        if abs(mpmath.im(a)) > 1e-20:
            for k in range(i + 1, len(pairs)):
                if k not in used and abs(pairs[k][0] - mpmath.conj(a)) < 1e-15:
                    partner = k
                    break
            if partner is not None:
                used.add(partner)
        groups.append((i, partner))
    for bits in itertools.product((0, 1), repeat=len(groups)):
        roots = []
        for (i, k), b in zip(groups, bits):
            roots.append(pairs[i][b])
            if k is not None:
                roots.append(pairs[k][b])
        yield roots


def design_filter_exact(nu: int, target=None) -> list:
    """Extended precision taps; see :func:`design_filter`."""
    if nu == 1:
        return [1 / mpmath.sqrt(2)] * 2
    if target is None:
        # minimum phase: every chosen zero inside the unit circle, energy front-loaded
        taps = _filter_from_roots(nu, [p[0] for p in _z_pairs(nu)])
        energy = lambda t: mpmath.fsum(mpmath.fsum(x * x for x in t[:i + 1]) for i in range(len(t)))
        return taps if energy(taps) >= energy(taps[::-1]) else taps[::-1]
    tgt = np.asarray(target, dtype=float)
    best, best_err = None, np.inf
    for roots in _root_choices(nu):
        taps = _filter_from_roots(nu, roots)
        for cand in (taps, taps[::-1]):
            err = np.abs(np.array([float(t) for t in cand]) - tgt).max()
            if err < best_err:
                best, best_err = cand, err
    if best_err > 1e-6:
        raise ValueError(f"no spectral factor within 1e-6 of the reference (best {best_err:.2e})")
    return best


def design_filter(nu: int, target=None) -> np.ndarray:
    """Orthonormal scaling filter with ``nu`` vanishing moments and minimal support.

    Without ``target`` the minimum-phase (Daubechies) factor is returned.  With
    a reference filter (e.g. published symlet taps) the spectral factor closest
    to it is rebuilt in extended precision, which removes rounding in the
    reference while keeping its phase choice.
    """
    return np.array([float(t) for t in design_filter_exact(nu, target)])


# ---------------------------------------------------------------------------
# exact integrals of products of translates
#
# Everything below runs in mpmath: restricted translates near the far end of
# the edge window barely touch the half line, so the Gram matrices are close
# to singular and double precision loses about six digits.


def _mp_taps(h) -> list:
    return [t if isinstance(t, mpmath.mpf) else mpmath.mpf(float(t)) for t in h]


def _hget(h, nu: int, k: int):
    i = k + nu - 1
    return h[i] if 0 <= i < len(h) else 0


def half_line_gram(h, nu: int) -> dict:
    """``I(a, b) = int_0^inf phi(x-a) phi(x-b) dx`` for the undetermined block.

    Solves the linear system implied by the two-scale relation
    ``I(a, b) = sum_{r, s} h_r h_s I(2a + r, 2b + s)``.  Pairs where one
    translate lies inside ``[0, inf)`` are ``delta_ab``; pairs with a translate
    inside ``(-inf, 0]`` vanish.
    """
    h = _mp_taps(h)
    lo, hi = -nu + 1, nu - 2
    idx = {(a, b): i for i, (a, b) in enumerate(itertools.product(range(lo, hi + 1), repeat=2))}
    size = len(idx)
    if size == 0:
        return {}
    A = mpmath.eye(size)
    rhs = mpmath.matrix(size, 1)
    taps = range(-nu + 1, nu + 1)
    for (a, b), i in idx.items():
        for r in taps:
            hr = _hget(h, nu, r)
            for s in taps:
                w = hr * _hget(h, nu, s)
                aa, bb = 2 * a + r, 2 * b + s
                if aa >= nu - 1 or bb >= nu - 1:
                    if aa == bb:
                        rhs[i] += w
                elif aa <= -nu or bb <= -nu:
                    continue
                else:
                    A[i, idx[(aa, bb)]] -= w
    sol = mpmath.lu_solve(A, rhs)
    return {key: sol[i] for key, i in idx.items()}


def restricted_gram(h, nu: int, indices, side: str, block: dict | None = None):
    """Gram matrix (mpmath) of ``phi(x - n)`` restricted to the half line on ``side``."""
    if block is None:
        block = half_line_gram(h, nu)
    idx = [int(n) for n in indices]
    G = mpmath.matrix(len(idx), len(idx))
    for i, a in enumerate(idx):
        for k, b in enumerate(idx):
            if a >= nu - 1 or b >= nu - 1:
                right = mpmath.mpf(a == b)
            elif a <= -nu or b <= -nu:
                right = mpmath.mpf(0)
            else:
                right = block[(a, b)]
            G[i, k] = right if side == "left" else (a == b) - right
    return G


# ---------------------------------------------------------------------------
# boundary scaling functions


def _vanishing_basis(points, zeros, nu):
    """Rows: polynomial sequences of degree < nu, row m vanishing on ``zeros[m]``."""
    B = mpmath.matrix(len(zeros), len(points))
    for m, zs in enumerate(zeros):
        for c, p in enumerate(points):
            v = mpmath.mpf(1)
            for z in zs:
                v *= int(p) - z
            B[m, c] = v
    return B


def _cholesky_lower(A):
    n = A.rows
    L = mpmath.matrix(n, n)
    for i in range(n):
        for k in range(i + 1):
            s = A[i, k] - mpmath.fsum(L[i, t] * L[k, t] for t in range(k))
            L[i, k] = mpmath.sqrt(s) if i == k else s / L[k, k]
    return L


def _to_numpy(A) -> np.ndarray:
    return np.array([[float(A[i, k]) for k in range(A.cols)] for i in range(A.rows)])


def edge_coefficients_exact(h, nu: int):
    """Extended precision version of :func:`edge_translate_coefficients`."""
    h = _mp_taps(h)
    block = half_line_gram(h, nu)
    left_idx = np.arange(-nu + 1, nu)
    right_idx = np.arange(-nu, nu - 1)
    out = []
    for side, idx in (("left", left_idx), ("right", right_idx)):
        if side == "left":
            zeros = [list(range(m + 1, nu)) for m in range(nu)]
        else:
            zeros = [list(range(-nu, -m - 1)) for m in range(nu)]
        B = _vanishing_basis(idx, zeros, nu)
        G = restricted_gram(h, nu, idx, side, block)
        L = _cholesky_lower(B * G * B.T)
        C = mpmath.inverse(L) * B
        out.extend([C, idx])
    return tuple(out)


def edge_translate_coefficients(h, nu: int):
    """Orthonormal staggered edge functions as combinations of restricted translates.

    Returns ``(CL, left_idx, CR, right_idx)``; ``CL[m]`` has support ``[0, nu+m]``
    and ``CR[m]`` has support ``[-nu-m, 0]``.
    """
    CL, li, CR, ri = edge_coefficients_exact(h, nu)
    return _to_numpy(CL), li, _to_numpy(CR), ri


def scaling_refinement(h, nu, C, idx, side: str, width: int) -> np.ndarray:
    """Two-scale rows of edge functions in mirrored level-one coordinates.

    Coordinate ``t < nu`` is edge function ``t`` at the finer level; ``t >= nu``
    is the interior translate ``p = t`` (left) or ``p = -1 - t`` (right).
    ``h`` and ``C`` should come from the extended precision constructors.
    """
    h = _mp_taps(h)
    if not isinstance(C, mpmath.matrix):
        C = mpmath.matrix(np.asarray(C, dtype=float).tolist())
    idx = [int(n) for n in idx]
    nedge = C.rows
    # d[m][p]: sum_n C[m,n] phi(x-n) = sqrt2 sum_p d[m,p] phi(2x-p)
    d: list[dict] = [dict() for _ in range(nedge)]
    for k, n in enumerate(idx):
        for r in range(-nu + 1, nu + 1):
            p = 2 * n + r
            for m in range(nedge):
                d[m][p] = d[m].get(p, 0) + C[m, k] * _hget(h, nu, r)
    if side == "left":
        is_edge = lambda p: -nu + 1 <= p <= nu - 1
        tpos = lambda p: p
    else:
        is_edge = lambda p: -nu <= p <= nu - 2
        tpos = lambda p: -1 - p
    # restricted part, projected onto the G-orthonormal fine edge basis
    full = mpmath.matrix(nedge, len(idx))
    S = np.zeros((nedge, width))
    for m in range(nedge):
        for p, v in d[m].items():
            if is_edge(p):
                full[m, idx.index(p)] = v
            elif (side == "left" and p >= nu) or (side == "right" and p <= -nu - 1):
                t = tpos(p)
                if t >= width:
                    if abs(v) > mpmath.mpf(10) ** -30:
                        raise ValueError("window too narrow for the refinement rows")
                    continue
                S[m, t] = float(v)
    G = restricted_gram(h, nu, idx, side)
    Aedge = full * G * C.T
    diff = full - Aedge * C
    resid = max(abs(mpmath.sqrt(abs((diff[m, :] * G * diff[m, :].T)[0]))) for m in range(nedge))
    if resid > 1e-20:
        raise ArithmeticError(f"edge refinement not closed (residual {float(resid):.2e})")
    S[:, :nu] = _to_numpy(Aedge)
    return S


# ---------------------------------------------------------------------------
# boundary wavelets


def _level_matrices(h, nu, SL, SR, M):
    """Columns: coarse scaling basis, then interior wavelets, in fine coordinates (length M)."""
    half = M // 2
    g = np.array([(-1) ** (r % 2) * _hget(h, nu, 1 - r) for r in range(-nu + 1, nu + 1)])
    phi = np.zeros((M, half))
    width = SL.shape[1]
    for m in range(nu):
        phi[:width, m] += SL[m]
        phi[M - 1 - np.arange(width), half - 1 - m] += SR[m]
    for n in range(nu, half - nu):
        phi[2 * n + np.arange(-nu + 1, nu + 1), n] = h
    psi = np.zeros((M, half - 2 * nu))
    for c, k in enumerate(range(nu, half - nu)):
        psi[2 * k + np.arange(-nu + 1, nu + 1), c] = g
    return phi, psi, g


def staggered_basis(Q: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of span(Q) ordered by growing support from index 0.

    Vector ``k`` of the result spans the new directions of
    ``{v in span Q : v[i] = 0 for i >= cut}`` as ``cut`` increases.
    """
    M, dim = Q.shape
    chosen: list[np.ndarray] = []
    for cut in range(1, M + 1):
        tail = Q[cut:]
        if tail.size:
            _, s, vt = np.linalg.svd(tail, full_matrices=True)
            rank = int((s > tol).sum())
            null = vt[rank:].T
        else:
            null = np.eye(dim)
        if null.shape[1] <= len(chosen):
            continue
        V = Q @ null
        for c in chosen:
            V -= np.outer(c, c @ V)
        u, s, _ = np.linalg.svd(V, full_matrices=False)
        for k in range(int((s > tol).sum())):
            v = u[:, k]
            last = np.nonzero(np.abs(v) > tol)[0][-1]
            chosen.append(v * np.sign(v[last]))
        if len(chosen) == dim:
            break
    return np.array(chosen).T


def boundary_wavelets(h, nu, SL, SR, width: int, M: int | None = None):
    """Left/right edge wavelets as mirrored windows of level-one coordinates."""
    if M is None:
        M = 1 << max(6, math.ceil(math.log2(8 * width)))
    phi, psi, _ = _level_matrices(h, nu, SL, SR, M)
    basis = np.hstack([phi, psi])
    err = np.abs(basis.T @ basis - np.eye(basis.shape[1])).max()
    if err > 1e-10:
        raise ArithmeticError(f"coarse basis is not orthonormal ({err:.2e})")
    Q = linalg.null_space(basis.T)
    if Q.shape[1] != 2 * nu:
        raise ArithmeticError(f"wavelet complement has dimension {Q.shape[1]}, expected {2 * nu}")
    out = []
    for side in ("left", "right"):
        Qs = Q if side == "left" else Q[::-1]
        # restrict to the directions living on this half of the interval
        _, s, vt = np.linalg.svd(Qs[M // 2:], full_matrices=True)
        local = Qs @ vt[int((s > 1e-9).sum()):].T
        W = staggered_basis(local)
        if np.abs(W[width:]).max() > 1e-10:
            raise ValueError("edge wavelets exceed the storage window")
        out.append(W[:width].T.copy())
    return out[0], out[1]


def build_filter_set(spec: WaveletSpec, target=None) -> dict:
    """All arrays stored in a filter data file for ``spec`` (boundary mode ignored).

    ``target`` selects the spectral factor as in :func:`design_filter`.
    """
    nu = spec.nu
    hx = design_filter_exact(nu, target)
    arrays = {"h": np.array([[float(t) for t in hx]])}
    if nu == 1:
        return arrays
    CL, lidx, CR, ridx = edge_coefficients_exact(hx, nu)
    width = 3 * nu
    SL = scaling_refinement(hx, nu, CL, lidx, "left", width)
    SR = scaling_refinement(hx, nu, CR, ridx, "right", width)
    h = arrays["h"].ravel()
    WL, WR = boundary_wavelets(h, nu, SL, SR, width)
    arrays.update(CL=_to_numpy(CL), CR=_to_numpy(CR), SL=SL, SR=SR, WL=WL, WR=WR)
    return arrays
