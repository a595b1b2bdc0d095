"""Matrix-free application of the truncated Walsh-to-wavelet change of basis.

``FastOp(spec, j, q)`` represents the ``N x M`` matrix with entries
``<phi_{j,m}, w_n>``, ``M = 2**j``, ``N = 2**(j+q)``, for the scaling basis on
[0, 1] described by ``spec`` (columns: left edge, interior, right edge).

For a unit translate supported on cells ``l .. l+1`` of the level-``j`` grid,

    <phi_{j,m}, w_n> = 2**(-j/2) sum_l w_n((l + m) / 2**j) kappa_l(floor(n / 2**j)),

so the product with a coefficient vector is a sum over ``l`` of a sequency
FWHT of a zero-padded embedding (the ``w_n`` factor) followed by a diagonal
kernel weighting that is constant on blocks of ``2**j`` consecutive ``n``.

At level-``j`` grid points ``w_{s M + m}`` equals ``w_m`` for even ``s`` and
``w_{M-1-m}`` for odd ``s`` (the low ``j`` bits of the Gray code differ only in
bit ``j-1``).  So every length-``M`` output block ``s`` is a length-``M``
transform of ``sum_l kappa_l(s) shift_l(xi)``, and a single precomputed gather
puts the blocks into sequency order (reversed on odd blocks).  With few blocks
(``2**q <= 4 nu - 1``) each block is filtered and transformed on its own, the
edge coefficients entering as impulses at their grid points; otherwise the
``2 nu - 1`` shifts are transformed once and contracted with the kernel table.
"""
from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d
from scipy.sparse.linalg import LinearOperator

from . import dyadic
from .kernels import KernelTable, get_kernels
from .wavelets import dwt as _dwt
from .wavelets.spec import WaveletSpec

__all__ = ["FastOp", "CSOperator", "SamplingMask", "compose_cs", "haar_fullrank",
           "pad_to_power_of_two", "walsh_rows"]


def walsh_rows(points, scale: int, N: int) -> np.ndarray:
    """``out[i, n] = w_n(points[i] / 2**scale)`` for ``n < N``."""
    n = np.arange(N, dtype=np.int64)
    return np.array([dyadic.walsh_row(n, int(p), scale) for p in points]).reshape(len(points), N)


class FastOp:
    """The matrix ``P_N U P_M`` applied in ``O(nu N log N)`` without forming it.

    ``dim = 2`` acts on ``M x M`` coefficient arrays with the tensor product
    basis; forward is ``G xi G^T`` for the 1D matrix ``G``.
    """

    def __init__(self, spec: WaveletSpec, j: int, q: int, kernels: KernelTable | None = None,
                 dim: int = 1, cache_dir=None):
        if dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if q < 0:
            raise ValueError("q must be >= 0")
        if spec.nu == 1:
            if j < 0:
                raise ValueError("j must be >= 0")
        elif j < spec.j0:
            raise ValueError(f"{spec} needs j >= {spec.j0} so that interior functions exist; got j={j}")
        if kernels is None:
            kernels = get_kernels(spec, max(q, 1), cache_dir)
        if kernels.spec != spec:
            raise ValueError(f"kernel table is for {kernels.spec}, operator for {spec}")
        if kernels.q < q:
            raise ValueError(f"kernel table holds q={kernels.q} < {q}")
        self.spec, self.j, self.q, self.dim = spec, j, q, dim
        self.M, self.N = 1 << j, 1 << (j + q)
        self.kernels = kernels
        self.fwht_calls = 0
        nu = spec.nu
        S = 1 << q
        self._kappa = np.ascontiguousarray(kernels.interior[:, :S])
        self._left = np.ascontiguousarray(kernels.left[..., :S])
        self._right = np.ascontiguousarray(kernels.right[..., :S])
        self._scale = 2.0 ** (-j / 2)
        self._shifts = np.arange(-nu + 1, nu)
        if spec.boundary == "periodic":
            self._inner = np.arange(self.M)
        else:
            self._inner = np.arange(nu, self.M - nu)
        # natural-order block position -> sequency-ordered output position
        self._perm_M = dyadic.sequency_permutation(self.M)
        perm = self._perm_M
        order = np.where((np.arange(S) % 2 == 0)[:, None], perm, perm[::-1]) + self.M * np.arange(S)[:, None]
        self._gather = order.ravel()
        self._scatter = np.empty_like(self._gather)
        self._scatter[self._gather] = np.arange(self.N)
        self._mode = "wrap" if spec.boundary == "periodic" else "constant"
        # one transform per block beats one per shift; wrap filtering needs M >= 2 nu - 1
        self._per_block = S <= 4 * nu - 1 and self.M >= 2 * nu - 1
        if spec.boundary == "vmp":
            # level-j grid points touched by the edge functions: left, then right
            r = np.arange(2 * nu - 1)
            self._edge_pts = np.concatenate([r, self.M - 1 - r])

    # -- shapes ----------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N ** self.dim, self.M ** self.dim)

    def _blocks(self, v):
        # (N, k) -> (2**q, M, k) view: block s holds n with floor(n / M) = s
        return v.reshape(1 << self.q, self.M, -1)

    # -- 1D kernels on stacked columns (leading axis) ----------------------------

    def _window_index(self) -> np.ndarray:
        # rows of the padded array holding column positions m + l for the shift window
        nu = self.spec.nu
        return np.arange(-(nu - 1), self.M + nu - 1)

    def _masked(self, xi: np.ndarray) -> np.ndarray:
        # xi on the columns carried by interior translates, zero elsewhere
        if self.spec.boundary == "periodic":
            return xi
        nu = self.spec.nu
        out = np.zeros_like(xi)
        out[nu:self.M - nu] = xi[nu:self.M - nu]
        return out

    def _embed(self, xi: np.ndarray) -> np.ndarray:
        # (M, shifts, k): column i holds xi on the interior moved by shift l_i,
        # i.e. z[m, i] = xi[m - l_i] for m - l_i in the interior
        M, nu = self.M, self.spec.nu
        if self.spec.boundary == "periodic":
            p = xi[self._window_index() % M]
        else:
            p = np.zeros((M + 2 * nu - 2, xi.shape[1]))
            p[2 * nu - 1:M - 1] = xi[nu:M - nu]
        win = np.lib.stride_tricks.sliding_window_view(p, len(self._shifts), axis=0)
        return win[:, :, ::-1].transpose(0, 2, 1).copy()

    def _unembed(self, z: np.ndarray) -> np.ndarray:
        # adjoint of _embed: out[m] = sum_i z[m + l_i, i] over the interior m
        M, nu = self.M, self.spec.nu
        zp = np.zeros((M + 2 * nu - 2,) + z.shape[1:])
        if self.spec.boundary == "periodic":
            zp[...] = z[self._window_index() % M]
        else:
            zp[nu - 1:M + nu - 1] = z
        out = np.zeros((M, z.shape[2]))
        for i in range(len(self._shifts)):
            out += zp[i:i + M, i]
        return self._masked(out)

    def _edge_rows(self) -> np.ndarray:
        # (M, R): natural-order Walsh rows at the edge grid points, built per call
        rows = np.empty((self.M, len(self._edge_pts)))
        rows[self._perm_M] = walsh_rows(self._edge_pts, self.j, self.M).T
        return rows

    def _edge_coeffs(self, xi: np.ndarray) -> np.ndarray:
        # (S, R, k): c[s, r] = sum_m kappa^edge_{m,r}(s) xi_m, left rows then right rows
        nu, M = self.spec.nu, self.M
        cl = np.einsum("mrs,mk->srk", self._left, xi[:nu])
        cr = np.einsum("mrs,mk->srk", self._right, xi[M - 1 - np.arange(nu)])
        return np.concatenate([cl, cr], axis=1)

    def _edge_adjoint(self, edge: np.ndarray, out: np.ndarray) -> None:
        # out[edge columns] += transposed edge kernels applied to edge[s, r]
        nu, M, R = self.spec.nu, self.M, len(self._edge_pts) // 2
        out[:nu] += np.einsum("mrs,srk->mk", self._left, edge[:, :R])
        out[M - 1 - np.arange(nu)] += np.einsum("mrs,srk->mk", self._right, edge[:, R:])

    def _forward_cols(self, xi: np.ndarray) -> np.ndarray:
        M, k, S = self.M, xi.shape[1], 1 << self.q
        vmp = self.spec.boundary == "vmp"
        if self._per_block:
            xm = self._masked(xi)
            blocks = np.empty((S, M, k))
            for s in range(S):
                # blocks[s][m] = sum_i kappa_i(s) xm[m - l_i]
                correlate1d(xm, self._kappa[::-1, s], axis=0, output=blocks[s], mode=self._mode)
            if vmp:
                np.add.at(blocks, (slice(None), self._edge_pts), self._edge_coeffs(xi))
            for s in range(S):
                dyadic.fwht_natural_inplace(blocks[s])
            self.fwht_calls += S
        else:
            y = self._embed(xi)
            dyadic.fwht_natural_inplace(y.reshape(M, -1))
            self.fwht_calls += len(self._shifts)
            blocks = np.tensordot(self._kappa, y, axes=(0, 1))
            if vmp:
                blocks += np.matmul(self._edge_rows(), self._edge_coeffs(xi))
        out = blocks.reshape(self.N, k)[self._gather]
        out *= self._scale
        return out

    def _adjoint_cols(self, alpha: np.ndarray) -> np.ndarray:
        M, k, S = self.M, alpha.shape[1], 1 << self.q
        vmp = self.spec.boundary == "vmp"
        blocks = alpha[self._scatter].reshape(S, M, k)
        if self._per_block:
            for s in range(S):
                dyadic.fwht_natural_inplace(blocks[s])
            self.fwht_calls += S
            out = np.zeros((M, k))
            tmp = np.empty((M, k))
            for s in range(S):
                correlate1d(blocks[s], self._kappa[:, s], axis=0, output=tmp, mode=self._mode)
                out += tmp
            out = self._masked(out)
            if vmp:
                self._edge_adjoint(blocks[:, self._edge_pts], out)
        else:
            g = np.ascontiguousarray(np.tensordot(blocks, self._kappa, axes=(0, 1)).transpose(0, 2, 1))
            dyadic.fwht_natural_inplace(g.reshape(M, -1))
            self.fwht_calls += len(self._shifts)
            out = self._unembed(g)
            if vmp:
                self._edge_adjoint(np.matmul(self._edge_rows().T, blocks), out)
        out *= self._scale
        return out

    def _apply_axis(self, x: np.ndarray, axis: int, fn) -> np.ndarray:
        moved = np.moveaxis(x, axis, 0)
        lead = moved.shape[0]
        res = fn(np.ascontiguousarray(moved.reshape(lead, -1)))
        return np.moveaxis(res.reshape((res.shape[0],) + moved.shape[1:]), 0, axis)

    # -- public API ----------------------------------------------------------

    def forward(self, xi) -> np.ndarray:
        """``A xi``: length ``M`` (or ``M x M``) to length ``N`` (or ``N x N``)."""
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.M,) * self.dim:
            raise ValueError(f"expected input of shape {(self.M,) * self.dim}, got {xi.shape}")
        if self.dim == 1:
            return self._forward_cols(xi[:, None])[:, 0]
        tmp = self._apply_axis(xi, 0, self._forward_cols)
        return self._apply_axis(tmp, 1, self._forward_cols)

    def adjoint(self, alpha) -> np.ndarray:
        """``A^T alpha``: length ``N`` (or ``N x N``) to length ``M`` (or ``M x M``)."""
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (self.N,) * self.dim:
            raise ValueError(f"expected input of shape {(self.N,) * self.dim}, got {alpha.shape}")
        if self.dim == 1:
            return self._adjoint_cols(alpha[:, None])[:, 0]
        tmp = self._apply_axis(alpha, 0, self._adjoint_cols)
        return self._apply_axis(tmp, 1, self._adjoint_cols)

    def matmat_1d(self, X) -> np.ndarray:
        """1D forward applied to every column of an ``M x k`` array."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] != self.M:
            raise ValueError(f"expected shape ({self.M}, k)")
        return self._forward_cols(X)

    def rmatmat_1d(self, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2 or Y.shape[0] != self.N:
            raise ValueError(f"expected shape ({self.N}, k)")
        return self._adjoint_cols(Y)

    def to_dense(self) -> np.ndarray:
        """The 1D matrix, column by column (small sizes only)."""
        return self._forward_cols(np.eye(self.M))

    def aslinearoperator(self) -> LinearOperator:
        """A scipy ``LinearOperator`` on flattened (row-major) arrays."""
        inshape, outshape = (self.M,) * self.dim, (self.N,) * self.dim
        return LinearOperator(
            self.shape,
            matvec=lambda v: self.forward(np.reshape(v, inshape)).ravel(),
            rmatvec=lambda v: self.adjoint(np.reshape(v, outshape)).ravel(),
            dtype=float,
        )

    def taller(self, q: int) -> "FastOp":
        """Same basis and level with more Walsh rows (``N = 2**(j+q)``)."""
        return FastOp(self.spec, self.j, q, None if q > self.kernels.q else self.kernels, self.dim)

    def __repr__(self) -> str:
        return f"FastOp({self.spec}, j={self.j}, q={self.q}, dim={self.dim})"


# ---------------------------------------------------------------------------
# subsampling and wavelet-basis compositions


class SamplingMask:
    """Sorted set of flat sample indices (row-major for 2D)."""

    def __init__(self, indices, size: int):
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        if idx.size != np.asarray(indices).size:
            raise ValueError("mask indices must be unique")
        if idx.size and (idx[0] < 0 or idx[-1] >= size):
            raise ValueError(f"mask indices must lie in 0..{size - 1}")
        self.indices = idx
        self.size = size

    def __len__(self) -> int:
        return int(self.indices.size)

    @classmethod
    def full(cls, size: int) -> "SamplingMask":
        return cls(np.arange(size), size)

    def restrict(self, v) -> np.ndarray:
        return np.asarray(v).ravel()[self.indices]

    def scatter(self, y) -> np.ndarray:
        out = np.zeros(self.size)
        out[self.indices] = y
        return out


class CSOperator:
    """``P_Omega A`` or ``P_Omega A W^{-1}`` on flattened coefficient vectors."""

    def __init__(self, op: FastOp, mask: SamplingMask, use_idwt: bool = True):
        if mask.size != op.shape[0]:
            raise ValueError(f"mask is for {mask.size} samples, operator has {op.shape[0]}")
        self.op, self.mask, self.use_idwt = op, mask, use_idwt
        self.shape = (len(mask), op.shape[1])
        self._coef_shape = (op.M,) * op.dim

    def _synthesis(self, z):
        z = z.reshape(self._coef_shape)
        if not self.use_idwt:
            return z
        for ax in range(self.op.dim):
            z = _dwt.idwt(self.op.spec, z, axis=ax)
        return z

    def _analysis(self, x):
        if self.use_idwt:
            for ax in range(self.op.dim):
                x = _dwt.dwt(self.op.spec, x, axis=ax)
        return x.ravel()

    def forward(self, z) -> np.ndarray:
        return self.mask.restrict(self.op.forward(self._synthesis(np.asarray(z, dtype=float))))

    def adjoint(self, y) -> np.ndarray:
        full = self.mask.scatter(np.asarray(y, dtype=float)).reshape((self.op.N,) * self.op.dim)
        return self._analysis(self.op.adjoint(full))

    def aslinearoperator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.forward, rmatvec=self.adjoint, dtype=float)


def compose_cs(op: FastOp, mask: SamplingMask, use_idwt: bool = True) -> CSOperator:
    """Subsampled operator for compressive sensing, optionally in the wavelet basis."""
    return CSOperator(op, mask, use_idwt)


class _HaarFull:
    def __init__(self, j: int):
        self.j, self.M = j, 1 << j
        self.spec = WaveletSpec("db", 1, "periodic")

    def forward(self, z):
        x = _dwt.idwt(self.spec, np.asarray(z, dtype=float))
        return dyadic.fwht_sequency(x) / np.sqrt(self.M)

    def adjoint(self, y):
        x = dyadic.fwht_sequency(np.asarray(y, dtype=float)) / np.sqrt(self.M)
        return _dwt.dwt(self.spec, x)

    def to_dense(self):
        return np.column_stack([self.forward(e) for e in np.eye(self.M)])


def haar_fullrank(j: int) -> _HaarFull:
    """Walsh samples of a Haar wavelet expansion with ``N = M``: ``H W^{-1}``, orthogonal."""
    if j < 0:
        raise ValueError("j must be >= 0")
    return _HaarFull(j)


def pad_to_power_of_two(x, axis: int = 0) -> np.ndarray:
    """Zero-pad ``x`` along ``axis`` to the next power-of-two length."""
    x = np.asarray(x)
    n = x.shape[axis]
    target = 1 << max(0, (n - 1).bit_length())
    if target == n:
        return x.copy()
    widths = [(0, 0)] * x.ndim
    widths[axis] = (0, target - n)
    return np.pad(x, widths)
