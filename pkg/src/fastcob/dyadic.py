"""Dyadic arithmetic, sequency-ordered Walsh functions and the fast Walsh-Hadamard transform.

Walsh functions are only ever evaluated at exact dyadic points ``p / 2**j``;
there is no floating point argument path.  The transform is unnormalised:
``fwht_sequency(v)[n] = sum_k w_n(k / len(v)) v[k]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import hadamard

__all__ = [
    "DyadicRational",
    "walsh_eval",
    "walsh_row",
    "dyadic_xor",
    "bit_reverse",
    "sequency_permutation",
    "fwht_natural",
    "fwht_natural_inplace",
    "fwht_sequency",
    "fwht_sequency_inplace",
    "ordering_convert",
    "is_power_of_two",
    "ilog2",
]


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def ilog2(n: int) -> int:
    """Exact base-2 logarithm of a power of two."""
    if not is_power_of_two(n):
        raise ValueError(f"{n} is not a power of two")
    return n.bit_length() - 1


@dataclass(frozen=True)
class DyadicRational:
    """The point ``numerator / 2**scale`` in [0, 1)."""

    numerator: int
    scale: int

    def __post_init__(self):
        if self.scale < 0 or not 0 <= self.numerator < (1 << self.scale):
            raise ValueError(f"need 0 <= p < 2**j, got p={self.numerator}, j={self.scale}")

    def rescale(self, scale: int) -> "DyadicRational":
        if scale < self.scale:
            raise ValueError("can only refine a dyadic rational")
        return DyadicRational(self.numerator << (scale - self.scale), scale)

    def bits(self) -> list[int]:
        """Binary digits x^(1), x^(2), ..., x^(j) after the binary point."""
        return [(self.numerator >> (self.scale - i)) & 1 for i in range(1, self.scale + 1)]

    def __float__(self) -> float:
        return self.numerator / (1 << self.scale)


def bit_reverse(p, nbits: int):
    """Reverse the lowest ``nbits`` bits of ``p`` (int or integer array)."""
    if isinstance(p, (int, np.integer)):
        out = 0
        p = int(p)
        for _ in range(nbits):
            out = (out << 1) | (p & 1)
            p >>= 1
        return out
    p = np.asarray(p, dtype=np.int64)
    out = np.zeros_like(p)
    for _ in range(nbits):
        out = (out << 1) | (p & 1)
        p = p >> 1
    return out


def _gray(n):
    return n ^ (n >> 1)


def walsh_eval(n: int, x: DyadicRational) -> int:
    """Sequency-ordered Walsh function ``w_n(x)`` at a dyadic point, as +1 or -1.

    Uses the exponent ``sum_i (n^(i) + n^(i+1)) x^(i)``: the i-th Gray-code bit of
    ``n`` pairs with the i-th binary digit of ``x``.
    """
    if n < 0:
        raise ValueError("Walsh index must be non-negative")
    g = _gray(int(n))
    rx = bit_reverse(x.numerator, x.scale)
    return -1 if bin(g & rx).count("1") & 1 else 1


def walsh_row(n, p: int, scale: int) -> np.ndarray:
    """Vectorised ``w_n(p / 2**scale)`` over an integer array ``n``; returns float +-1."""
    n = np.asarray(n, dtype=np.int64)
    if not 0 <= p < (1 << scale):
        raise ValueError("dyadic point outside [0, 1)")
    rx = np.int64(bit_reverse(int(p), scale))
    parity = np.bitwise_count(_gray(n) & rx) & 1
    return 1.0 - 2.0 * parity


def dyadic_xor(x: DyadicRational, y: DyadicRational) -> DyadicRational:
    """Digit-wise XOR of two dyadic expansions, at the finer of the two scales."""
    j = max(x.scale, y.scale)
    a, b = x.rescale(j), y.rescale(j)
    return DyadicRational(a.numerator ^ b.numerator, j)


@lru_cache(maxsize=64)
def sequency_permutation(length: int) -> np.ndarray:
    """Index map ``perm`` with ``seq[n] = nat[perm[n]]`` (bit reversal of the Gray code)."""
    r = ilog2(length)
    n = np.arange(length, dtype=np.int64)
    perm = bit_reverse(_gray(n), r)
    perm.setflags(write=False)
    return perm


def _check_length(v: np.ndarray, axis: int = 0) -> int:
    length = v.shape[axis]
    if not is_power_of_two(length):
        raise ValueError(f"FWHT length must be a power of two, got {length}")
    return length


_RADIX_BITS = 4


@lru_cache(maxsize=None)
def _hadamard_block(bits: int) -> np.ndarray:
    return hadamard(1 << bits).astype(float)


def _butterflies(v: np.ndarray) -> None:
    # natural (Hadamard) order, in place, along axis 0.
    # H_L is a Kronecker product of H_2 factors; applying them four at a time as
    # one 16 x 16 product cuts the number of passes over memory by four.
    length = v.shape[0]
    width = v.size // length if length else 0
    r = length.bit_length() - 1
    x = np.ascontiguousarray(v.reshape(length, width))  # a copy unless v is C-contiguous
    src, dst = x, np.empty_like(x)
    done, inner = 0, width
    while done < r:
        k = min(_RADIX_BITS, r - done)
        shape = (length >> (done + k), 1 << k, inner)
        if inner == 1:
            # one GEMM instead of a batch of 16 x 1 products (H is symmetric)
            np.matmul(src.reshape(shape[:2]), _hadamard_block(k), out=dst.reshape(shape[:2]))
        else:
            np.matmul(_hadamard_block(k), src.reshape(shape), out=dst.reshape(shape))
        src, dst = dst, src
        done += k
        inner <<= k
    if not np.shares_memory(src, v):
        v[...] = src.reshape(v.shape)


def fwht_natural_inplace(v: np.ndarray) -> np.ndarray:
    """Natural-order FWHT along axis 0, overwriting the float array ``v``; returns ``v``."""
    if v.dtype != np.float64:
        raise TypeError("in-place transform needs a float64 buffer")
    _check_length(v, 0)
    _butterflies(v)
    return v


def fwht_natural(v, axis: int = 0) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform in natural (Hadamard) order."""
    out = np.array(v, dtype=float, copy=True)
    _check_length(out, axis)
    work = np.moveaxis(out, axis, 0)
    _butterflies(work)
    return out


def fwht_sequency_inplace(v: np.ndarray, axis: int = 0) -> np.ndarray:
    """Sequency-ordered FWHT, overwriting the float array ``v``; returns ``v``."""
    if v.dtype != np.float64:
        raise TypeError("in-place transform needs a float64 buffer")
    length = _check_length(v, axis)
    work = np.moveaxis(v, axis, 0)
    _butterflies(work)
    work[...] = work[sequency_permutation(length)]
    return v


def fwht_sequency(v, axis: int = 0) -> np.ndarray:
    """``[sum_k w_n(k/L) v_k]_{n<L}`` for ``L = len(v)``, a power of two.

    Accepts stacked input; the transform runs along ``axis``.
    """
    out = np.array(v, dtype=float, copy=True)
    return fwht_sequency_inplace(out, axis)


_ORDERINGS = ("natural", "sequency")


def ordering_convert(v, src: str, dst: str, axis: int = 0) -> np.ndarray:
    """Permute transform coefficients between natural and sequency order."""
    for tag in (src, dst):
        if tag not in _ORDERINGS:
            raise ValueError(f"unknown ordering {tag!r}; expected one of {_ORDERINGS}")
    v = np.asarray(v)
    length = _check_length(v, axis)
    if src == dst:
        return v.copy()
    perm = sequency_permutation(length)
    if src == "natural":
        return np.take(v, perm, axis=axis)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(length)
    return np.take(v, inv, axis=axis)
