"""Generalised sampling of a hat function from Walsh samples.

A truncated Walsh series of a continuous function is blocky: every partial
sum is piecewise constant.  Reconstructing in a smooth wavelet basis from the
same samples removes the blocks.  Here N = 64 Walsh samples feed a DB2 basis
with M = 32 functions.
"""
import numpy as np

from fastcob import reconstruct as rc
from fastcob.fastop import FastOp
from fastcob.oracle import subspace_angle
from fastcob.testfunctions import hat
from fastcob.wavelets.spec import WaveletSpec

spec = WaveletSpec.parse("db2")  # boundary-corrected by default
j, q = 5, 1                       # M = 32, N = 64
op = FastOp(spec, j, q)

y = rc.acquire_samples(hat, j, q, Rs=16)
x = rc.gs_solve(op, y)

G = 1024
t = rc.midpoints(10)
tw = rc.walsh_series(y, G)
gs = rc.synthesize(spec, j, x, R=10 - j)

# the quasi-optimality constant of this sampling/reconstruction pair
mu = subspace_angle(op.to_dense()).mu
print(f"mu = {mu:.3f}")
print(f"truncated Walsh error   {rc.relative_error(hat, tw):.4f}")
print(f"GS (DB2) error          {rc.relative_error(hat, gs):.4f}")

# the largest jump of each reconstruction shows the blockiness directly
print(f"largest step, Walsh: {np.abs(np.diff(tw)).max():.3f}   GS: {np.abs(np.diff(gs)).max():.3f}")
