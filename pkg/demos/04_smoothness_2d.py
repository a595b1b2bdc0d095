"""Smoother wavelets give smaller errors on a smooth image.

f(t1, t2) = cos(3 pi t1 / 2) sin(3 pi t2), sampled by its first 32 x 32 Walsh
coefficients.  GS uses 16 x 16 tensor-product functions per wavelet.
"""
from fastcob import reconstruct as rc
from fastcob.fastop import FastOp
from fastcob.testfunctions import smooth2d as f
from fastcob.wavelets.spec import WaveletSpec

j, q = 4, 1
y = rc.acquire_samples(f, j, q, Rs=12, dim=2)
print(f"truncated Walsh  {rc.relative_error(f, rc.walsh_series(y, 512), 2):.4f}")
for nu in (2, 4, 6):
    spec = WaveletSpec("db", nu, "vmp")
    x = rc.gs_solve(FastOp(spec, j, q, dim=2), y)
    print(f"GS with db{nu}      {rc.relative_error(f, rc.synthesize(spec, j, x, R=5), 2):.4f}")
