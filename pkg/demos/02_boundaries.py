"""Periodic versus boundary-corrected wavelets.

A periodic basis treats [0, 1] as a circle, so a function with f(0) != f(1)
looks discontinuous to it.  The boundary-corrected (VMP) basis keeps the
vanishing moments at the edges.  Both reconstruct from N = 32 Walsh samples
with M = 16 DB4 functions.
"""
from fastcob import reconstruct as rc
from fastcob.fastop import FastOp
from fastcob.testfunctions import cosine, cosine_ramp
from fastcob.wavelets.spec import WaveletSpec

j, q = 4, 1
for f in (cosine, cosine_ramp):
    y = rc.acquire_samples(f, j, q, Rs=14)
    for boundary in ("periodic", "vmp"):
        spec = WaveletSpec("db", 4, boundary)
        x = rc.gs_solve(FastOp(spec, j, q), y)
        err = rc.relative_error(f, rc.synthesize(spec, j, x, R=5))
        print(f"{f.__name__:12s} {boundary:9s} relative error {err:.4f}")

# Expect: both bases do well on cos(2 pi t); only VMP does well once the ramp is added.
