"""Four reconstructions of a piecewise function from Walsh samples.

f = cos(2 pi t) on [0, 1/2] and (t/2) sin(6 pi t) on (1/2, 1].

* truncated Walsh series from the first 32 samples
* GS with 16 DB4 functions from the same 32 samples
* PBDW: the samples plus the GS estimate beyond them (K = 128)
* CS: 32 samples drawn from the first 256 by variable density, 128 DB4 functions
"""
from fastcob import reconstruct as rc
from fastcob.fastop import FastOp, compose_cs
from fastcob.testfunctions import piecewise as f
from fastcob.wavelets.dwt import idwt
from fastcob.wavelets.spec import WaveletSpec

spec = WaveletSpec.parse("db4")
G = 1024

j, q = 4, 1
y = rc.acquire_samples(f, j, q, Rs=14)
op = FastOp(spec, j, q)
x = rc.gs_solve(op, y)
results = {
    "truncated Walsh": rc.walsh_series(y, G),
    "GS": rc.synthesize(spec, j, x, R=10 - j),
    "PBDW": rc.walsh_series(rc.pbdw_solve(op, y), G),
}

# compressive sensing works in the wavelet basis, where f is nearly sparse
jc, qc = 7, 1
yc = rc.acquire_samples(f, jc, qc, Rs=14)
mask = rc.variable_density_mask(256, 32, seed=0)
z = rc.cs_solve(compose_cs(FastOp(spec, jc, qc), mask), mask.restrict(yc))
results["CS"] = rc.synthesize(spec, jc, idwt(spec, z), R=10 - jc)

for name, values in results.items():
    print(f"{name:16s} relative error {rc.relative_error(f, values):.4f}")
print("CS sample indices:", mask.indices.tolist())
