"""Wall time of one forward application as N doubles.

An O(N log N) method should roughly double its time per doubling of N.
The dense product would quadruple (and stops fitting in memory early).
On small shared machines single ratios jump where the working set leaves a
cache level; compare with a bare transform of the same length.
"""
import time

import numpy as np

from fastcob.fastop import FastOp
from fastcob.wavelets.spec import WaveletSpec

spec = WaveletSpec.parse("db4")
rng = np.random.default_rng(0)
prev = None
for r in range(12, 21):
    op = FastOp(spec, r - 1, 1)
    x = rng.standard_normal(op.M)
    op.forward(x)  # warm up
    times = []
    for _ in range(5):
        t0 = time.perf_counter()
        op.forward(x)
        times.append(time.perf_counter() - t0)
    best = min(times)
    ratio = "" if prev is None else f"  x{best / prev:.2f}"
    print(f"N = 2^{r:<2d}  {best * 1e3:8.2f} ms{ratio}")
    prev = best
