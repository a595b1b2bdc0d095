"""Acceptance criteria, one test each, with a PASS/FAIL line printed per criterion.

Reference numbers marked "published" are copied from the published table and
figure captions; everything else is computed here from independent oracles.
"""
import time

import numpy as np
import pytest

from fastcob import figures, oracle
from fastcob import reconstruct as rc
from fastcob.dyadic import DyadicRational, dyadic_xor, fwht_sequency, walsh_eval
from fastcob.fastop import FastOp
from fastcob.kernels import cache_path, get_kernels
from fastcob.testfunctions import FUNCTIONS_1D, FUNCTIONS_2D
from fastcob.wavelets.spec import WaveletSpec

# published subspace-angle table: VMP boundaries, 1D at j = 7, q = 1..4
TABLE1_1D = {
    "db2": (1.200, 1.050, 1.014, 1.004),
    "db3": (2.610, 1.135, 1.028, 1.006),
    "db4": (1.251, 1.068, 1.023, 1.007),
    "db5": (1.392, 1.109, 1.025, 1.011),
    "db6": (6.499, 1.137, 1.033, 1.016),
    "sym2": (1.200, 1.050, 1.014, 1.004),
    "sym3": (2.610, 1.135, 1.028, 1.006),
    "sym4": (1.188, 1.037, 1.008, 1.003),
    "sym5": (1.179, 1.042, 1.013, 1.005),
    "sym6": (1.300, 1.059, 1.015, 1.005),
}
TABLE1_2D = {
    "db2": (1.439, 1.102, 1.028, 1.008),
    "db3": (6.814, 1.289, 1.057, 1.013),
    "db4": (1.565, 1.141, 1.047, 1.013),
    "db5": (1.937, 1.230, 1.050, 1.022),
    "db6": (42.233, 1.292, 1.068, 1.032),
    "sym2": (1.439, 1.102, 1.028, 1.008),
    "sym3": (6.814, 1.289, 1.057, 1.013),
    "sym4": (1.412, 1.075, 1.016, 1.006),
    "sym5": (1.389, 1.085, 1.026, 1.009),
    "sym6": (1.690, 1.121, 1.029, 1.009),
}
# published relative errors for the 2D smoothness experiment
FIG6 = {"tw": 0.0950, "db2": 0.0518, "db4": 0.0290, "db6": 0.0215}

GRID_WAVELETS = ["db2", "db3", "db4", "db5", "db6", "sym2", "sym3", "sym4", "sym5", "sym6"]


def report(capsys, number, title, ok, detail=""):
    with capsys.disabled():
        print(f"\nCRITERION {number} ({title}): {'PASS' if ok else 'FAIL'}{' - ' + detail if detail else ''}")


@pytest.fixture(scope="module")
def table1_values():
    t = time.perf_counter()
    res = oracle.table1(GRID_WAVELETS, (1, 2, 3, 4), j=7, boundary="vmp")
    return res, time.perf_counter() - t


def test_criterion_1_table1(capsys, table1_values):
    res, elapsed = table1_values
    bad = []
    for name, ref in TABLE1_1D.items():
        for q, (got, want) in enumerate(zip(res[name], ref), start=1):
            tol = 0.05 if want > 2 else 0.01
            if abs(got - want) > tol:
                bad.append(f"{name} q={q}: {got:.3f} vs {want:.3f}")
    ok = not bad and elapsed < 60
    report(capsys, 1, "Table 1, 1D", ok,
           f"{40 - len(bad)}/40 cells within tolerance, {elapsed:.1f} s" + ("; off: " + "; ".join(bad) if bad else ""))
    assert elapsed < 60
    assert not bad, "; ".join(bad)


def test_criterion_2_tensor_2d(capsys, table1_values):
    res, _ = table1_values
    bad = []
    for name, ref in TABLE1_2D.items():
        for q, (mu, want) in enumerate(zip(res[name], ref), start=1):
            tol = 0.5 if want > 40 else 0.02
            if abs(mu * mu - want) > tol:
                bad.append(f"{name} q={q}: {mu * mu:.3f} vs {want:.3f}")
    # the identity itself: the 2D operator's smallest singular value is the square of the 1D one
    spec = WaveletSpec.parse("db4")
    G = FastOp(spec, 4, 1).to_dense()
    op2 = FastOp(spec, 4, 1, dim=2)
    D2 = np.column_stack([op2.forward(e.reshape(16, 16)).ravel() for e in np.eye(256)])
    mu1, mu2 = oracle.subspace_angle(G).mu, oracle.subspace_angle(D2).mu
    tensor_ok = abs(mu2 - mu1**2) < 1e-9 * mu2
    ok = not bad and tensor_ok
    report(capsys, 2, "Table 1, 2D panel", ok,
           f"tensor identity {'holds' if tensor_ok else 'broken'}; {40 - len(bad)}/40 cells within tolerance"
           + ("; off: " + "; ".join(bad) if bad else ""))
    assert tensor_ok
    assert not bad, "; ".join(bad)


def test_criterion_3_fig6(capsys):
    t = time.perf_counter()
    f = FUNCTIONS_2D["smooth2d"]
    j, q = 4, 1
    y = rc.acquire_samples(f, j, q, Rs=12, dim=2)
    G = 512
    errs = {"tw": rc.relative_error(f, rc.walsh_series(y, G), 2)}
    for nu in (2, 4, 6):
        spec = WaveletSpec("db", nu, "vmp")
        x = rc.gs_solve(FastOp(spec, j, q, dim=2), y)
        errs[f"db{nu}"] = rc.relative_error(f, rc.synthesize(spec, j, x, R=G.bit_length() - 1 - j), 2)
    elapsed = time.perf_counter() - t
    bad = [k for k in FIG6 if abs(errs[k] - FIG6[k]) > 0.1 * FIG6[k]]
    detail = ", ".join(f"{k} {errs[k]:.4f} (published {FIG6[k]:.4f})" for k in FIG6) + f"; {elapsed:.1f} s"
    report(capsys, 3, "2D smoothness experiment errors", not bad and elapsed < 30, detail)
    assert elapsed < 30
    assert not bad, detail


def _grid():
    for name in GRID_WAVELETS:
        for boundary in ("periodic", "vmp"):
            spec = WaveletSpec.parse(name, boundary)
            for j in (spec.j0, spec.j0 + 1):
                for q in (1, 2):
                    yield spec, j, q


def test_criterion_4_oracle_equivalence(capsys):
    rng = np.random.default_rng(4)
    worst, count = 0.0, 0
    for spec, j, q in _grid():
        D = oracle.build_dense(spec, j, q, "quadrature").matrix
        for dim in (1, 2):
            op = FastOp(spec, j, q, dim=dim)
            for _ in range(20):
                xi = rng.standard_normal((op.M,) * dim)
                alpha = rng.standard_normal((op.N,) * dim)
                if dim == 1:
                    fwd, adj = D @ xi, D.T @ alpha
                else:
                    fwd, adj = D @ xi @ D.T, D.T @ alpha @ D
                worst = max(worst, np.abs(op.forward(xi) - fwd).max(), np.abs(op.adjoint(alpha) - adj).max())
            count += 1
    ok = worst <= 1e-7
    report(capsys, 4, "fast operator vs quadrature oracle", ok, f"{count} configurations, max deviation {worst:.2e}")
    assert ok


def test_criterion_5_adjoint(capsys):
    rng = np.random.default_rng(5)
    worst, count = 0.0, 0
    for spec, j, q in _grid():
        for dim in (1, 2):
            op = FastOp(spec, j, q, dim=dim)
            for _ in range(100):
                xi = rng.standard_normal((op.M,) * dim)
                a = rng.standard_normal((op.N,) * dim)
                Ax = op.forward(xi)
                d = abs(np.vdot(Ax, a) - np.vdot(xi, op.adjoint(a))) / (np.linalg.norm(Ax) * np.linalg.norm(a))
                worst = max(worst, d)
            count += 1
    ok = worst <= 1e-12
    report(capsys, 5, "adjoint identity", ok, f"{count} configurations x 100 pairs, worst defect {worst:.2e}")
    assert ok


def test_criterion_6_walsh_identities(capsys):
    failures = 0
    for j in range(0, 7):
        L = 1 << j
        pts = [DyadicRational(p, j) for p in range(L)]
        W = np.array([[walsh_eval(n, x) for x in pts] for n in range(L)])
        for n in range(L):
            for a in range(L):
                for b in range(L):
                    failures += W[n, a] * W[n, b] != walsh_eval(n, dyadic_xor(pts[a], pts[b]))
        failures += int(not np.array_equal(W, W.T))
        for n in range(4 * L):
            for S in range(0, 3):
                for p in range(1 << S):
                    failures += walsh_eval(n, DyadicRational(p, S + j)) != walsh_eval(n >> j, DyadicRational(p, S))
    rng = np.random.default_rng(6)
    for r in range(0, 7):
        L = 1 << r
        H = np.array([[walsh_eval(n, DyadicRational(k, r)) for k in range(L)] for n in range(L)], float)
        v = rng.standard_normal(L)
        failures += int(not np.allclose(fwht_sequency(v), H @ v, atol=1e-12))
    report(capsys, 6, "Walsh identities and FWHT", failures == 0, f"{failures} failures for j <= 6, lengths <= 64")
    assert failures == 0


def test_criterion_7_gs_quasi_optimality(capsys):
    names = ["hat", "cosine_ramp", "piecewise", "bump", "haar_box"]
    rows, ok = [], True
    for wname, j in (("db2", 5), ("db4", 5)):
        spec = WaveletSpec.parse(wname)
        q, R = 1, 8
        op = FastOp(spec, j, q)
        mu = oracle.subspace_angle(op.to_dense()).mu
        t = rc.midpoints(j + R)
        for name in names:
            f = FUNCTIONS_1D[name]
            x = rc.gs_solve(op, rc.acquire_samples(f, j, q, Rs=j + q + 12))
            err = np.linalg.norm(f(t) - rc.synthesize(spec, j, x, R))
            best = np.linalg.norm(f(t) - rc.synthesize(spec, j, rc.project(spec, j, f, R=R), R))
            ratio = err / (mu * best)
            ok &= ratio <= 1.05
            rows.append(f"{wname}/{name} {ratio:.3f}")
    report(capsys, 7, "GS quasi-optimality", ok, "err / (mu * best): " + ", ".join(rows))
    assert ok


def test_criterion_8_scaling(capsys, kernel_cache):
    spec = WaveletSpec.parse("db4")
    q = 1
    rng = np.random.default_rng(8)
    times = []
    for r in range(14, 23):
        op = FastOp(spec, r - q, q)
        xi = rng.standard_normal(op.M)
        op.forward(xi)
        reps = 7 if r < 20 else 3
        samples = []
        for _ in range(reps):
            t = time.perf_counter()
            op.forward(xi)
            samples.append(time.perf_counter() - t)
        times.append(min(samples))  # best of k: least sensitive to background load
    ratios = [b / a for a, b in zip(times, times[1:])]
    sizes = []
    for name in GRID_WAVELETS:
        for boundary in ("periodic", "vmp"):
            s = WaveletSpec.parse(name, boundary)
            get_kernels(s, 4, kernel_cache)
            sizes.append(cache_path(kernel_cache, s, 4).stat().st_size)
    ok = max(ratios) <= 2.5 and max(sizes) <= 64 * 1024
    report(capsys, 8, "scaling and storage", ok,
           "doubling ratios " + ", ".join(f"{x:.2f}" for x in ratios) + f"; largest q=4 kernel file {max(sizes)} bytes")
    assert max(ratios) <= 2.5
    assert max(sizes) <= 64 * 1024


def test_criterion_9_pinned_figures(capsys):
    same = {}
    for name in ("fig3", "fig4", "fig5", "fig7"):
        a = figures.FIGURES[name]()
        b = figures.FIGURES[name]()
        same[name] = a.keys() == b.keys() and all(a[k].encode() == b[k].encode() for k in a)
    ok = all(same.values())
    report(capsys, 9, "figure data byte-identical run to run", ok, ", ".join(f"{k} {'same' if v else 'DIFFERS'}" for k, v in same.items()))
    assert ok
