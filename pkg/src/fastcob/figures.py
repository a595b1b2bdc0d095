"""Plot-ready data for the reference experiments, as deterministic CSV text.

Each ``figN()`` returns ``{file name: CSV text}``.  Values are written with
``repr`` so two runs on the same machine give identical bytes.
"""
from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from . import reconstruct as rc
from .fastop import FastOp, compose_cs
from .oracle import walsh_matrix
from .testfunctions import FUNCTIONS_1D, FUNCTIONS_2D
from .wavelets.dwt import idwt
from .wavelets.spec import WaveletSpec


def _table(header, columns) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row) + "\n")
    return buf.getvalue()


def _grid_csv(values) -> str:
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in np.asarray(values))


def _errors(pairs) -> str:
    return _table(["method", "relative_error"], [[p[0] for p in pairs], [float(p[1]) for p in pairs]])


def fig2(G: int = 1024) -> dict:
    """GS with DB2, M = 32, from N = 64 Walsh samples of a hat, next to the truncated series."""
    spec, j, q = WaveletSpec.parse("db2"), 5, 1
    f = FUNCTIONS_1D["hat"]
    y = rc.acquire_samples(f, j, q, Rs=j + q + 8)
    t = rc.midpoints(G.bit_length() - 1)
    tw = rc.walsh_series(y, G)
    gs = rc.synthesize(spec, j, rc.gs_solve(FastOp(spec, j, q), y), R=G.bit_length() - 1 - j)
    return {
        "fig2_hat_gs.csv": _table(["t", "f", "tw", "gs_db2"], [t, f(t), tw, gs]),
        "fig2_errors.csv": _errors([("tw", rc.relative_error(f, tw)), ("gs_db2", rc.relative_error(f, gs))]),
    }


def fig3(N: int = 8) -> dict:
    """The first ``N`` sequency-ordered Walsh functions (equivalently the Hadamard matrix rows)."""
    H = walsh_matrix(N).astype(int)
    rows = "".join(f"{n}," + ",".join(str(v) for v in H[n]) + "\n" for n in range(N))
    return {"fig3_walsh_hadamard.csv": "n," + ",".join(f"k{k}" for k in range(N)) + "\n" + rows}


def fig4(G: int = 512) -> dict:
    """GS with DB4, M = 16, N = 32: periodic and boundary-corrected bases on cos and cos + ramp."""
    j, q = 4, 1
    R = G.bit_length() - 1 - j
    t = rc.midpoints(G.bit_length() - 1)
    cols, names, errs = [t], ["t"], []
    for fname in ("cosine", "cosine_ramp"):
        f = FUNCTIONS_1D[fname]
        y = rc.acquire_samples(f, j, q, Rs=j + q + 8)
        cols.append(f(t))
        names.append(fname)
        for boundary in ("periodic", "vmp"):
            spec = WaveletSpec("db", 4, boundary)
            v = rc.synthesize(spec, j, rc.gs_solve(FastOp(spec, j, q), y), R=R)
            cols.append(v)
            names.append(f"{fname}_{boundary}")
            errs.append((f"{fname}_{boundary}", rc.relative_error(f, v)))
    return {"fig4_boundaries.csv": _table(names, cols), "fig4_errors.csv": _errors(errs)}


def fig5(G: int = 1024, seed: int = 0) -> dict:
    """The piecewise function by TW, GS, PBDW (N = 32, M = 16, DB4) and CS (32 of 256 samples, M = 128)."""
    spec = WaveletSpec.parse("db4")
    f = FUNCTIONS_1D["piecewise"]
    r = G.bit_length() - 1
    t = rc.midpoints(r)
    j, q = 4, 1
    y = rc.acquire_samples(f, j, q, Rs=r + 4)
    op = FastOp(spec, j, q)
    tw = rc.walsh_series(y, G)
    x = rc.gs_solve(op, y)
    gs = rc.synthesize(spec, j, x, R=r - j)
    pbdw = rc.walsh_series(rc.pbdw_solve(op, y), G)
    jc, qc = 7, 1
    yc = rc.acquire_samples(f, jc, qc, Rs=r + 4)
    mask = rc.variable_density_mask(1 << (jc + qc), 32, seed=seed)
    z = rc.cs_solve(compose_cs(FastOp(spec, jc, qc), mask), mask.restrict(yc))
    cs = rc.synthesize(spec, jc, idwt(spec, z), R=r - jc)
    curves = {"tw": tw, "gs": gs, "pbdw": pbdw, "cs": cs}
    return {
        "fig5_methods.csv": _table(["t", "f"] + list(curves), [t, f(t)] + list(curves.values())),
        "fig5_cs_mask.csv": "".join(f"{i}\n" for i in mask.indices),
        "fig5_errors.csv": _errors([(k, rc.relative_error(f, v)) for k, v in curves.items()]),
    }


def fig6(R: int = 2, R_err: int = 4) -> dict:
    """2D GS from 32 x 32 samples with DB2, DB4, DB6 (M = 16 per axis) and the truncated series.

    Grids are written with ``2**R`` points per Walsh cell; errors use ``2**R_err``.
    """
    f = FUNCTIONS_2D["smooth2d"]
    j, q = 4, 1
    N = 1 << (j + q)
    y = rc.acquire_samples(f, j, q, Rs=12, dim=2)
    out = {"fig6_tw.csv": _grid_csv(rc.walsh_series(y, N << R))}
    errs = [("tw", rc.relative_error(f, rc.walsh_series(y, N << R_err), 2))]
    for nu in (2, 4, 6):
        spec = WaveletSpec("db", nu, "vmp")
        x = rc.gs_solve(FastOp(spec, j, q, dim=2), y)
        out[f"fig6_db{nu}.csv"] = _grid_csv(rc.synthesize(spec, j, x, R=R + q))
        errs.append((f"db{nu}", rc.relative_error(f, rc.synthesize(spec, j, x, R=R_err + q), 2)))
    out["fig6_errors.csv"] = _errors(errs)
    return out


def fig7(j: int = 6, q: int = 1, R: int = 1, seed: int = 0) -> dict:
    """CS on the smooth-plus-boxes image against a truncated series with the same sample budget.

    CS (DB4, eta = 1e-3) draws ``(N/2)**2`` samples from the first ``N x N``
    with ``N = 2**(j+q)``; the truncated series uses the first ``N/2 x N/2``.
    """
    spec = WaveletSpec.parse("db4")
    f = FUNCTIONS_2D["smooth_boxes2d"]
    N = 1 << (j + q)
    y = rc.acquire_samples(f, j, q, dim=2)
    mask = rc.variable_density_mask(N, (N // 2) ** 2, seed=seed, dim=2)
    z = rc.cs_solve(compose_cs(FastOp(spec, j, q, dim=2), mask), mask.restrict(y))
    c = idwt(spec, idwt(spec, z.reshape(1 << j, 1 << j), axis=0), axis=1)
    cs = rc.synthesize(spec, j, c, R=R + q)
    tw = rc.walsh_series(y[: N // 2, : N // 2], cs.shape[0])
    return {
        "fig7_cs.csv": _grid_csv(cs),
        "fig7_tw.csv": _grid_csv(tw),
        "fig7_cs_mask.csv": "".join(f"{i}\n" for i in mask.indices),
        "fig7_errors.csv": _errors([("cs", rc.relative_error(f, cs, 2)), ("tw", rc.relative_error(f, tw, 2))]),
    }


FIGURES = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6, "fig7": fig7}


def write_figure(name: str, outdir) -> list:
    """Write one figure's CSV files into ``outdir``; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fname, text in FIGURES[name]().items():
        p = outdir / fname
        p.write_text(text)
        paths.append(p)
    return paths
