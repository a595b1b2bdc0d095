"""Command-line interface: ``fastcob {precompute,apply,table1,reconstruct,bench,figures}``.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O failure.
Every command is deterministic given its flags; CSV outputs start with one
``#`` provenance line carrying a timestamp unless ``--no-header`` is given.
"""
from __future__ import annotations

import argparse
import contextlib
import datetime
import io
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import kernels as _kernels
from . import oracle, reconstruct as rc
from .fastop import FastOp, compose_cs
from .testfunctions import get_function
from .wavelets import dwt as _dwt
from .wavelets.spec import BOUNDARIES, WaveletSpec

log = logging.getLogger("fastcob")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# argument handling


def _common(p: argparse.ArgumentParser, j_default=None, q_default=1):
    p.add_argument("--wavelet", default="db2", help="db<nu>, sym<nu> or haar (default db2)")
    p.add_argument("--nu", type=int, help="vanishing moments; overrides the digits in --wavelet")
    p.add_argument("--boundary", choices=BOUNDARIES, default="vmp")
    p.add_argument("--j", type=int, default=j_default, help="wavelet level, M = 2**j")
    p.add_argument("--q", type=int, default=q_default, help="oversampling, N = 2**(j+q)")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    _io_flags(p)


def _io_flags(p):
    p.add_argument("--kernel-cache-dir", type=Path, help="kernel cache location (default $CWW_CACHE_DIR)")
    p.add_argument("--out", type=Path, help="output file (default stdout)")
    p.add_argument("--threads", type=int, help="BLAS/OpenMP threads for inner numerics")
    p.add_argument("--no-header", action="store_true", help="omit the timestamped provenance line")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fastcob", description="Fast Walsh-to-wavelet change of basis and reconstructions.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("precompute", help="write kernel cache files")
    p.add_argument("--wavelet", default="db2,db3,db4,db5,db6", help="comma-separated wavelet names")
    p.add_argument("--boundary", choices=BOUNDARIES, default="vmp")
    p.add_argument("--q", type=int, default=4, help="largest q; files for 1..q are written")
    p.add_argument("--method", choices=_kernels.METHODS, default=_kernels.DEFAULT_METHOD)
    _io_flags(p)

    p = sub.add_parser("apply", help="apply the operator or its adjoint to a CSV vector")
    _common(p)
    p.add_argument("input", nargs="?", type=Path, help="input CSV (omit with --check-adjoint)")
    p.add_argument("--adjoint", action="store_true", help="apply the adjoint instead of the forward map")
    p.add_argument("--method", choices=_kernels.METHODS, default=_kernels.DEFAULT_METHOD)
    p.add_argument("--check-adjoint", action="store_true", help="print the adjoint identity defect")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-auto", action="store_true", help="fail instead of computing missing kernels")

    p = sub.add_parser("table1", help="subspace-angle table (mu values, 1D and tensor 2D)")
    p.add_argument("--wavelet", default=",".join(oracle.TABLE1_WAVELETS))
    p.add_argument("--boundary", choices=BOUNDARIES, default="vmp")
    p.add_argument("--j", type=int, default=7)
    p.add_argument("--q", default="1,2,3,4", help="comma-separated q values")
    _io_flags(p)

    p = sub.add_parser("reconstruct", help="sample a function and reconstruct it")
    _common(p, j_default=4)
    p.add_argument("--method", choices=("tw", "gs", "pbdw", "cs"), default="gs")
    p.add_argument("--reference-function", help="built-in test function to sample and score against")
    p.add_argument("--samples", type=Path, help="CSV of Walsh samples (instead of a reference function)")
    p.add_argument("--eta", type=float, default=1e-3)
    p.add_argument("--K", type=int, help="PBDW truncation (default 4N)")
    p.add_argument("--mask-file", type=Path, help="CS sample indices, one per line")
    p.add_argument("--m", type=int, help="CS sample budget (default N**dim / 4)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decay", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=3000)
    p.add_argument("--grid", type=int, default=4, help="error grid has 2**grid points per Walsh cell")

    p = sub.add_parser("figures", help="write plot-ready CSV data for the reference experiments")
    p.add_argument("--figure", default="all", help="comma-separated names (fig2..fig7) or 'all'")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--threads", type=int)

    p = sub.add_parser("bench", help="forward/adjoint wall times and doubling ratios")
    _common(p)
    p.add_argument("--min-log", type=int, default=10, help="smallest log2 N per axis")
    p.add_argument("--max-log", type=int, default=20, help="largest log2 N per axis")
    p.add_argument("--repeats", type=int, default=5)
    return parser


def _spec(args) -> WaveletSpec:
    try:
        spec = WaveletSpec.parse(args.wavelet, args.boundary)
        if getattr(args, "nu", None) is not None:
            spec = WaveletSpec(spec.family, args.nu, args.boundary)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return spec


def _check_level(spec, j, q):
    if j is None:
        raise UsageError("--j is required")
    if q < 0 or j < 0:
        raise UsageError("--j and --q must be non-negative")
    if spec.nu > 1 and j < spec.j0:
        raise UsageError(f"{spec} needs --j >= {spec.j0}")


def _cache_dir(args):
    return args.kernel_cache_dir or _kernels.default_cache_dir()


def _header(args, text=""):
    if args.no_header:
        return ""
    stamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return f"# fastcob {args.command} {stamp}{(' ' + text) if text else ''}\n"


def _emit(args, body: str):
    text = _header(args) + body
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def _csv_text(v, header=True) -> str:
    tmp = io.StringIO()
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        if header:
            tmp.write("index,value\n")
        tmp.writelines(f"{i},{float(x)!r}\n" for i, x in enumerate(v))
    else:
        tmp.write(f"# shape {v.shape[0]}x{v.shape[1]}\n")
        tmp.writelines(",".join(repr(float(x)) for x in row) + "\n" for row in v)
    return tmp.getvalue()


@contextlib.contextmanager
def _thread_limit(n):
    if n is None:
        yield
        return
    if n < 1:
        raise UsageError("--threads must be positive")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        log.info("threadpoolctl not installed; --threads only sets environment hints")
        os.environ["OMP_NUM_THREADS"] = str(n)
        yield
        return
    with threadpool_limits(n):
        yield


# ---------------------------------------------------------------------------
# commands


def cmd_precompute(args) -> int:
    names = [w for w in args.wavelet.split(",") if w]
    if args.q < 1:
        raise UsageError("--q must be >= 1")
    specs = []
    for name in names:
        try:
            specs.append(WaveletSpec.parse(name, args.boundary))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    cache = Path(_cache_dir(args))
    cache.mkdir(parents=True, exist_ok=True)
    lines = []
    for spec in specs:
        for q in range(1, args.q + 1):
            path = _kernels.cache_path(cache, spec, q, args.method)
            if path.exists():
                try:
                    _kernels.load_kernels(path, spec, q)
                    lines.append(f"cached {path.name}")
                    continue
                except _kernels.KernelCacheError:
                    pass
            table = _kernels.compute_kernels(spec, q, args.method)
            _kernels.save_kernels(table, path)
            lines.append(f"wrote {path.name} ({path.stat().st_size} bytes)")
    for line in lines:
        print(line, file=sys.stderr)
    return EXIT_OK


def _operator(args, spec) -> FastOp:
    cache = _cache_dir(args)
    q_table = max(args.q, 1)
    path = _kernels.cache_path(cache, spec, q_table, args.method)
    if args.no_auto and not path.exists():
        raise FileNotFoundError(f"kernel cache {path} missing (run 'fastcob precompute' or drop --no-auto)")
    table = _kernels.get_kernels(spec, q_table, cache, args.method)
    return FastOp(spec, args.j, args.q, kernels=table, dim=args.dim)


def cmd_apply(args) -> int:
    spec = _spec(args)
    _check_level(spec, args.j, args.q)
    op = _operator(args, spec)
    if args.check_adjoint:
        rng = np.random.default_rng(args.seed)
        worst = 0.0
        for _ in range(10):
            xi = rng.standard_normal((op.M,) * op.dim)
            alpha = rng.standard_normal((op.N,) * op.dim)
            Ax = op.forward(xi)
            d = abs(np.vdot(Ax, alpha) - np.vdot(xi, op.adjoint(alpha))) / (np.linalg.norm(Ax) * np.linalg.norm(alpha))
            worst = max(worst, d)
        print(f"adjoint defect {worst:.3e}")
        if args.input is None:
            return EXIT_OK if worst <= 1e-12 else EXIT_NUMERIC
    if args.input is None:
        raise UsageError("an input CSV is required unless --check-adjoint is given")
    v = rc.read_vector_csv(args.input)
    want = (op.N if args.adjoint else op.M,) * op.dim
    if v.shape != want:
        raise UsageError(f"input has shape {v.shape}, expected {want} for {spec}, j={args.j}, q={args.q}, dim={args.dim}")
    out = op.adjoint(v) if args.adjoint else op.forward(v)
    _emit(args, _csv_text(out))
    return EXIT_OK


def cmd_table1(args) -> int:
    try:
        qs = tuple(int(s) for s in args.q.split(","))
        names = [w for w in args.wavelet.split(",") if w]
        for n in names:
            WaveletSpec.parse(n, args.boundary)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if any(q < 0 for q in qs):
        raise UsageError("q values must be non-negative")
    res = oracle.table1(names, qs, j=args.j, boundary=args.boundary, cache_dir=_cache_dir(args))
    _emit(args, oracle.table1_csv(res, qs))
    return EXIT_OK


def _samples(args, spec):
    dim = args.dim
    f = None
    if args.reference_function:
        try:
            f, fdim = get_function(args.reference_function)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        if fdim != dim:
            raise UsageError(f"{args.reference_function} is a {fdim}D function; pass --dim {fdim}")
        y = rc.acquire_samples(f, args.j, args.q, dim=dim)
    elif args.samples:
        y = rc.read_vector_csv(args.samples)
        N = 1 << (args.j + args.q)
        if y.shape != (N,) * dim:
            raise UsageError(f"samples have shape {y.shape}, expected {(N,) * dim}")
    else:
        raise UsageError("give --reference-function or --samples")
    return f, y


def cmd_reconstruct(args) -> int:
    spec = _spec(args)
    _check_level(spec, args.j, args.q)
    f, y = _samples(args, spec)
    dim, N, j = args.dim, 1 << (args.j + args.q), args.j
    params = rc.SolverParams(eta=args.eta, K=args.K, pd_maxiter=args.max_iters)
    grid = N << args.grid
    op = None if args.method == "tw" else FastOp(spec, j, args.q, dim=dim, cache_dir=_cache_dir(args))
    if args.method == "tw":
        out = rc.truncated_walsh(y)
        values = rc.walsh_series(out, grid)
    elif args.method == "gs":
        out = rc.gs_solve(op, y, params)
        values = rc.synthesize(spec, j, out, R=grid.bit_length() - 1 - j)
    elif args.method == "pbdw":
        out = rc.pbdw_solve(op, y, params)
        values = rc.walsh_series(out, max(grid, out.shape[0]))
    else:
        size = N**dim
        if args.mask_file:
            mask = rc.read_mask(args.mask_file, size)
        else:
            mask = rc.variable_density_mask(N, args.m or size // 4, seed=args.seed, decay=args.decay, dim=dim)
        z = rc.cs_solve(compose_cs(op, mask), mask.restrict(y), params)
        c = z.reshape((op.M,) * dim)
        for ax in range(dim):
            c = _dwt.idwt(spec, c, axis=ax)
        out = c
        values = rc.synthesize(spec, j, out, R=grid.bit_length() - 1 - j)
    _emit(args, _csv_text(out))
    if f is not None:
        print(f"relative error {rc.relative_error(f, values, dim):.6f}", file=sys.stderr)
    return EXIT_OK


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return float(np.median(times))


def cmd_bench(args) -> int:
    spec = _spec(args)
    if args.min_log > args.max_log:
        raise UsageError("--min-log must not exceed --max-log")
    rng = np.random.default_rng(0)
    rows = ["N,M,forward_s,adjoint_s,forward_ratio,adjoint_ratio"]
    prev = None
    for r in range(args.min_log, args.max_log + 1):
        j = r - args.q
        _check_level(spec, j, args.q)
        op = FastOp(spec, j, args.q, dim=args.dim, cache_dir=_cache_dir(args))
        xi = rng.standard_normal((op.M,) * args.dim)
        alpha = rng.standard_normal((op.N,) * args.dim)
        tf = _median_time(lambda: op.forward(xi), args.repeats)
        ta = _median_time(lambda: op.adjoint(alpha), args.repeats)
        ratios = ("", "") if prev is None else (f"{tf / prev[0]:.3f}", f"{ta / prev[1]:.3f}")
        rows.append(f"{op.N},{op.M},{tf:.6e},{ta:.6e},{ratios[0]},{ratios[1]}")
        prev = (tf, ta)
    _emit(args, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_figures(args) -> int:
    from . import figures

    names = list(figures.FIGURES) if args.figure == "all" else [n for n in args.figure.split(",") if n]
    unknown = [n for n in names if n not in figures.FIGURES]
    if unknown:
        raise UsageError(f"unknown figure(s) {unknown}; known: {list(figures.FIGURES)}")
    for name in names:
        for path in figures.write_figure(name, args.out):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "precompute": cmd_precompute,
    "apply": cmd_apply,
    "table1": cmd_table1,
    "reconstruct": cmd_reconstruct,
    "bench": cmd_bench,
    "figures": cmd_figures,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(name)s: %(message)s")
    try:
        with _thread_limit(args.threads):
            return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fastcob: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, _kernels.KernelCacheError) as exc:
        print(f"fastcob: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"fastcob: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
