import re
import subprocess
import sys

import numpy as np
import pytest

from fastcob import reconstruct as rc
from fastcob.cli import main
from fastcob.fastop import FastOp
from fastcob.wavelets.spec import WaveletSpec


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_precompute_writes_and_reuses(tmp_path, capsys):
    code, _, err = run(capsys, "precompute", "--wavelet", "db2,db3,db4,db5,db6", "--q", "4",
                       "--kernel-cache-dir", str(tmp_path))
    assert code == 0
    files = sorted(tmp_path.glob("*.cwwk"))
    assert len(files) == 20
    assert all(f.stat().st_size < 64 * 1024 for f in files)
    code, _, err = run(capsys, "precompute", "--wavelet", "db2,db3,db4,db5,db6", "--q", "4",
                       "--kernel-cache-dir", str(tmp_path))
    assert code == 0 and err.count("cached") == 20 and "wrote" not in err


def test_precompute_unwritable_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "precompute", "--wavelet", "db2", "--q", "1", "--kernel-cache-dir",
                       str(blocker / "sub"))
    assert code == 3 and "I/O error" in err


def test_apply_forward_and_adjoint(tmp_path, capsys):
    x = np.random.default_rng(0).standard_normal(16)
    rc.write_vector_csv(tmp_path / "x.csv", x)
    code, out, _ = run(capsys, "apply", "--wavelet", "db2", "--j", "4", "--q", "1", "--no-header",
                       str(tmp_path / "x.csv"), "--out", str(tmp_path / "y.csv"))
    assert code == 0
    y = rc.read_vector_csv(tmp_path / "y.csv")
    op = FastOp(WaveletSpec.parse("db2"), 4, 1)
    assert np.allclose(y, op.forward(x))
    code, *_ = run(capsys, "apply", "--wavelet", "db2", "--j", "4", "--q", "1", "--adjoint",
                   str(tmp_path / "y.csv"), "--out", str(tmp_path / "z.csv"))
    assert code == 0
    assert rc.read_vector_csv(tmp_path / "z.csv").shape == (16,)


def test_apply_dimension_mismatch(tmp_path, capsys):
    rc.write_vector_csv(tmp_path / "x.csv", np.ones(8))
    code, _, err = run(capsys, "apply", "--wavelet", "db2", "--j", "4", str(tmp_path / "x.csv"))
    assert code == 1 and "expected" in err


def test_apply_no_auto_needs_cache(tmp_path, capsys):
    code, _, err = run(capsys, "apply", "--wavelet", "db3", "--j", "4", "--check-adjoint", "--no-auto",
                       "--kernel-cache-dir", str(tmp_path))
    assert code == 3


@pytest.mark.parametrize("dim", ["1", "2"])
def test_check_adjoint(capsys, dim):
    code, out, _ = run(capsys, "apply", "--wavelet", "sym5", "--j", "4", "--q", "2", "--dim", dim,
                       "--check-adjoint")
    assert code == 0
    defect = float(re.search(r"adjoint defect (\S+)", out).group(1))
    assert defect <= 1e-12


def test_table1_output(capsys):
    code, out, _ = run(capsys, "table1", "--wavelet", "db2", "--q", "1,2", "--no-header")
    assert code == 0
    assert out.splitlines()[1].startswith("db2,1.200,1.05")


def test_header_line_and_no_header(capsys):
    _, out, _ = run(capsys, "table1", "--wavelet", "db2", "--q", "1")
    assert out.startswith("# fastcob table1 ")
    _, out2, _ = run(capsys, "table1", "--wavelet", "db2", "--q", "1", "--no-header")
    assert out.splitlines()[1:] == out2.splitlines()


def test_reconstruct_tw_constant(capsys):
    code, _, err = run(capsys, "reconstruct", "--method", "tw", "--reference-function", "constant",
                       "--j", "3", "--no-header")
    assert code == 0
    assert float(re.search(r"relative error (\S+)", err).group(1)) <= 1e-10


def test_reconstruct_vmp_beats_periodic(capsys):
    errs = {}
    for b in ("periodic", "vmp"):
        code, _, err = run(capsys, "reconstruct", "--method", "gs", "--wavelet", "db4", "--boundary", b,
                           "--j", "4", "--q", "1", "--reference-function", "cosine_ramp", "--no-header")
        assert code == 0
        errs[b] = float(re.search(r"relative error (\S+)", err).group(1))
    assert errs["vmp"] < errs["periodic"]


@pytest.mark.parametrize("method", ["pbdw", "cs"])
def test_reconstruct_other_methods(tmp_path, capsys, method):
    code, _, err = run(capsys, "reconstruct", "--method", method, "--wavelet", "db4", "--j", "5", "--q", "1",
                       "--reference-function", "piecewise", "--out", str(tmp_path / "o.csv"))
    assert code == 0 and "relative error" in err
    assert (tmp_path / "o.csv").read_text().startswith("# fastcob reconstruct")


def test_reconstruct_from_samples_and_mask(tmp_path, capsys):
    from fastcob.testfunctions import bump

    rc.write_vector_csv(tmp_path / "y.csv", rc.acquire_samples(bump, 4, 1))
    rc.write_mask(tmp_path / "m.txt", rc.variable_density_mask(32, 16, seed=0))
    code, *_ = run(capsys, "reconstruct", "--method", "cs", "--wavelet", "db2", "--j", "4", "--samples",
                   str(tmp_path / "y.csv"), "--mask-file", str(tmp_path / "m.txt"), "--out", str(tmp_path / "o.csv"))
    assert code == 0


def test_usage_errors(capsys):
    assert run(capsys, "reconstruct", "--method", "gs", "--wavelet", "db1", "--boundary", "vmp", "--j", "4",
               "--reference-function", "hat")[0] == 1
    assert run(capsys, "reconstruct", "--j", "4")[0] == 1
    assert run(capsys, "reconstruct", "--j", "4", "--reference-function", "smooth2d")[0] == 1
    assert run(capsys, "reconstruct", "--j", "1", "--wavelet", "db4", "--reference-function", "hat")[0] == 1
    assert run(capsys, "table1", "--wavelet", "coif3")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_numerical_failure_exit_code(tmp_path, capsys):
    rc.write_vector_csv(tmp_path / "y.csv", np.random.default_rng(0).standard_normal(32))
    code, _, err = run(capsys, "reconstruct", "--method", "cs", "--wavelet", "db2", "--j", "3", "--q", "2",
                       "--samples", str(tmp_path / "y.csv"), "--m", "32", "--eta", "1e-9", "--max-iters", "20")
    assert code == 2 and "numerical failure" in err


def test_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"o{k}.csv"
        run(capsys, "reconstruct", "--method", "cs", "--wavelet", "db4", "--j", "5", "--q", "1",
            "--reference-function", "piecewise", "--seed", "3", "--no-header", "--out", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_bench_output(capsys):
    code, out, _ = run(capsys, "bench", "--wavelet", "db2", "--min-log", "8", "--max-log", "10",
                       "--repeats", "1", "--no-header")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("N,M,") and len(lines) == 4


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "fastcob.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "reconstruct" in res.stdout
