import numpy as np
import pytest

from fastcob import kernels as K
from fastcob.dyadic import fwht_sequency
from fastcob.wavelets.spec import WaveletSpec


@pytest.mark.parametrize("name", ["haar", "db2", "db4", "sym6"])
def test_kappa_zero_sums_to_unit_mass(name):
    # sum over l of int_0^1 phi(x + l) dx = int phi = 1
    spec = WaveletSpec.parse(name, "periodic")
    kap = K.compute_interior_kernels(spec, 3)
    assert np.isclose(kap[:, 0].sum(), 1.0, atol=1e-14)


def test_haar_kernel_is_delta():
    kap = K.compute_interior_kernels(WaveletSpec.parse("haar"), 4)
    assert np.allclose(kap, np.eye(1, 16))


@pytest.mark.parametrize("name", ["db2", "db3", "sym5"])
@pytest.mark.parametrize("boundary", ["periodic", "vmp"])
def test_exact_matches_trapezoid(name, boundary):
    spec = WaveletSpec.parse(name, boundary)
    ex = K.compute_kernels(spec, 2, "exact")
    tr = K.compute_kernels(spec, 2, "trapezoid", R=14)
    for a, b in ((ex.interior, tr.interior), (ex.left, tr.left), (ex.right, tr.right)):
        assert np.abs(a - b).max() < 1e-6


def test_truncation_is_prefix():
    spec = WaveletSpec.parse("db4")
    big = K.compute_kernels(spec, 4)
    small = K.compute_kernels(spec, 2)
    t = big.truncate(2)
    assert np.allclose(t.interior, small.interior, atol=1e-14)
    assert np.allclose(t.left, small.left, atol=1e-14)
    with pytest.raises(ValueError):
        small.truncate(3)


def test_kernel_of_shifted_function_via_transform():
    # kappa is the Walsh transform of the cell masses: inverting recovers masses that sum to 1
    spec = WaveletSpec.parse("db3")
    kap = K.compute_interior_kernels(spec, 4)
    masses = fwht_sequency(kap, axis=1) / 16
    assert np.isclose(masses.sum(), 1.0)


def test_kappa_accessor_zero_outside_support():
    t = K.compute_kernels(WaveletSpec.parse("db2"), 1)
    assert np.array_equal(t.kappa(5), np.zeros(2))
    assert t.kappa(-1).shape == (2,)


def test_table_shape_validation():
    spec = WaveletSpec.parse("db2")
    with pytest.raises(ValueError):
        K.KernelTable(spec, 1, np.zeros((3, 4)), np.zeros((2, 3, 2)), np.zeros((2, 3, 2)))


def test_cache_roundtrip(tmp_path):
    spec = WaveletSpec.parse("sym4", "periodic")
    t = K.compute_kernels(spec, 3)
    path = tmp_path / "k.cwwk"
    K.save_kernels(t, path)
    back = K.load_kernels(path, spec, 3)
    assert back.spec == spec and back.q == 3 and back.method == "exact"
    assert np.array_equal(back.interior, t.interior)
    assert np.array_equal(back.right, t.right)
    assert K.kernel_cache_io(None, path, "load").q == 3
    with pytest.raises(K.KernelCacheError):
        K.load_kernels(path, spec, 2)
    with pytest.raises(K.KernelCacheError):
        K.load_kernels(path, WaveletSpec.parse("sym4"))


@pytest.mark.parametrize("damage", ["flip", "truncate", "magic"])
def test_cache_corruption_detected(tmp_path, damage):
    path = tmp_path / "k.cwwk"
    K.save_kernels(K.compute_kernels(WaveletSpec.parse("db2"), 2), path)
    data = bytearray(path.read_bytes())
    if damage == "flip":
        data[50] ^= 1
    elif damage == "truncate":
        data = data[:20]
    else:
        data[:4] = b"XXXX"
    path.write_bytes(bytes(data))
    with pytest.raises(K.KernelCacheError):
        K.load_kernels(path)


def test_get_kernels_uses_and_repairs_cache(tmp_path):
    spec = WaveletSpec.parse("db3")
    t = K.get_kernels(spec, 2, tmp_path)
    path = K.cache_path(tmp_path, spec, 2)
    assert path.exists()
    path.write_bytes(b"garbage")
    t2 = K.get_kernels(spec, 2, tmp_path)
    assert np.array_equal(t.interior, t2.interior)
    assert K.load_kernels(path).q == 2


def test_default_cache_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("CWW_CACHE_DIR", str(tmp_path))
    assert K.default_cache_dir() == tmp_path


@pytest.mark.parametrize("name", ["db2", "db6", "sym6"])
def test_storage_is_linear_in_2q(name):
    spec = WaveletSpec.parse(name)
    sizes = [K.compute_kernels(spec, q).nbytes for q in (1, 2, 3, 4)]
    assert all(b == 2 * a for a, b in zip(sizes, sizes[1:]))
    nu = spec.nu
    assert sizes[-1] == 8 * 16 * ((2 * nu - 1) + 2 * nu * (2 * nu - 1))
