import math

import numpy as np
import pytest

from fastcob import oracle
from fastcob.wavelets.spec import WaveletSpec


@pytest.mark.parametrize("name,boundary", [("db2", "vmp"), ("db3", "periodic"), ("sym4", "vmp")])
def test_lemma_matches_quadrature(name, boundary):
    spec = WaveletSpec.parse(name, boundary)
    j = spec.j0
    a = oracle.build_dense(spec, j, 1, "lemma").matrix
    b = oracle.build_dense(spec, j, 1, "quadrature", R=12).matrix
    assert np.abs(a - b).max() < 1e-7


def test_walsh_matrix_is_hadamard():
    H = oracle.walsh_matrix(16)
    assert np.allclose(H @ H.T, 16 * np.eye(16))


def test_guards():
    spec = WaveletSpec.parse("db2")
    with pytest.raises(ValueError):
        oracle.build_dense(spec, 14, 2)
    with pytest.raises(ValueError):
        oracle.build_dense(spec, 1, 1)
    with pytest.raises(ValueError):
        oracle.build_dense(spec, 3, 1, "svd")
    with pytest.raises(ValueError):
        oracle.subspace_angle(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        oracle.stable_sampling_probe(spec, [3], 1.0)


def test_subspace_angle_values():
    rep = oracle.subspace_angle(np.eye(4)[:, :3])
    assert rep.mu == pytest.approx(1.0) and rep.cond == pytest.approx(1.0)
    deficient = oracle.subspace_angle(np.array([[1.0, 1.0], [1.0, 1.0], [0, 0]]))
    assert math.isinf(deficient.mu)


def test_haar_mu_is_one():
    assert oracle.mu_1d(WaveletSpec.parse("haar"), 5, 0) == pytest.approx(1.0)


def test_mu_decreases_with_oversampling():
    spec = WaveletSpec.parse("db4")
    mus = [oracle.mu_1d(spec, 5, q) for q in (1, 2, 3)]
    assert mus[0] > mus[1] > mus[2] >= 1.0


def test_stable_sampling_rate_is_linear():
    # the minimal q for a fixed gamma should not grow with j
    res = oracle.stable_sampling_probe(WaveletSpec.parse("db2"), range(3, 8), 1.1)
    qs = set(res.values())
    assert None not in qs and len(qs) == 1


def test_table1_csv_layout():
    res = {"db2": [1.2, 1.05]}
    text = oracle.table1_csv(res, qs=(1, 2))
    lines = text.strip().splitlines()
    assert lines[0] == "wavelet,q1_1d,q2_1d,q1_2d,q2_2d"
    assert lines[1] == "db2,1.200,1.050,1.440,1.103"
    assert oracle.table1_csv(res, qs=(1, 2), with_2d=False).splitlines()[0] == "wavelet,q1_1d,q2_1d"
