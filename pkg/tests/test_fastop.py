import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fastcob.fastop import FastOp, SamplingMask, compose_cs, haar_fullrank, pad_to_power_of_two
from fastcob.oracle import build_dense
from fastcob.wavelets.spec import WaveletSpec

CONFIGS = [("haar", "periodic", 3, 1), ("db2", "vmp", 3, 1), ("db2", "periodic", 2, 2),
           ("db4", "vmp", 4, 2), ("sym5", "vmp", 4, 1), ("db6", "periodic", 4, 1), ("db6", "vmp", 5, 0)]


@pytest.mark.parametrize("name,boundary,j,q", CONFIGS)
def test_forward_matches_lemma_matrix(name, boundary, j, q, rng):
    spec = WaveletSpec.parse(name, boundary)
    op = FastOp(spec, j, q)
    D = build_dense(spec, j, q, "lemma").matrix
    X = rng.standard_normal((op.M, 5))
    assert np.allclose(op.matmat_1d(X), D @ X, atol=1e-12)
    Y = rng.standard_normal((op.N, 5))
    assert np.allclose(op.rmatmat_1d(Y), D.T @ Y, atol=1e-12)


@pytest.mark.parametrize("name,boundary,j,q", CONFIGS)
def test_adjoint_identity(name, boundary, j, q, rng):
    for dim in (1, 2):
        op = FastOp(WaveletSpec.parse(name, boundary), j, q, dim=dim)
        for _ in range(5):
            xi = rng.standard_normal((op.M,) * dim)
            a = rng.standard_normal((op.N,) * dim)
            Ax = op.forward(xi)
            d = abs(np.vdot(Ax, a) - np.vdot(xi, op.adjoint(a))) / (np.linalg.norm(Ax) * np.linalg.norm(a))
            assert d < 1e-12


def test_two_dim_is_tensor_product(rng):
    spec = WaveletSpec.parse("db3")
    op1, op2 = FastOp(spec, 3, 1), FastOp(spec, 3, 1, dim=2)
    G = op1.to_dense()
    X = rng.standard_normal((8, 8))
    assert np.allclose(op2.forward(X), G @ X @ G.T)
    Y = rng.standard_normal((16, 16))
    assert np.allclose(op2.adjoint(Y), G.T @ Y @ G)
    L = op2.aslinearoperator()
    assert np.allclose(L @ X.ravel(), op2.forward(X).ravel())
    assert np.allclose(L.rmatvec(Y.ravel()), op2.adjoint(Y).ravel())


@pytest.mark.parametrize("name,q", [("db4", 1), ("db4", 3), ("db2", 3), ("db2", 4)])
def test_fwht_count_per_application(rng, name, q):
    spec = WaveletSpec.parse(name)
    budget = (2 * spec.nu - 1) + 2 * spec.nu
    for j in (spec.j0 + 1, spec.j0 + 3):
        op = FastOp(spec, j, q)
        op.forward(rng.standard_normal(op.M))
        first = op.fwht_calls
        assert 1 <= first <= budget
        op.adjoint(rng.standard_normal(op.N))
        assert op.fwht_calls == 2 * first
        assert first == ((1 << q) if (1 << q) <= 4 * spec.nu - 1 else 2 * spec.nu - 1)


@pytest.mark.parametrize("name", ["haar", "db2", "db3", "sym4", "db6"])
@pytest.mark.parametrize("boundary", ["periodic", "vmp"])
@pytest.mark.parametrize("q", [0, 1, 2, 3])
def test_block_and_shift_paths_agree(rng, name, boundary, q):
    spec = WaveletSpec.parse(name, boundary)
    for j in (spec.j0, spec.j0 + 2):
        a = FastOp(spec, j, q)
        b = FastOp(spec, j, q)
        b._per_block = not a._per_block
        for dim in (1, 2):
            a.dim = b.dim = dim
            x = rng.standard_normal((a.M,) * dim)
            y = rng.standard_normal((a.N,) * dim)
            assert np.allclose(a.forward(x), b.forward(x), rtol=1e-12, atol=1e-12)
            assert np.allclose(a.adjoint(y), b.adjoint(y), rtol=1e-12, atol=1e-12)


def test_columns_have_unit_norm_with_enough_rows():
    # with N much larger than M the Walsh rows capture almost all of each basis function
    op = FastOp(WaveletSpec.parse("db2"), 3, 6)
    norms = np.linalg.norm(op.to_dense(), axis=0)
    assert np.all(norms <= 1 + 1e-12)
    assert np.all(norms > 0.99)


def test_taller_operator_extends_rows(rng):
    op = FastOp(WaveletSpec.parse("sym4"), 4, 1)
    tall = op.taller(3)
    x = rng.standard_normal(16)
    assert np.allclose(tall.forward(x)[:op.N], op.forward(x))


def test_haar_operator_is_orthogonal():
    op = FastOp(WaveletSpec.parse("haar"), 4, 0)
    D = op.to_dense()
    assert np.allclose(D.T @ D, np.eye(16), atol=1e-12)
    H = haar_fullrank(4).to_dense()
    assert np.allclose(H.T @ H, np.eye(16), atol=1e-12)


def test_input_validation():
    spec = WaveletSpec.parse("db4")
    with pytest.raises(ValueError):
        FastOp(spec, 2, 1)
    with pytest.raises(ValueError):
        FastOp(spec, 4, -1)
    with pytest.raises(ValueError):
        FastOp(spec, 4, 1, dim=3)
    op = FastOp(spec, 4, 1)
    with pytest.raises(ValueError):
        op.forward(np.zeros(8))
    with pytest.raises(ValueError):
        op.adjoint(np.zeros(16))


def test_mask_behaviour():
    m = SamplingMask([5, 1, 3], 8)
    assert m.indices.tolist() == [1, 3, 5] and len(m) == 3
    v = np.arange(8.0)
    assert m.restrict(v).tolist() == [1, 3, 5]
    assert m.scatter([1, 2, 3]).tolist() == [0, 1, 0, 2, 0, 3, 0, 0]
    with pytest.raises(ValueError):
        SamplingMask([1, 1], 8)
    with pytest.raises(ValueError):
        SamplingMask([8], 8)
    assert len(SamplingMask.full(4)) == 4


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("use_idwt", [True, False])
def test_cs_operator_adjoint(dim, use_idwt, rng):
    op = FastOp(WaveletSpec.parse("db2"), 3, 1, dim=dim)
    size = op.N**dim
    mask = SamplingMask(rng.choice(size, size // 3, replace=False), size)
    A = compose_cs(op, mask, use_idwt)
    z = rng.standard_normal(A.shape[1])
    y = rng.standard_normal(A.shape[0])
    assert np.isclose(A.forward(z) @ y, z @ A.adjoint(y))
    with pytest.raises(ValueError):
        compose_cs(op, SamplingMask([0], size + 1))


def test_pad_to_power_of_two():
    x = np.ones((5, 3))
    assert pad_to_power_of_two(x).shape == (8, 3)
    assert pad_to_power_of_two(x, axis=1).shape == (5, 4)
    assert pad_to_power_of_two(np.ones(4)).shape == (4,)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["db2", "db3", "sym4"]), st.sampled_from(["periodic", "vmp"]),
       st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_linearity(name, boundary, q, seed):
    spec = WaveletSpec.parse(name, boundary)
    op = FastOp(spec, spec.j0 + 1, q)
    r = np.random.default_rng(seed)
    a, b = r.standard_normal(op.M), r.standard_normal(op.M)
    assert np.allclose(op.forward(2 * a - b), 2 * op.forward(a) - op.forward(b), atol=1e-12)
