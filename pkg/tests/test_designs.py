import math

import numpy as np
import pytest

from lassolab.designs import (
    DenseDesign,
    DiagonalDesign,
    diag_class_B,
    make_alpha_instance,
    min_certified_B,
    random_dense_design,
    sample_observation,
)


def test_diagonal_design_dense_form():
    d = DiagonalDesign(n=4, d=2, s=[2.0, 0.5])
    X = d.to_dense()
    assert X.shape == (4, 2)
    np.testing.assert_allclose(X[:2], np.diag([math.sqrt(8), math.sqrt(2)]))
    np.testing.assert_array_equal(X[2:], 0)
    np.testing.assert_allclose(d.matvec([1.0, -1.0]), X @ [1.0, -1.0])


@pytest.mark.parametrize("kw", [dict(n=1, d=2, s=[1, 1]), dict(n=3, d=2, s=[1, 0]), dict(n=3, d=2, s=[1])])
def test_diagonal_design_validation(kw):
    with pytest.raises(ValueError):
        DiagonalDesign(**kw)


def test_diagonal_design_scales_read_only():
    d = DiagonalDesign(n=3, d=2, s=[1.0, 2.0])
    with pytest.raises(ValueError):
        d.s[0] = 5.0


def test_alpha_instance_layout():
    inst = make_alpha_instance(256, 256, 16.0, 16.0)
    assert inst.k == 128
    np.testing.assert_array_equal(inst.design.s[:128], 1.0)
    np.testing.assert_array_equal(inst.design.s[128:], 1 / 16)
    doc = inst.to_json()
    assert set(doc) == {"n", "d", "B", "alpha", "k", "s"}
    assert doc["alpha"] == 16.0 and len(doc["s"]) == 256


def test_alpha_instance_odd_d_middle_goes_low():
    inst = make_alpha_instance(7, 5, 2.0, 3.0)
    assert inst.k == 2
    np.testing.assert_allclose(inst.design.s, [1.5, 1.5, 0.5, 0.5, 0.5])


def test_alpha_instance_class_membership():
    inst = make_alpha_instance(64, 64, 8.0, 8.0)
    assert min_certified_B(inst.design) == pytest.approx(8.0)
    X = inst.design.to_dense()
    gram = X.T @ X / 64
    assert np.linalg.eigvalsh(gram).min() == pytest.approx(1 / 8)
    assert np.linalg.cond(gram) == pytest.approx(8.0)


@pytest.mark.parametrize("args", [(4, 1, 1.0, 2.0), (4, 6, 1.0, 2.0), (4, 4, 1.0, 0.5), (4, 4, 0.0, 2.0)])
def test_alpha_instance_validation(args):
    with pytest.raises(ValueError):
        make_alpha_instance(*args)


def test_dense_design_rejects_rank_deficient():
    X = np.ones((5, 2))
    with pytest.raises(np.linalg.LinAlgError):
        DenseDesign(X)


def test_dense_design_gram_and_solve():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(20, 4))
    des = DenseDesign(X)
    np.testing.assert_allclose(des.gram(), X.T @ X / 20, rtol=1e-12)
    y = rng.normal(size=20)
    np.testing.assert_allclose(des.solve_ls(y), np.linalg.lstsq(X, y, rcond=None)[0], rtol=1e-10)
    Y = rng.normal(size=(3, 20))
    np.testing.assert_allclose(des.solve_ls(Y)[1], np.linalg.lstsq(X, Y[1], rcond=None)[0], rtol=1e-10)


def test_random_dense_design_certified_level():
    rng = np.random.default_rng(1)
    des = random_dense_design(256, 64, 8.0, rng)
    assert min_certified_B(des) == pytest.approx(8.0, rel=1e-10)
    eig = np.linalg.eigvalsh(des.gram())
    assert eig.max() <= 4.0 / 8.0 * (1 + 1e-10)


def test_diag_class_level_is_at_most_certified():
    rng = np.random.default_rng(2)
    des = random_dense_design(50, 10, 3.0, rng)
    # max_i (G^{-1})_ii <= lambda_max(G^{-1}) = B
    assert diag_class_B(des) <= min_certified_B(des) * (1 + 1e-12)
    G_inv = np.linalg.inv(des.gram())
    assert diag_class_B(des) == pytest.approx(np.max(np.diag(G_inv)), rel=1e-10)


def test_sample_observation_noise_free_and_shape():
    d = DiagonalDesign(n=5, d=3, s=[1.0, 2.0, 3.0])
    theta = np.array([1.0, -1.0, 0.5])
    y = sample_observation(d, theta, 0.0, np.random.default_rng(0))
    np.testing.assert_allclose(y, d.to_dense() @ theta)
    with pytest.raises(ValueError):
        sample_observation(d, theta[:2], 1.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        sample_observation(d, theta, -1.0, np.random.default_rng(0))
