import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lassolab import oracles
from lassolab.designs import DenseDesign, DiagonalDesign, make_alpha_instance, random_dense_design
from lassolab.estimators import (
    EstimatorSpec,
    lasso_diagonal,
    lift_sequence_estimator,
    noising_covariance,
    noising_root,
    ols,
    oracle_lasso,
    squared_errors,
    stols,
    stols_eta,
    stols_eta_adaptive,
)
from lassolab.gauss import soft_threshold
from lassolab.theory import ProblemParams, RegimeWarning

TWO = DiagonalDesign(n=2, d=2, s=[1.0, 1.0])


def test_ols_diagonal_example():
    d = DiagonalDesign(n=2, d=2, s=[2.0, 0.5])
    np.testing.assert_allclose(ols(d, [2.0, 3.0]), [1.0, 3.0])


def test_ols_dense_matches_lstsq():
    rng = np.random.default_rng(3)
    des = random_dense_design(30, 5, 2.0, rng)
    y = rng.normal(size=30)
    np.testing.assert_allclose(ols(des, y), np.linalg.lstsq(des.entries, y, rcond=None)[0], rtol=1e-10)


def test_ols_rejects_wrong_length():
    with pytest.raises(ValueError):
        ols(TWO, [1.0])


def test_oracle_interior_minimum():
    res = oracle_lasso(TWO, math.sqrt(2) * np.array([1.0, 1.0]), [1.0, 0.0])
    assert res.lambda_star == pytest.approx(0.5, abs=1e-14)
    assert res.error == pytest.approx(0.5, abs=1e-14)


def test_oracle_zero_truth_reaches_zero():
    res = oracle_lasso(TWO, math.sqrt(2) * np.array([1.0, -1.0]), [0.0, 0.0])
    assert res.error == 0.0
    assert res.lambda_star == pytest.approx(1.0)


def test_oracle_limit_at_zero_is_ols_error():
    # theta far from z on every coordinate where shrinkage moves away from it.
    d = DiagonalDesign(n=2, d=2, s=[1.0, 1.0])
    theta = np.array([3.0, -3.0])
    y = math.sqrt(2) * np.array([2.0, -2.0])
    res = oracle_lasso(d, y, theta)
    assert res.lambda_star == 0.0
    assert res.error == pytest.approx(2.0)


def test_oracle_stack_matches_single():
    rng = np.random.default_rng(5)
    d = DiagonalDesign(n=8, d=6, s=rng.uniform(0.2, 2, 6))
    theta = rng.normal(size=6)
    Y = rng.normal(size=(4, 8)) * 3
    batch = oracle_lasso(d, Y, theta)
    for i in range(4):
        single = oracle_lasso(d, Y[i], theta)
        assert batch.error[i] == single.error
        assert batch.lambda_star[i] == single.lambda_star


@settings(max_examples=60, deadline=None)
@given(hnp.arrays(np.float64, 5, elements=st.floats(-5, 5)),
       hnp.arrays(np.float64, 5, elements=st.floats(-3, 3)),
       hnp.arrays(np.float64, 5, elements=st.floats(0.2, 4)))
def test_oracle_never_above_any_fixed_lambda(z, theta, s):
    d = DiagonalDesign(n=5, d=5, s=s)
    y = z * d.diagonal
    res = oracle_lasso(d, y, theta)
    lams = np.logspace(-4, 2, 300)
    curve = oracles.lasso_error_curve(z, s, theta, lams)
    assert res.error <= curve.min() * (1 + 1e-12) + 1e-14


@settings(max_examples=80, deadline=None)
@given(hnp.arrays(np.float64, 6, elements=st.floats(-10, 10)),
       hnp.arrays(np.float64, 6, elements=st.floats(0.1, 5)),
       st.floats(1e-3, 5.0))
def test_lasso_kkt(y6, s, lam):
    d = DiagonalDesign(n=7, d=6, s=s)
    y = np.r_[y6, 1.0]
    t = lasso_diagonal(d, y, lam)
    X = d.to_dense()
    grad = X.T @ (X @ t - y) / d.n  # half the gradient of the quadratic term
    active = t != 0
    np.testing.assert_allclose(grad[active], -lam * np.sign(t[active]), rtol=1e-9, atol=1e-9)
    assert np.all(np.abs(grad[~active]) <= lam * (1 + 1e-9) + 1e-12)


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(np.float64, 4, elements=st.floats(-5, 5)), st.floats(0.01, 3.0), st.floats(0.1, 10.0))
def test_lasso_scaling_equivariance(y4, lam, c):
    d = DiagonalDesign(n=4, d=4, s=[0.5, 1.0, 2.0, 3.0])
    np.testing.assert_allclose(lasso_diagonal(d, c * y4, c * lam), c * lasso_diagonal(d, y4, lam), rtol=1e-12, atol=1e-12)


def test_lasso_matches_prox_grad():
    rng = np.random.default_rng(9)
    d = DiagonalDesign(n=8, d=5, s=rng.uniform(0.3, 2, 5))
    y = rng.normal(size=8) * 2
    np.testing.assert_allclose(lasso_diagonal(d, y, 0.4), oracles.lasso_prox_grad(d.to_dense(), y, 0.4), atol=1e-10)


def test_lasso_rejects_dense_and_bad_lambda():
    des = DenseDesign(np.eye(3))
    with pytest.raises(TypeError):
        lasso_diagonal(des, np.ones(3), 0.1)
    with pytest.raises(ValueError):
        lasso_diagonal(TWO, np.ones(2), 0.0)


def test_stols_is_soft_thresholded_ols():
    rng = np.random.default_rng(4)
    des = random_dense_design(20, 4, 2.0, rng)
    y = rng.normal(size=20)
    np.testing.assert_allclose(stols(des, y, 0.3), soft_threshold(0.3, ols(des, y)))
    with pytest.raises(ValueError):
        stols(des, y, -1)


def test_stols_eta_hard_sparse_value():
    params = ProblemParams(p=0, n=64, d=64, B=8.0, s=1)
    assert stols_eta(params) == pytest.approx(1.1356587387238818, rel=1e-14)


def test_stols_eta_weak_sparse_value():
    params = ProblemParams(p=1, n=64, d=64, B=8.0, R=1.0)
    t2 = 8.0 / 64
    assert stols_eta(params) == pytest.approx(math.sqrt(2 * t2 * math.log(math.e * 64 * math.sqrt(t2))), rel=1e-14)


def test_stols_eta_warns_outside_regime():
    params = ProblemParams(p=1, n=10, d=10, B=5.0, R=1.0)
    with pytest.warns(RegimeWarning):
        stols_eta(params)


def test_stols_eta_adaptive_uses_design_level():
    inst = make_alpha_instance(64, 64, 8.0, 8.0)
    params = ProblemParams(p=0, n=64, d=64, B=100.0, s=1)
    assert stols_eta_adaptive(params, inst.design) == pytest.approx(stols_eta(params.replace(B=8.0)))


def test_noising_covariance_completes_isotropic_noise():
    rng = np.random.default_rng(6)
    des = random_dense_design(40, 6, 3.0, rng)
    W = noising_covariance(des, 1.3, 3.0)
    total = W + 1.3**2 * np.linalg.inv(des.entries.T @ des.entries)
    np.testing.assert_allclose(total, 1.3**2 * 3.0 / 40 * np.eye(6), atol=1e-12)
    L = noising_root(des, 1.3, 3.0)
    np.testing.assert_allclose(L @ L, W, atol=1e-12)


def test_noising_root_rejects_design_outside_class():
    inst = make_alpha_instance(16, 16, 4.0, 2.0)
    with pytest.raises(ValueError):
        noising_root(inst.design, 1.0, 2.0)
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        noising_root(random_dense_design(20, 4, 3.0, rng), 1.0, 2.0)


def test_noising_root_diagonal_boundary_clipped():
    inst = make_alpha_instance(16, 16, 4.0, 4.0)
    L = noising_root(inst.design, 1.0, 4.0)
    assert L.ndim == 1
    np.testing.assert_array_equal(L[8:], 0.0)
    np.testing.assert_allclose(L[:8] ** 2, 4.0 / 16 - 1.0 / 16)


def test_lift_identity_inner_is_noisy_ols():
    inst = make_alpha_instance(16, 16, 4.0, 2.0)
    y = np.arange(16.0)
    rng = np.random.default_rng(0)
    out = lift_sequence_estimator(lambda v: v, inst.design, y, 1.0, 4.0, 20000, rng)
    sd = np.sqrt(noising_covariance(inst.design, 1.0, 4.0) / 20000)
    assert np.all(np.abs(out - ols(inst.design, y)) <= 5 * sd + 1e-15)


def test_lift_rejects_bad_inner_and_draws():
    inst = make_alpha_instance(4, 4, 2.0, 1.0)
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        lift_sequence_estimator(lambda v: v.sum(axis=1), inst.design, np.ones(4), 1.0, 2.0, 8, rng)
    with pytest.raises(ValueError):
        lift_sequence_estimator(lambda v: v, inst.design, np.ones(4), 1.0, 2.0, 0, rng)


@pytest.mark.parametrize("text", ["ols", "lasso:0.3", "lasso:oracle", "stols:auto", "stols:auto-adaptive",
                                  "stols:0.5", "lifted:soft:64", "lifted:soft:16:0.25"])
def test_spec_round_trip(text):
    spec = EstimatorSpec.parse(text)
    assert spec.to_string() == text
    assert EstimatorSpec.parse(spec.to_string()) == spec


@pytest.mark.parametrize("text", ["", "lasso", "lasso:-1", "stols:x", "lifted:soft", "lifted:hard:4", "ridge:1",
                                  "lifted:soft:0"])
def test_spec_rejects_garbage(text):
    with pytest.raises(ValueError):
        EstimatorSpec.parse(text)


def test_spec_lasso_needs_diagonal():
    with pytest.raises(TypeError):
        EstimatorSpec.parse("lasso:oracle").check_compatible(DenseDesign(np.eye(2)))


def test_squared_errors_each_kind():
    inst = make_alpha_instance(16, 16, 4.0, 2.0)
    params = ProblemParams(p=0, n=16, d=16, B=4.0, s=2)
    theta = np.zeros(16)
    theta[8] = 1.0
    rng = np.random.default_rng(1)
    Y = np.stack([inst.design.matvec(theta) + rng.normal(size=16) for _ in range(3)])
    Z = ols(inst.design, Y)
    eta = stols_eta(params)
    expect = {
        "ols": np.sum((Z - theta) ** 2, axis=1),
        "lasso:0.2": np.sum((lasso_diagonal(inst.design, Y, 0.2) - theta) ** 2, axis=1),
        "lasso:oracle": oracle_lasso(inst.design, Y, theta).error,
        "stols:auto": np.sum((soft_threshold(eta, Z) - theta) ** 2, axis=1),
    }
    for text, want in expect.items():
        got = squared_errors(EstimatorSpec.parse(text), inst.design, Y, theta, params=params)
        np.testing.assert_allclose(got, want, rtol=1e-13)
    rngs = [np.random.default_rng(i) for i in range(3)]
    lifted = squared_errors(EstimatorSpec.parse("lifted:soft:8"), inst.design, Y, theta, params=params,
                            rngs=rngs, B=4.0)
    assert lifted.shape == (3,) and np.all(lifted >= 0)
    with pytest.raises(ValueError):
        squared_errors(EstimatorSpec.parse("lifted:soft:8"), inst.design, Y, theta, params=params)
