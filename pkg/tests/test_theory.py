import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lassolab import theory
from lassolab.designs import make_alpha_instance
from lassolab.theory import ProblemParams


def hard(n=256, d=256, B=16.0, s=2, sigma=1.0):
    return ProblemParams(p=0, n=n, d=d, sigma=sigma, B=B, s=s)


def weak(p=1.0, n=256, d=256, B=16.0, R=1.0, sigma=1.0):
    return ProblemParams(p=p, n=n, d=d, sigma=sigma, B=B, R=R)


def test_rate_core_hard_sparse_value():
    # (16/256) * 2 * log(128 e), evaluated at 40 digits.
    assert theory.rate_core(hard()) == pytest.approx(0.7315037829899521, rel=1e-14)


def test_rate_core_weak_sparse_formula():
    prm = weak(p=0.5, n=1024, d=512, B=4.0, R=2.0)
    t2 = 4.0 / (4.0 * 1024)
    expected = 4.0 * (t2 * math.log(math.e * 512 * t2**0.25)) ** 0.75
    assert theory.rate_core(prm) == pytest.approx(expected, rel=1e-14)


def test_minimax_rate_constants():
    rep = theory.minimax_rate(hard())
    assert rep.detail["lower_const"] == 0.006 and rep.detail["upper_const"] == 2.0
    assert rep.detail["lower"] <= rep.value <= rep.detail["upper"]
    rep = theory.minimax_rate(weak())
    assert (rep.detail["lower_const"], rep.detail["upper_const"]) == (0.0035, 1203.0)
    assert rep.regime_ok


def test_minimax_rate_outside_regime_warns():
    prm = weak(n=16, d=16, B=16.0)
    with pytest.warns(theory.RegimeWarning):
        rep = theory.minimax_rate(prm)
    assert not rep.regime_ok


def test_stols_bound_is_six_times_core():
    prm = hard()
    assert theory.stols_risk_bound(prm).value == pytest.approx(6 * theory.rate_core(prm))


@pytest.mark.parametrize("kw", [dict(p=1.5, n=4, d=4, R=1), dict(p=0, n=4, d=4), dict(p=0, n=4, d=4, s=5),
                                dict(p=1, n=4, d=4), dict(p=1, n=3, d=4, R=1), dict(p=1, n=4, d=4, R=1, B=0)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        ProblemParams(**kw)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 2.0), st.sampled_from([0.25, 0.5, 0.75, 1.0]), st.floats(0.1, 4.0), st.integers(1, 10))
def test_t_sup_matches_bruteforce(zeta, p, R, d):
    a = theory.t_sup(zeta, p, R, d)
    b = theory.t_sup_bruteforce(zeta, p, R, d)
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 2.0), st.sampled_from([0.5, 1.0]), st.floats(0.1, 4.0), st.integers(1, 8))
def test_t_sup_monotone_and_capped(zeta, p, R, d):
    v = theory.t_sup(zeta, p, R, d)
    assert v <= min(R * R, d * zeta * zeta) * (1 + 1e-12)
    assert theory.t_sup(zeta * 1.1, p, R, d) >= v * (1 - 1e-12)


def test_t_sup_random_feasible_points_never_exceed():
    rng = np.random.default_rng(0)
    for _ in range(300):
        p = rng.choice([0.25, 0.5, 1.0])
        d = int(rng.integers(1, 9))
        R = float(rng.uniform(0.2, 3))
        zeta = float(rng.uniform(0.05, 2))
        theta = rng.exponential(size=d) * rng.choice([-1, 1], size=d)
        theta *= R / np.sum(np.abs(theta) ** p) ** (1 / p)
        assert np.sum(np.minimum(theta**2, zeta**2)) <= theory.t_sup(zeta, p, R, d) * (1 + 1e-12)


def test_t_sup_hard_sparse():
    assert theory.t_sup(0.5, 0, 3, 10) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        theory.t_sup(0.5, 0, 11, 10)


def test_rho_n_terms():
    theta = np.array([0.0, 0.1, 3.0])
    nu2 = 2.0 / 50
    eta = 0.4
    expected = 3 * nu2 * math.exp(-eta**2 / (2 * nu2)) + (0.01 + nu2) + (0.01 + eta**2)
    assert theory.rho_n(theta, eta, 1.0, 2.0, 50) == pytest.approx(expected)


def test_lasso_lower_bound_hard_instance():
    for prm in (hard(s=1), weak()):
        alpha = theory.alpha_star(prm)
        assert alpha == pytest.approx(16.0)
        rep = theory.lasso_lower_bound(prm, alpha)
        assert rep.detail["constant"] == Fraction(9, 20000)
        assert rep.detail["min_term"] == pytest.approx(1.0)
        assert rep.value == pytest.approx(0.00045)


def test_alpha_star_balances_terms():
    prm = weak(p=0.5, n=4096, d=512, B=8.0)
    a = theory.alpha_star(prm)
    terms = theory.lasso_lower_bound(prm, a).detail["terms"]
    assert terms[0] == pytest.approx(terms[1], rel=1e-12)
    for f in (0.8, 1.25):
        assert theory.lasso_lower_bound(prm, a * f).value <= theory.lasso_lower_bound(prm, a).value * (1 + 1e-12)


def test_alpha_star_clipped():
    prm = weak(p=1.0, n=100000, d=4, B=1.0)
    assert theory.alpha_star(prm) == 1.0


def test_worst_theta_hard_sparse():
    prm = hard(s=1)
    th = theory.worst_theta(prm, 16.0)
    assert np.flatnonzero(th).tolist() == [128]
    assert th[128] == pytest.approx(2.0)


def test_worst_theta_weak_sparse_is_unit_vector():
    prm = weak()
    th = theory.worst_theta(prm, theory.alpha_star(prm))
    assert np.flatnonzero(th).tolist() == [128]
    assert th[128] == 1.0


def test_worst_theta_spreads_mass_when_signal_small():
    prm = weak(p=0.5, n=4096, d=512, B=1.0)
    th = theory.worst_theta(prm, 2.0)
    nz = np.flatnonzero(th)
    assert nz[0] == 256 and len(nz) > 1
    assert np.sum(np.abs(th) ** 0.5) <= 1.0 + 1e-12


def test_worst_theta_validation():
    with pytest.raises(ValueError):
        theory.worst_theta(hard(s=1), 0.5)
    with pytest.raises(ValueError):
        theory.worst_theta(hard(s=1), 2.0, k=3)


def test_lasso_risk_lower_diag_below_exact_risk():
    # Exact fixed-lambda risk on a diagonal design is a sum of scaled soft-threshold risks.
    from lassolab.gauss import risk_soft_scaled

    inst = make_alpha_instance(64, 64, 8.0, 8.0)
    s = inst.design.s
    theta = np.zeros(64)
    theta[32] = 1.0
    for tau in (0.3, 1.0, 3.0):
        lam = tau / math.sqrt(64)
        exact = float(np.sum(risk_soft_scaled(1 / np.sqrt(64 * s), lam / s, theta)))
        assert theory.lasso_risk_lower_diag(inst.design, theta, 1.0, tau) <= exact


def test_constants_check_all_pass():
    reps = theory.constants_check()
    assert len(reps) == 4 and all(r.passed for r in reps)
    assert Fraction(3, 25) ** 2 / 32 == theory.LASSO_LOWER_CONST


def test_data_dependent_instance():
    prm = weak(n=256, d=256, B=16.0, R=1.0)
    inst, theta = theory.data_dependent_instance(prm)
    assert inst.alpha == pytest.approx(16.0)
    assert np.flatnonzero(theta).tolist() == [128]
    with pytest.raises(ValueError):
        theory.data_dependent_instance(hard())
    with pytest.raises(ValueError):
        theory.data_dependent_instance(weak(n=8, d=8, B=16.0, R=1.0))
