"""Analytic check suite behind ``lassolab verify``.

Each check returns a :class:`CheckResult`; ``run_checks`` collects them.
``fault="risk-at-zero"`` doubles the constant of the ``r(t, 0)`` lower bound
(1/4 -> 1/2), which must make the suite fail.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from lassolab import gauss, oracles, theory
from lassolab.designs import DiagonalDesign, sample_observation
from lassolab.estimators import lasso_diagonal, ols, oracle_lasso

PINCH_T = Fraction(9, 10)
PINCH_VALUE = Fraction(145223897, 400000000)
FAULTS = ("risk-at-zero",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    citation: str
    detail: str = ""


def _grid(step, lo=None, hi=10.0):
    lo = step if lo is None else lo
    return np.arange(1, int(round((hi - lo) / step)) + 2) * step + (lo - step)


def check_mills_bounds(step):
    t = _grid(step)
    m = gauss.mills_ratio(t)
    bad_r = int(np.sum(m < gauss.mills_lower_rational(t)))
    bad_p = int(np.sum(m < gauss.mills_lower_poly(t)))
    return [
        CheckResult("mills >= t(t^2+5)/(t^4+6t^2+3)", bad_r == 0, "rational Mills lower bound",
                    f"{bad_r} violations on {t.size} points"),
        CheckResult("mills >= 5/4 - t + 5t^2/8 - t^3/3", bad_p == 0, "cubic Mills lower bound",
                    f"{bad_p} violations on {t.size} points"),
    ]


def check_risk_at_zero(step, fault=None):
    t = _grid(step)
    r0 = gauss.risk_at_zero(t)
    const = 0.5 if fault == "risk-at-zero" else 0.25
    lower = const * np.exp(-0.5 * t * t) / (t**3 + 1)
    bad_lo = int(np.sum(r0 < lower))
    bad_hi = int(np.sum(r0 > 1 + t * t))
    gap = float(np.max(np.abs(r0 - gauss.risk_soft(t, 0.0))))
    return [
        CheckResult(f"r(t,0) >= {const:g} e^(-t^2/2)/(t^3+1)", bad_lo == 0, "risk-at-zero lower bound",
                    f"{bad_lo} violations on {t.size} points"),
        CheckResult("r(t,0) <= 1 + t^2", bad_hi == 0, "risk-at-zero upper bound",
                    f"{bad_hi} violations on {t.size} points"),
        CheckResult("Mills decomposition of r(t,0) matches closed form", gap <= 1e-10,
                    "r(t,0) = sqrt(2/pi) e^(-t^2/2) g(t)", f"max abs gap {gap:.2e}"),
    ]


def johnstone_grid():
    nus = np.logspace(-1, 1, 10)
    taus = np.logspace(-2, 1, 10)
    mus = np.linspace(-10, 10, 21)
    return nus, taus, mus


def check_johnstone(slack=1e-8):
    nus, taus, mus = johnstone_grid()
    bad, count, worst = 0, 0, 0.0
    for nu in nus:
        for tau in taus:
            for mu in mus:
                env = gauss.johnstone_envelope(nu, tau, mu)
                q = oracles.risk_quad(nu, tau, mu)
                count += 1
                if not env.contains(q, slack):
                    bad += 1
                worst = max(worst, abs(q - float(gauss.risk_soft_scaled(nu, tau, mu))))
    return [
        CheckResult("quadrature risk inside Johnstone envelope", bad == 0, "two-sided soft-threshold risk bracket",
                    f"{bad} violations on {count} points"),
        CheckResult("closed-form risk matches quadrature", worst <= 1e-8, "truncated-moment formula",
                    f"max abs gap {worst:.2e}"),
    ]


def check_pinch():
    exact = gauss.pinch_bound(PINCH_T)
    as_float = gauss.pinch_bound(0.9)
    g_side = float(gauss.g_mills(0.9)) * (1 + 0.9**3)
    return [
        CheckResult("pinch-point envelope at t=9/10", exact == PINCH_VALUE and abs(as_float - float(PINCH_VALUE)) <= 1e-12,
                    "equals 145223897/400000000 at t = 9/10", f"exact={exact}, float={as_float!r}"),
        CheckResult("g(0.9)(1+0.9^3) >= pinch value", g_side >= float(PINCH_VALUE),
                    "envelope lower-bounds g(t)(1+t^3)", f"{g_side:.10f}"),
    ]


def check_constants():
    return [CheckResult(r.citation, bool(r.passed), "9/20000 constant chain",
                        f"lhs={r.detail['lhs']}, rhs={r.detail['rhs']}") for r in theory.constants_check()]


def check_t_sup():
    worst, count = 0.0, 0
    for p in (0.25, 0.5, 1.0):
        for d in range(1, 13):
            for R in (0.3, 1.0, 2.5):
                for zeta in np.logspace(-2, 1, 16):
                    a = theory.t_sup(zeta, p, R, d)
                    b = theory.t_sup_bruteforce(zeta, p, R, d)
                    worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
                    count += 1
    for d in range(1, 13):
        for s in range(1, d + 1):
            a = theory.t_sup(0.7, 0, s, d)
            worst = max(worst, abs(a - theory.t_sup_bruteforce(0.7, 0, s, d)) / a)
            count += 1
    return [CheckResult("T(zeta, Theta_p) closed form vs vertex enumeration", worst <= 1e-12,
                        "exact simplex supremum", f"max rel gap {worst:.2e} over {count} points")]


def random_diagonal_instance(rng, d_max=16):
    d = int(rng.integers(1, d_max + 1))
    n = d + int(rng.integers(0, 4))
    s = rng.uniform(0.1, 3.0, size=d)
    design = DiagonalDesign(n=n, d=d, s=s)
    theta = rng.normal(0.0, 1.5, size=d) * (rng.uniform(size=d) < 0.6)
    y = sample_observation(design, theta, float(rng.uniform(0.2, 3.0)) * math.sqrt(n), rng)
    return design, theta, y


def check_oracle_grid(instances=100, seed=12345, rtol=1e-9):
    rng = np.random.default_rng(seed)
    worst, above = 0.0, 0
    for _ in range(instances):
        design, theta, y = random_diagonal_instance(rng)
        exact = oracle_lasso(design, y, theta)
        _, refined, raw = oracles.oracle_lambda_grid(ols(design, y), design.s, theta)
        worst = max(worst, abs(exact.error - refined) / max(refined, 1e-15))
        if exact.error > raw * (1 + 1e-12) + 1e-15:
            above += 1
    return [CheckResult("oracle lambda vs 10^4-point grid search", worst <= rtol and above == 0,
                        "exact piecewise-quadratic infimum",
                        f"max rel gap {worst:.2e}, {above} exceed raw grid min, {instances} instances")]


def check_lasso_prox(instances=50, seed=2024, atol=1e-8):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        d = int(rng.integers(2, 11))
        n = d + int(rng.integers(0, 5))
        design = DiagonalDesign(n=n, d=d, s=rng.uniform(0.3, 2.0, size=d))
        theta = rng.normal(size=d) * (rng.uniform(size=d) < 0.5)
        y = sample_observation(design, theta, 1.0, rng)
        lam = float(np.exp(rng.uniform(np.log(0.01), np.log(1.0))))
        a = lasso_diagonal(design, y, lam)
        b = oracles.lasso_prox_grad(design.to_dense(), y, lam)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return [CheckResult("closed-form Lasso vs proximal gradient", worst <= atol,
                        "coordinate-wise soft thresholding", f"max abs gap {worst:.2e}, {instances} instances")]


def run_checks(grid_step=1e-3, fault=None):
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    results = []
    results += check_mills_bounds(grid_step)
    results += check_risk_at_zero(grid_step, fault=fault)
    results += check_johnstone()
    results += check_pinch()
    results += check_constants()
    results += check_t_sup()
    results += check_oracle_grid()
    results += check_lasso_prox()
    return results


def format_table(results):
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}  [{r.citation}]")
    return "\n".join(lines)
