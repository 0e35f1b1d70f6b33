"""Closed-form rates, risk bounds and adversarial instances.

All logarithms are natural.  Regime violations are reported through
``BoundReport.regime_ok`` together with a ``RegimeWarning``; only inputs that
make a formula undefined raise.
"""

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from lassolab import gauss
from lassolab.designs import make_alpha_instance

LASSO_LOWER_CONST = Fraction(9, 20000)

# Explicit sequence-model constants, transferred to regression through the
# reduction (minimax rates coincide with noise level sqrt(sigma^2 B / n)).
WEAK_SPARSE_CONSTANTS = (Fraction(7, 2000), Fraction(1203))
HARD_SPARSE_CONSTANTS = (Fraction(3, 500), Fraction(2))


class RegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ProblemParams:
    """Problem tuple ``(p, n, d, sigma, B)`` plus ``R`` (p > 0) or ``s`` (p = 0)."""

    p: float
    n: int
    d: int
    sigma: float = 1.0
    B: float = 1.0
    R: float = None
    s: int = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.d < 1 or self.n < self.d:
            raise ValueError(f"need n >= d >= 1, got n={self.n}, d={self.d}")
        if self.sigma <= 0 or self.B <= 0:
            raise ValueError("sigma and B must be > 0")
        if self.p == 0:
            if self.s is None or int(self.s) != self.s or not 1 <= self.s <= self.d:
                raise ValueError(f"p = 0 needs an integer sparsity s in [1, d], got {self.s}")
        elif self.R is None or self.R <= 0:
            raise ValueError("p > 0 needs a radius R > 0")

    @property
    def noise_sq(self):
        """Sequence-model noise variance ``sigma^2 B / n``."""
        return self.sigma**2 * self.B / self.n

    @property
    def tau_sq(self):
        """Inverse signal-to-noise ratio ``sigma^2 B / (R^2 n)`` (p > 0 only)."""
        if self.p == 0:
            raise ValueError("tau_n^2 is defined for p > 0")
        return self.noise_sq / self.R**2

    @property
    def R_or_s(self):
        return self.s if self.p == 0 else self.R

    def regime_ok(self):
        """Moderate-sample-size regime ``tau^2 in [d^{-2/p}, 1/log(e d)]``; always true for p = 0."""
        if self.p == 0:
            return True
        t2 = self.tau_sq
        return self.d ** (-2.0 / self.p) <= t2 <= 1.0 / math.log(math.e * self.d)

    def lower_bound_regime_ok(self):
        """Sample-size condition ``n <= (sigma^2 B / R^2) d^2`` used by the Lasso lower bound."""
        if self.p == 0:
            return True
        return self.n <= self.sigma**2 * self.B / self.R**2 * self.d**2

    def replace(self, **changes):
        kw = {f: getattr(self, f) for f in ("p", "n", "d", "sigma", "B", "R", "s")}
        kw.update(changes)
        return ProblemParams(**kw)


@dataclass(frozen=True)
class BoundReport:
    value: float
    regime_ok: bool
    citation: str
    detail: dict = field(default_factory=dict)
    passed: bool = None

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("bound value must be >= 0")


def _check_regime(params, what):
    ok = params.regime_ok()
    if not ok:
        warnings.warn(
            f"{what}: parameters outside the moderate regime tau^2 in [d^(-2/p), 1/log(ed)]",
            RegimeWarning,
            stacklevel=3,
        )
    return ok


def rate_core(params):
    """Constant-free minimax rate.

    ``R^2 (tau^2 log(e d tau^p))^{1 - p/2}`` for p > 0 and
    ``(sigma^2 B / n) s log(e d / s)`` for p = 0.
    """
    if params.p == 0:
        return params.noise_sq * params.s * math.log(math.e * params.d / params.s)
    t2 = params.tau_sq
    arg = math.e * params.d * t2 ** (params.p / 2)
    if arg <= 1.0:
        raise ValueError("log(e d tau^p) is not positive; rate undefined")
    return params.R**2 * (t2 * math.log(arg)) ** (1 - params.p / 2)


def minimax_rate(params):
    ok = _check_regime(params, "minimax_rate")
    core = rate_core(params)
    lo, hi = HARD_SPARSE_CONSTANTS if params.p == 0 else WEAK_SPARSE_CONSTANTS
    return BoundReport(
        value=core,
        regime_ok=ok,
        citation="minimax rate over X_{n,d}(B) (weak sparsity p>0 / hard sparsity p=0)",
        detail={"lower_const": float(lo), "upper_const": float(hi),
                "lower": float(lo) * core, "upper": float(hi) * core},
    )


def stols_risk_bound(params):
    """Worst-case STOLS risk guarantee, ``6 x rate_core``."""
    ok = _check_regime(params, "stols_risk_bound")
    core = rate_core(params)
    return BoundReport(value=6.0 * core, regime_ok=ok,
                       citation="STOLS uniform risk bound over X_{n,d}(B)",
                       detail={"core": core, "factor": 6})


# ---------------------------------------------------------------------------
# T(zeta, Theta_p) = sup_{theta in Theta_p} sum_i min(theta_i^2, zeta^2)
# ---------------------------------------------------------------------------


def t_sup(zeta, p, R_or_s, d):
    """Exact supremum of ``sum_i min(theta_i^2, zeta^2)`` over the l_p ball / s-sparse set."""
    if zeta < 0:
        raise ValueError("zeta must be >= 0")
    if p == 0:
        s = R_or_s
        if int(s) != s or not 1 <= s <= d:
            raise ValueError(f"sparsity must be an integer in [1, d], got {s}")
        return zeta * zeta * s
    R = float(R_or_s)
    if R <= zeta:
        return R * R
    if R >= zeta * d ** (1.0 / p):
        return zeta * zeta * d
    eps = (zeta / R) ** 2
    x = eps ** (-p / 2)
    m = math.floor(x)
    return eps * R * R * (m + (x - m) ** (2.0 / p))


def t_sup_bruteforce(zeta, p, R_or_s, d):
    """Vertex enumeration oracle for :func:`t_sup`.

    In the variables ``u_i = |theta_i|^p`` the objective is a sum of convex
    functions ``min(u^{2/p}, zeta^2)`` restricted to ``u_i <= zeta^p`` (larger
    values are wasted mass), over the polytope ``sum u_i <= R^p``.  A convex
    function peaks at a vertex: ``m`` coordinates at the cap, at most one
    fractional coordinate, zeros elsewhere.  All such vertices, and the
    equal-mass points ``u_i = R^p / m``, are evaluated directly.
    """
    if p == 0:
        s = int(R_or_s)
        if not 1 <= s <= d:
            raise ValueError("sparsity must lie in [1, d]")
        best = 0.0
        for m in range(s + 1):
            theta = np.zeros(d)
            theta[:m] = 2.0 * zeta + 1.0
            best = max(best, float(np.sum(np.minimum(theta**2, zeta**2))))
        return best
    R = float(R_or_s)
    mass = R**p
    cap = zeta**p
    candidates = []
    for m in range(d + 1):
        used = m * cap
        if used > mass * (1 + 1e-15) and m > 0:
            break
        u = np.zeros(d)
        u[:m] = cap
        rest = max(mass - used, 0.0)
        if m < d:
            u[m] = min(rest, cap)
        candidates.append(u)
    for m in range(1, d + 1):
        u = np.zeros(d)
        u[:m] = mass / m
        candidates.append(u)
    best = 0.0
    for u in candidates:
        theta = u ** (1.0 / p)
        if np.sum(np.abs(theta) ** p) > mass * (1 + 1e-12):
            continue
        best = max(best, float(np.sum(np.minimum(theta**2, zeta**2))))
    return best


def rho_n(theta, eta, sigma, B, n):
    """Three-term STOLS risk bound ``rho_n(theta, eta)``."""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    theta = np.asarray(theta, dtype=np.float64)
    nu2 = sigma**2 * B / n
    d = theta.shape[0]
    th2 = theta * theta
    first = d * nu2 * math.exp(-0.5 * eta * eta / nu2)
    return float(first + np.sum(np.minimum(th2, nu2)) + np.sum(np.minimum(th2, eta * eta)))


def lasso_risk_lower_diag(design, theta, sigma, tau):
    """Lower bound on the fixed-lambda Lasso risk, ``lam = tau sqrt(sigma^2 / n)``, diagonal design."""
    if tau <= 0:
        raise ValueError("tau must be > 0")
    theta = np.asarray(theta, dtype=np.float64)
    s = design.s
    v = sigma**2 / (design.n * s)
    tail = v * np.exp(-tau * tau / (2 * s)) / ((tau / np.sqrt(s)) ** 3 + 1)
    bias = np.minimum(theta * theta, v * (1 + tau * tau / s))
    return float((np.sum(tail) + np.sum(bias)) / 16)


def lasso_lower_bound(params, alpha):
    """Lower bound on the oracle-lambda Lasso risk over the X_alpha family."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if params.d < 2:
        raise ValueError("need d >= 2")
    ns = params.noise_sq
    terms = [ns * params.d / alpha]
    if params.p == 0:
        terms.append(ns * params.s * alpha)
    else:
        R2 = params.R**2
        terms.append(R2 * (params.tau_sq * alpha) ** (1 - params.p / 2))
        terms.append(R2)
    m = min(terms)
    return BoundReport(
        value=float(LASSO_LOWER_CONST) * m,
        regime_ok=params.lower_bound_regime_ok(),
        citation="oracle-Lasso lower bound on X_alpha, constant 9/20000",
        detail={"constant": LASSO_LOWER_CONST, "min_term": m, "terms": terms},
    )


def alpha_star(params):
    """Condition number maximizing the Lasso lower bound, clipped to ``>= 1``."""
    if params.p == 0:
        a = math.sqrt(params.d / params.s)
    else:
        p = params.p
        a = (params.tau_sq * params.d ** (2.0 / p)) ** (p / (4.0 - p))
    return max(1.0, a)


def worst_theta(params, alpha, k=None):
    """Hard parameter for the Lasso on ``X_alpha``, supported on coordinates ``k..``.

    Uses 0-based indexing: the support starts at index ``k`` (coordinate
    ``k + 1`` in 1-based terms).
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    d = params.d
    k = d // 2 if k is None else k
    if k != d // 2:
        raise ValueError("k must equal floor(d/2)")
    theta = np.zeros(d)
    if params.p == 0:
        sp = min(params.s, k)
        theta[k : k + sp] = 2.0 * math.sqrt(params.noise_sq * alpha)
        if np.count_nonzero(theta) > params.s:
            raise ValueError("sparsity constraint violated")
        return theta
    t2 = params.tau_sq
    R = params.R
    if 4 * t2 * alpha <= 1:
        delta = 2 * math.sqrt(t2 * alpha)
        ell = min(k, math.floor(delta ** (-params.p)))
        theta[k : k + ell] = R * delta
    else:
        theta[k] = R
    norm = float(np.sum(np.abs(theta) ** params.p) ** (1 / params.p))
    if norm > R * (1 + 1e-12):
        raise ValueError(f"l_p constraint violated: {norm} > {R}")
    return theta


def constants_check():
    """Verify the numeric chain behind the 9/20000 constant, one report per link."""
    p_tail = float(2 * gauss.normal_cdf(-1.5))
    gauss_lb = 10 / 27 * math.exp(-9 / 8)
    c = Fraction(3, 25) ** 2 / 32
    reports = [
        BoundReport(p_tail, True, "P(|N(0,1)| >= 3/2) >= (10/27) e^{-9/8}",
                    {"lhs": p_tail, "rhs": gauss_lb}, passed=p_tail >= gauss_lb),
        BoundReport(gauss_lb, True, "(10/27) e^{-9/8} >= 3/25",
                    {"lhs": gauss_lb, "rhs": 3 / 25}, passed=gauss_lb >= 3 / 25),
        BoundReport(float(c), True, "(3/25)^2 / 32 = 9/20000 (exact)",
                    {"lhs": c, "rhs": LASSO_LOWER_CONST}, passed=c == LASSO_LOWER_CONST),
        BoundReport(p_tail**2 / 32, True, "p^2 / 32 >= 9/20000",
                    {"lhs": p_tail**2 / 32, "rhs": float(LASSO_LOWER_CONST)},
                    passed=p_tail**2 / 32 >= float(LASSO_LOWER_CONST)),
    ]
    return reports


def data_dependent_instance(params):
    """Instance with ``alpha = n R^2 / (sigma^2 B)`` and ``theta = R e_{k+1}``."""
    if params.p == 0:
        raise ValueError("needs a radius R (p > 0)")
    alpha = params.n * params.R**2 / (params.sigma**2 * params.B)
    if alpha < 1:
        raise ValueError(f"alpha = n R^2 / (sigma^2 B) = {alpha} < 1")
    inst = make_alpha_instance(params.n, params.d, params.B, alpha)
    theta = np.zeros(params.d)
    theta[inst.k] = params.R
    return inst, theta
