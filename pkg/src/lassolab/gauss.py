"""Gaussian special functions and the exact risk of soft thresholding.

The soft-threshold risk ``r(lam, mu) = E[(mu - S_lam(x))^2]`` for
``x ~ N(mu, 1)`` is evaluated in closed form from truncated Gaussian moments;
no quadrature is involved.  Functions accept scalars or numpy arrays unless
stated otherwise and return numpy floats/arrays.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from lassolab import _kernels

SQRT_2PI = math.sqrt(2.0 * math.pi)
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

# Mills ratio: direct ratio below, continued fraction above.
MILLS_SWITCH = 8.0
# g(t) cancels in the direct form long before M(t) does.
G_SWITCH = 2.5
_CF_DEPTH = 80


def normal_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5 * x * x) / SQRT_2PI


def normal_cdf(x):
    """Standard normal cdf via ``erfc``, accurate in both tails."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * special.erfc(-x / math.sqrt(2.0))


def _as_nonnegative(t, name="t"):
    t = np.asarray(t, dtype=np.float64)
    if np.any(np.isnan(t)) or np.any(t < 0):
        raise ValueError(f"{name} must be >= 0")
    return np.atleast_1d(t), t.shape


def _restore(out, shape):
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def _cf_tail(t):
    """Backward continued-fraction evaluation for large ``t``.

    Returns ``(v1, v2, v3)`` with ``v_k = t + k / v_{k+1}`` so that
    ``M(t) = 1 / v1`` and ``g(t) = 2 / (v1 v2 v3)``.
    """
    v = t.copy()
    v3 = v2 = v
    for k in range(_CF_DEPTH, 0, -1):
        v = t + k / v
        if k == 3:
            v3 = v
        elif k == 2:
            v2 = v
    return v, v2, v3


def mills_ratio(t):
    """Mills ratio ``M(t) = Phi(-t) / phi(t)`` for ``t >= 0``.

    Relative error is below 1e-12 on the whole half line.  For ``t > 8`` a
    continued fraction is used so that nothing underflows.
    """
    t, shape = _as_nonnegative(t)
    out = np.empty_like(t)
    small = t <= MILLS_SWITCH
    ts = t[small]
    out[small] = 0.5 * special.erfc(ts / math.sqrt(2.0)) * SQRT_2PI * np.exp(0.5 * ts * ts)
    if np.any(~small):
        v1, _, _ = _cf_tail(t[~small])
        out[~small] = 1.0 / v1
    return _restore(out, shape)


def g_mills(t):
    """``g(t) = M(t)(1 + t^2) - t``, evaluated without cancellation for large t."""
    t, shape = _as_nonnegative(t)
    out = np.empty_like(t)
    small = t <= G_SWITCH
    ts = t[small]
    m = 0.5 * special.erfc(ts / math.sqrt(2.0)) * SQRT_2PI * np.exp(0.5 * ts * ts)
    out[small] = m * (1.0 + ts * ts) - ts
    if np.any(~small):
        v1, v2, v3 = _cf_tail(t[~small])
        out[~small] = 2.0 / (v1 * v2 * v3)
    return _restore(out, shape)


def risk_at_zero(t):
    """``r(t, 0)`` through the Mills-ratio decomposition."""
    t = np.asarray(t, dtype=np.float64)
    return SQRT_2_OVER_PI * np.exp(-0.5 * t * t) * g_mills(t)


def soft_threshold(eta, v):
    """``sign(v) * max(|v| - eta, 0)``, elementwise."""
    if np.any(np.asarray(eta) < 0):
        raise ValueError("threshold must be >= 0")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - eta, 0.0)


def risk_soft(lam, mu):
    """Risk of soft thresholding ``N(mu, 1)`` at level ``lam``."""
    if np.any(np.asarray(lam) < 0):
        raise ValueError("lam must be >= 0")
    out = _kernels.risk_soft_flat(lam, mu)
    out = np.asarray(out)
    return out[()] if out.ndim == 0 else out


def risk_soft_scaled(nu, tau, mu):
    """Risk of soft thresholding ``N(mu, nu^2)`` at level ``tau``."""
    nu = np.asarray(nu, dtype=np.float64)
    if np.any(nu <= 0):
        raise ValueError("nu must be > 0")
    return nu * nu * risk_soft(np.asarray(tau) / nu, np.asarray(mu) / nu)


# ---------------------------------------------------------------------------
# Polynomial / rational bounds on the Mills ratio and on g(t)(1 + t^3).
# Written with plain arithmetic so ``fractions.Fraction`` inputs stay exact.
# ---------------------------------------------------------------------------


def mills_lower_poly(t):
    """Cubic lower bound ``5/4 - t + 5 t^2 / 8 - t^3 / 3`` on ``M(t)``."""
    return (30 - 24 * t + 15 * t**2 - 8 * t**3) / 24


def mills_lower_rational(t):
    """Rational lower bound ``t (t^2 + 5) / (t^4 + 6 t^2 + 3)`` on ``M(t)``."""
    return t * (t**2 + 5) / (t**4 + 6 * t**2 + 3)


def small_t_envelope(t):
    """Lower bound on ``g(t)(1 + t^3)`` from the cubic Mills bound (t in [0, 1])."""
    poly = (
        -8 * t**8 + 15 * t**7 - 32 * t**6 + 37 * t**5 - 33 * t**4
        - 2 * t**3 + 45 * t**2 - 48 * t + 30
    )
    return poly / 24


def large_t_envelope(t):
    """Lower bound on ``g(t)(1 + t^3)`` from the rational Mills bound."""
    return 2 * (t + t**4) / (3 + 6 * t**2 + t**4)


def pinch_bound(t):
    """``min`` of the two envelopes; a lower bound on ``inf_s g(s)(1 + s^3)``."""
    a, b = small_t_envelope(t), large_t_envelope(t)
    return a if a <= b else b


@dataclass(frozen=True)
class RiskEnvelope:
    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper:
            raise ValueError(f"invalid envelope [{self.lower}, {self.upper}]")

    def contains(self, value, slack=0.0):
        return self.lower - slack <= value <= self.upper + slack


def johnstone_envelope(nu, tau, mu):
    """Two-sided bracket on the scaled soft-threshold risk.

    ``upper = min(nu^2 r(tau/nu, 0) + mu^2, nu^2 + tau^2)`` and
    ``lower = upper / 2``.
    """
    if nu <= 0:
        raise ValueError("nu must be > 0")
    at_zero = nu * nu * float(risk_at_zero(tau / nu))
    upper = min(at_zero + mu * mu, nu * nu + tau * tau)
    return RiskEnvelope(lower=0.5 * upper, upper=upper)
