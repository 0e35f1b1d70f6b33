"""Hot numeric kernels, each with a numpy path and an optional numba path.

The module-level names without a suffix (``risk_soft_flat``,
``oracle_scan_batch``) are bound to the numba implementation when
``lassolab._accel.USE_NUMBA`` is true and to the numpy one otherwise.
"""

import math

import numpy as np
from scipy import special

from lassolab import _accel

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Soft-threshold risk r(lam, mu) for a unit-variance Gaussian.
#
# With x = mu + Z, |mu| taken wlog, a = lam - mu and b = lam + mu, the error
# (S_lam(x) - mu)^2 is (Z - lam)^2 on {Z > a}, (Z + lam)^2 on {Z < -b} and
# mu^2 in between.  Each piece is a truncated Gaussian moment:
#   right = q Phi(-a) - b phi(a),  left = q Phi(-b) - a phi(b),  q = 1 + lam^2.
# For a tail point t > TAIL_SWITCH the two products cancel, so the term is
# rewritten as phi(t) (g(t) + 2 c h(t) + c^2 M(t)) with c = -mu (right) or
# +mu (left), h(t) = 1 - t M(t), and M, h, g read off one backward continued
# fraction v_k = t + k / v_{k+1}:  M = 1/v1, h = 1/(v1 v2), g = 2/(v1 v2 v3).
# ---------------------------------------------------------------------------

TAIL_SWITCH = 2.5
CF_DEPTH = 80


def _cf_numpy(t):
    v = t.copy()
    v2 = v3 = v
    for k in range(CF_DEPTH, 0, -1):
        v = t + k / v
        if k == 3:
            v3 = v
        elif k == 2:
            v2 = v
    return v, v2, v3


def _tail_numpy(t, c, q, other):
    out = q * 0.5 * special.erfc(t / _SQRT2) - other * _INV_SQRT_2PI * np.exp(-0.5 * t * t)
    far = t > TAIL_SWITCH
    if np.any(far):
        tf, cf = t[far], c[far]
        v1, v2, v3 = _cf_numpy(tf)
        inner = 2.0 / (v1 * v2 * v3) + 2.0 * cf / (v1 * v2) + cf * cf / v1
        out[far] = _INV_SQRT_2PI * np.exp(-0.5 * tf * tf) * inner
    return out


def risk_soft_flat_numpy(lam, mu):
    lam, mu = np.broadcast_arrays(np.asarray(lam, dtype=np.float64), np.abs(np.asarray(mu, dtype=np.float64)))
    shape = lam.shape
    lam = lam.ravel()
    mu = mu.ravel()
    a = lam - mu
    b = lam + mu
    q = 1.0 + lam * lam
    lower_a = 0.5 * special.erfc(-a / _SQRT2)
    upper_b = 0.5 * special.erfc(b / _SQRT2)
    right = _tail_numpy(a, -mu, q, b)
    left = _tail_numpy(b, mu, q, a)
    return (right + left + mu * mu * (lower_a - upper_b)).reshape(shape)


def _tail_scalar(t, c, q, other):
    if t > TAIL_SWITCH:
        v = t
        v2 = t
        v3 = t
        # Depth needed for full double precision shrinks like 1/t.
        for k in range(min(CF_DEPTH, 8 + int(180.0 / t)), 0, -1):
            v = t + k / v
            if k == 3:
                v3 = v
            elif k == 2:
                v2 = v
        inner = 2.0 / (v * v2 * v3) + 2.0 * c / (v * v2) + c * c / v
        return _INV_SQRT_2PI * math.exp(-0.5 * t * t) * inner
    return q * 0.5 * math.erfc(t / _SQRT2) - other * _INV_SQRT_2PI * math.exp(-0.5 * t * t)


_tail_scalar_jit = _accel.njit(_tail_scalar)
_tail = _tail_scalar if _tail_scalar_jit is None else _tail_scalar_jit


def _risk_soft_loop(lam, mu, out):
    for i in range(lam.shape[0]):
        m = abs(mu[i])
        lm = lam[i]
        a = lm - m
        b = lm + m
        q = 1.0 + lm * lm
        lower_a = 0.5 * math.erfc(-a / _SQRT2)
        upper_b = 0.5 * math.erfc(b / _SQRT2)
        out[i] = _tail(a, -m, q, b) + _tail(b, m, q, a) + m * m * (lower_a - upper_b)
    return out


_risk_soft_loop_jit = _accel.njit(_risk_soft_loop)


def risk_soft_flat_numba(lam, mu):
    if _risk_soft_loop_jit is None:
        raise RuntimeError("numba backend is not available")
    lam, mu = np.broadcast_arrays(np.asarray(lam, dtype=np.float64), np.asarray(mu, dtype=np.float64))
    shape = lam.shape
    lam = np.ascontiguousarray(lam).ravel()
    mu = np.ascontiguousarray(mu).ravel()
    out = np.empty_like(lam)
    _risk_soft_loop_jit(lam, mu, out)
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Exact oracle-lambda scan for the Lasso on a diagonal design.
#
# Coordinate i is soft thresholded at lam / s_i, so it is active (nonzero)
# while lam < s_i |z_i|.  Between consecutive sorted breakpoints the squared
# error is a quadratic A lam^2 + Bq lam + C whose coefficients are suffix sums
# over the active coordinates plus a prefix sum of theta_i^2 over the
# inactive ones.  The error is re-evaluated directly at the chosen lambda so
# the reported value carries no cancellation from the quadratic form.
# ---------------------------------------------------------------------------


def _direct_error(z, s, theta, lam):
    est = np.sign(z) * np.maximum(np.abs(z) - lam / s, 0.0)
    return np.sum((est - theta) ** 2, axis=-1)


def oracle_scan_batch_numpy(Z, s, theta):
    """Return ``(lam_star, err)`` arrays for each row of ``Z``."""
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    s = np.asarray(s, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    m, d = Z.shape
    bp = s * np.abs(Z)
    order = np.argsort(bp, axis=1, kind="stable")
    bps = np.take_along_axis(bp, order, axis=1)
    c = np.take_along_axis(np.sign(Z) / s, order, axis=1)
    e = np.take_along_axis(Z - theta, order, axis=1)
    th2 = np.take_along_axis(np.broadcast_to(theta * theta, Z.shape), order, axis=1)

    def suffix(x):
        out = np.zeros((m, d + 1))
        out[:, :d] = np.cumsum(x[:, ::-1], axis=1)[:, ::-1]
        return out

    A = suffix(c * c)
    Bq = -2.0 * suffix(e * c)
    C = suffix(e * e)
    C[:, 1:] += np.cumsum(th2, axis=1)
    lo = np.concatenate([np.zeros((m, 1)), bps], axis=1)
    hi = np.concatenate([bps, np.full((m, 1), np.inf)], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = np.where(A > 0.0, -Bq / (2.0 * A), lo)
    lam = np.clip(vertex, lo, hi)
    lam[:, d] = lo[:, d]
    val = A * lam * lam + Bq * lam + C
    j = np.argmin(val, axis=1)
    lam_star = lam[np.arange(m), j]
    err = _direct_error(Z, s, theta, lam_star[:, None])
    return lam_star, err


def _oracle_scan_loop(Z, s, theta, lam_out, err_out):
    m, d = Z.shape
    bp = np.empty(d)
    A = np.empty(d + 1)
    Bq = np.empty(d + 1)
    C = np.empty(d + 1)
    for r in range(m):
        for i in range(d):
            bp[i] = s[i] * abs(Z[r, i])
        order = np.argsort(bp, kind="mergesort")
        A[d] = 0.0
        Bq[d] = 0.0
        C[d] = 0.0
        for q in range(d - 1, -1, -1):
            i = order[q]
            ci = np.sign(Z[r, i]) / s[i]
            ei = Z[r, i] - theta[i]
            A[q] = A[q + 1] + ci * ci
            Bq[q] = Bq[q + 1] - 2.0 * ei * ci
            C[q] = C[q + 1] + ei * ei
        acc = 0.0
        best = np.inf
        best_lam = 0.0
        for q in range(d + 1):
            if q > 0:
                acc += theta[order[q - 1]] ** 2
                lo = bp[order[q - 1]]
            else:
                lo = 0.0
            hi = bp[order[q]] if q < d else np.inf
            if A[q] > 0.0 and q < d:
                lam = -Bq[q] / (2.0 * A[q])
                if lam < lo:
                    lam = lo
                elif lam > hi:
                    lam = hi
            else:
                lam = lo
            val = A[q] * lam * lam + Bq[q] * lam + C[q] + acc
            if val < best:
                best = val
                best_lam = lam
        total = 0.0
        for i in range(d):
            zi = Z[r, i]
            mag = abs(zi) - best_lam / s[i]
            est = np.sign(zi) * mag if mag > 0.0 else 0.0
            total += (est - theta[i]) ** 2
        lam_out[r] = best_lam
        err_out[r] = total
    return lam_out, err_out


_oracle_scan_loop_jit = _accel.njit(_oracle_scan_loop)


def oracle_scan_batch_numba(Z, s, theta):
    if _oracle_scan_loop_jit is None:
        raise RuntimeError("numba backend is not available")
    Z = np.ascontiguousarray(np.atleast_2d(np.asarray(Z, dtype=np.float64)))
    s = np.ascontiguousarray(s, dtype=np.float64)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    m = Z.shape[0]
    lam_out = np.empty(m)
    err_out = np.empty(m)
    _oracle_scan_loop_jit(Z, s, theta, lam_out, err_out)
    return lam_out, err_out


if _accel.USE_NUMBA:
    risk_soft_flat = risk_soft_flat_numba
    oracle_scan_batch = oracle_scan_batch_numba
else:
    risk_soft_flat = risk_soft_flat_numpy
    oracle_scan_batch = oracle_scan_batch_numpy
