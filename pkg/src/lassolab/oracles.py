"""Independent reference computations used by ``verify`` and the tests.

None of these share code paths with the production formulas: the risk is
integrated numerically, the oracle lambda is found by search over a grid of
black-box Lasso fits, and the Lasso itself by proximal gradient on the
materialized design.
"""

import math

import numpy as np
from scipy import integrate

_WINDOW = 40.0


def risk_quad(nu, tau, mu):
    """``E_{x ~ N(mu, nu^2)} (mu - S_tau(x))^2`` by adaptive quadrature."""
    def integrand(u):
        x = mu + nu * u
        est = math.copysign(max(abs(x) - tau, 0.0), x)
        return (mu - est) ** 2 * math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)

    cuts = sorted({-_WINDOW, _WINDOW, *[(c - mu) / nu for c in (-tau, tau) if abs((c - mu) / nu) < _WINDOW]})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-12, limit=200, points=[0.0] if a < 0 < b else None)
        total += val
    return total


def lasso_error_curve(z, s, theta, lams):
    """Squared error of the diagonal-design Lasso at each ``lam`` in ``lams``."""
    lams = np.asarray(lams, dtype=np.float64)[:, None]
    est = np.sign(z) * np.maximum(np.abs(z) - lams / s, 0.0)
    return np.sum((est - theta) ** 2, axis=1)


def _golden(f, lo, hi, rtol=1e-15):
    inv = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > rtol * b:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def oracle_lambda_grid(z, s, theta, points=10_000, refine=8):
    """Grid search (log-spaced) for ``inf_lam`` of the Lasso error, with local refinement.

    The ``refine`` lowest local minima of the grid are polished by
    golden-section search on their neighbouring cells, which converges at
    kinks where derivative-based or parabolic steps stall.  Returns
    ``(lam, err, raw_grid_min)``.
    """
    z = np.asarray(z, dtype=np.float64)
    scale = max(float(np.max(np.abs(z) * s)), 1e-300)
    grid = np.logspace(math.log10(scale) - 14, math.log10(scale) + 1, points)
    vals = lasso_error_curve(z, s, theta, grid)
    raw = float(vals.min())
    j = int(np.argmin(vals))
    best_lam, best = float(grid[j]), raw
    if not refine:
        return best_lam, best, raw
    f = lambda lam: float(lasso_error_curve(z, s, theta, [lam])[0])  # noqa: E731
    left = np.r_[True, vals[1:] <= vals[:-1]]
    right = np.r_[vals[:-1] <= vals[1:], True]
    local = np.flatnonzero(left & right)
    for i in local[np.argsort(vals[local], kind="stable")[:refine]]:
        lam, val = _golden(f, grid[max(i - 1, 0)], grid[min(i + 1, points - 1)])
        if val < best:
            best, best_lam = val, lam
    return best_lam, best, raw


def lasso_prox_grad(X, y, lam, tol=1e-15, max_iter=200_000):
    """Minimize ``(1/n)|X t - y|^2 + 2 lam |t|_1`` by ISTA."""
    n = X.shape[0]
    G = X.T @ X / n
    b = X.T @ y / n
    L = 2.0 * np.linalg.eigvalsh(G).max()
    t = np.zeros(X.shape[1])
    for _ in range(max_iter):
        step = t - (2.0 * (G @ t - b)) / L
        new = np.sign(step) * np.maximum(np.abs(step) - 2.0 * lam / L, 0.0)
        if np.max(np.abs(new - t)) <= tol * max(1.0, np.max(np.abs(new))):
            return new
        t = new
    return t
