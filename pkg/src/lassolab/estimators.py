"""Estimators: OLS, Lasso on diagonal designs, oracle-lambda Lasso, STOLS and
the sequence-model lift.

Every function taking ``y`` accepts either one response (length ``n``) or a
stack of responses with shape ``(m, n)``; estimates come back with the
matching leading shape.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from lassolab import _kernels
from lassolab.designs import DenseDesign, DiagonalDesign, min_certified_B
from lassolab.gauss import soft_threshold
from lassolab.theory import RegimeWarning

W_EIG_TOL = 1e-10


def ols(design, y):
    """Least squares; coordinate-wise ``y_i / sqrt(n s_i)`` on diagonal designs."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != design.n:
        raise ValueError(f"y must have trailing length n={design.n}")
    if isinstance(design, DiagonalDesign):
        return y[..., : design.d] / design.diagonal
    if isinstance(design, DenseDesign):
        return design.solve_ls(y)
    raise TypeError(f"unsupported design type {type(design).__name__}")


def _require_diagonal(design):
    if not isinstance(design, DiagonalDesign):
        raise TypeError("only diagonal designs are supported here")


def lasso_diagonal(design, y, lam):
    """Exact Lasso ``argmin (1/n)|X t - y|^2 + 2 lam |t|_1`` on a diagonal design."""
    _require_diagonal(design)
    if not lam > 0:
        raise ValueError("lam must be > 0")
    return soft_threshold(lam / design.s, ols(design, y))


@dataclass(frozen=True)
class OracleResult:
    lambda_star: float
    error: float


def oracle_lasso(design, y, theta_star):
    """Infimum over ``lam > 0`` of the Lasso squared error against ``theta_star``.

    ``lambda_star == 0`` encodes the open limit ``lam -> 0+`` (the OLS error).
    For a stack of responses, arrays of ``lambda_star`` and ``error`` are
    returned inside the result.
    """
    _require_diagonal(design)
    z = ols(design, y)
    lam, err = _kernels.oracle_scan_batch(np.atleast_2d(z), design.s, theta_star)
    if z.ndim == 1:
        return OracleResult(float(lam[0]), float(err[0]))
    return OracleResult(lam, err)


def stols(design, y, eta):
    """Soft-thresholded OLS."""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return soft_threshold(eta, ols(design, y))


def stols_eta(params, B=None):
    """Threshold of the STOLS guarantee; ``B`` overrides ``params.B``."""
    if B is not None:
        params = params.replace(B=B)
    if params.p == 0:
        return math.sqrt(2 * params.noise_sq * math.log(math.e * params.d / params.s))
    if not params.regime_ok():
        warnings.warn("stols_eta: parameters outside the moderate regime", RegimeWarning, stacklevel=2)
    t2 = params.tau_sq
    arg = math.e * params.d * t2 ** (params.p / 2)
    if arg <= 1:
        raise ValueError("log(e d tau^p) is not positive")
    return math.sqrt(2 * params.R**2 * t2 * math.log(arg))


def stols_eta_adaptive(params, design):
    """STOLS threshold with ``B`` replaced by the design's certified level."""
    return stols_eta(params, B=min_certified_B(design))


def noising_covariance(design, sigma, B):
    """``W = (sigma^2 B / n) I - sigma^2 (X^T X)^{-1}``; diagonal designs give a vector."""
    scale = sigma**2 * B / design.n
    if isinstance(design, DiagonalDesign):
        return scale - sigma**2 / (design.n * design.s)
    r = design._r
    rinv = np.linalg.solve(r, np.eye(design.d))
    return scale * np.eye(design.d) - sigma**2 * (rinv @ rinv.T)


def noising_root(design, sigma, B):
    """Symmetric square root of ``W``; raises if ``W`` is indefinite beyond tolerance."""
    W = noising_covariance(design, sigma, B)
    tol = W_EIG_TOL * max(1.0, sigma**2 * B / design.n)
    if W.ndim == 1:
        if np.any(W < -tol):
            raise ValueError(f"W is not PSD (min entry {W.min():.3e}); design is outside X(B)")
        return np.sqrt(np.where(np.abs(W) <= tol, 0.0, W))
    w, v = np.linalg.eigh(W)
    if w.min() < -tol:
        raise ValueError(f"W is not PSD (min eigenvalue {w.min():.3e}); design is outside X(B)")
    w = np.where(np.abs(w) <= tol, 0.0, w)
    return (v * np.sqrt(w)) @ v.T


def lift_sequence_estimator(inner, design, y, sigma, B, draws, rng, root=None):
    """Monte Carlo version of ``E_xi[inner(OLS + xi)]``, ``xi ~ N(0, W)``.

    ``inner`` must map a ``(draws, d)`` array row-wise to an array of the
    same shape.  ``root`` may carry a precomputed :func:`noising_root`.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("lift_sequence_estimator takes a single response")
    L = noising_root(design, sigma, B) if root is None else root
    z = ols(design, y)
    g = rng.standard_normal((draws, design.d))
    xi = g * L if L.ndim == 1 else g @ L
    out = np.asarray(inner(z + xi))
    if out.shape != xi.shape:
        raise ValueError("inner must map (draws, d) -> (draws, d)")
    return out.mean(axis=0)


# ---------------------------------------------------------------------------
# Estimator specifications, parsed from strings such as "lasso:0.3".
# ---------------------------------------------------------------------------

KINDS = ("ols", "lasso", "lasso-oracle", "stols", "stols-auto", "stols-auto-adaptive", "lifted")


@dataclass(frozen=True)
class EstimatorSpec:
    kind: str
    value: float = None
    draws: int = None
    label: str = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.kind == "lasso" and not (self.value is not None and self.value > 0):
            raise ValueError("fixed Lasso needs lambda > 0")
        if self.kind == "stols" and not (self.value is not None and self.value >= 0):
            raise ValueError("STOLS needs eta >= 0")
        if self.kind == "lifted" and not (self.draws is not None and self.draws >= 1):
            raise ValueError("lifted estimator needs draws >= 1")
        if self.label is None:
            object.__setattr__(self, "label", self.to_string())

    @classmethod
    def parse(cls, text):
        """Parse ``ols``, ``lasso:<lam>``, ``lasso:oracle``, ``stols:auto``,
        ``stols:auto-adaptive``, ``stols:<eta>`` or ``lifted:soft:<draws>[:<eta>]``."""
        parts = text.strip().lower().split(":")
        head, rest = parts[0], parts[1:]
        try:
            if head == "ols" and not rest:
                return cls("ols")
            if head == "lasso" and len(rest) == 1:
                if rest[0] == "oracle":
                    return cls("lasso-oracle")
                return cls("lasso", value=float(rest[0]))
            if head == "stols" and len(rest) == 1:
                if rest[0] == "auto":
                    return cls("stols-auto")
                if rest[0] == "auto-adaptive":
                    return cls("stols-auto-adaptive")
                return cls("stols", value=float(rest[0]))
            if head == "lifted" and len(rest) in (2, 3) and rest[0] == "soft":
                eta = float(rest[2]) if len(rest) == 3 else None
                return cls("lifted", value=eta, draws=int(rest[1]))
        except ValueError as exc:
            raise ValueError(f"bad estimator spec {text!r}: {exc}") from None
        raise ValueError(f"bad estimator spec {text!r}")

    def to_string(self):
        if self.kind == "ols":
            return "ols"
        if self.kind == "lasso":
            return f"lasso:{self.value:g}"
        if self.kind == "lasso-oracle":
            return "lasso:oracle"
        if self.kind == "stols":
            return f"stols:{self.value:g}"
        if self.kind == "stols-auto":
            return "stols:auto"
        if self.kind == "stols-auto-adaptive":
            return "stols:auto-adaptive"
        tail = f":{self.value:g}" if self.value is not None else ""
        return f"lifted:soft:{self.draws}{tail}"

    def threshold(self, params, design):
        """Resolve the soft-threshold level for STOLS-type kinds."""
        if self.kind == "stols" or (self.kind == "lifted" and self.value is not None):
            return self.value
        if self.kind not in ("stols-auto", "stols-auto-adaptive", "lifted"):
            raise ValueError(f"{self.label} has no threshold")
        if params is None:
            raise ValueError(f"{self.label} needs problem parameters")
        if self.kind == "stols-auto-adaptive":
            return stols_eta_adaptive(params, design)
        return stols_eta(params)

    def check_compatible(self, design):
        if self.kind in ("lasso", "lasso-oracle") and not isinstance(design, DiagonalDesign):
            raise TypeError(f"{self.label} requires a diagonal design")


def squared_errors(spec, design, Y, theta_star, *, params=None, sigma=1.0, B=None, rngs=None, cache=None):
    """Per-response squared l2 errors of ``spec`` on the stack ``Y`` (m, n).

    ``rngs`` supplies one generator per response and is only consumed by the
    lifted estimator.  ``cache`` is an optional dict reused across calls for
    design-level precomputation.
    """
    spec.check_compatible(design)
    Y = np.atleast_2d(Y)
    theta_star = np.asarray(theta_star, dtype=np.float64)
    cache = {} if cache is None else cache
    if spec.kind == "lasso-oracle":
        return _kernels.oracle_scan_batch(ols(design, Y), design.s, theta_star)[1]
    if spec.kind == "lifted":
        if rngs is None or len(rngs) != Y.shape[0]:
            raise ValueError("lifted estimator needs one generator per response")
        B = params.B if B is None and params is not None else B
        if B is None:
            raise ValueError("lifted estimator needs B")
        key = ("root", sigma, B)
        if key not in cache:
            cache[key] = noising_root(design, sigma, B)
        eta = spec.threshold(params, design)

        def inner(v):
            return soft_threshold(eta, v)

        est = np.stack([
            lift_sequence_estimator(inner, design, y, sigma, B, spec.draws, g, root=cache[key])
            for y, g in zip(Y, rngs)
        ])
    elif spec.kind == "ols":
        est = ols(design, Y)
    elif spec.kind == "lasso":
        est = lasso_diagonal(design, Y, spec.value)
    else:
        est = stols(design, Y, spec.threshold(params, design))
    return np.sum((est - theta_star) ** 2, axis=1)
