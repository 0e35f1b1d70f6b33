"""Design matrices: diagonal families, dense designs and class membership.

Diagonal designs are described by the scales ``s`` (``X_ii = sqrt(n s_i)``)
and are never materialized by the estimators; ``to_dense`` exists for the
test oracles.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg


@dataclass(frozen=True)
class DiagonalDesign:
    n: int
    d: int
    s: np.ndarray

    def __post_init__(self):
        s = np.array(self.s, dtype=np.float64)
        if s.ndim != 1 or s.shape[0] != self.d:
            raise ValueError(f"s must have length d={self.d}")
        if self.d < 1 or self.d > self.n:
            raise ValueError(f"need 1 <= d <= n, got d={self.d}, n={self.n}")
        if not np.all(s > 0):
            raise ValueError("diagonal scales must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def diagonal(self):
        """The nonzero entries ``sqrt(n s_i)``."""
        return np.sqrt(self.n * self.s)

    def to_dense(self):
        X = np.zeros((self.n, self.d))
        X[np.arange(self.d), np.arange(self.d)] = self.diagonal
        return X

    def matvec(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape[-1] != self.d:
            raise ValueError(f"theta must have length {self.d}")
        out = np.zeros(theta.shape[:-1] + (self.n,))
        out[..., : self.d] = self.diagonal * theta
        return out


@dataclass(frozen=True)
class DenseDesign:
    entries: np.ndarray
    rank_rtol: float = 1e-12
    _q: np.ndarray = field(init=False, repr=False, compare=False)
    _r: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        X = np.array(self.entries, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("design must be a 2-D array")
        n, d = X.shape
        if d > n:
            raise ValueError(f"need d <= n, got {X.shape}")
        # Column-pivoted QR as the rank test; the unpivoted factors are kept
        # to solve least squares.
        _, rp, _ = linalg.qr(X, mode="economic", pivoting=True)
        diag = np.abs(np.diag(rp))
        if diag.size == 0 or diag[-1] <= self.rank_rtol * diag[0]:
            raise np.linalg.LinAlgError("design does not have full column rank")
        q, r = linalg.qr(X, mode="economic")
        X.setflags(write=False)
        object.__setattr__(self, "entries", X)
        object.__setattr__(self, "_q", q)
        object.__setattr__(self, "_r", r)

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def d(self):
        return self.entries.shape[1]

    def matvec(self, theta):
        return np.asarray(theta, dtype=np.float64) @ self.entries.T

    def gram(self):
        """``(1/n) X^T X``."""
        return self.entries.T @ self.entries / self.n

    def solve_ls(self, y):
        """Least-squares solve through the stored QR factors.

        ``y`` may be a single response (length n) or a stack (m, n).
        """
        y = np.asarray(y, dtype=np.float64)
        rhs = y @ self._q
        return linalg.solve_triangular(self._r, rhs.T, lower=False).T

    def to_dense(self):
        return np.array(self.entries)


@dataclass(frozen=True)
class AlphaInstance:
    design: DiagonalDesign
    alpha: float
    B: float
    k: int

    def to_json(self):
        return {
            "n": self.design.n,
            "d": self.design.d,
            "B": self.B,
            "alpha": self.alpha,
            "k": self.k,
            "s": self.design.s.tolist(),
        }


def make_alpha_instance(n, d, B, alpha):
    """Diagonal design with ``k = d // 2`` scales at ``alpha/B`` and the rest at ``1/B``.

    The first ``k`` coordinates carry ``alpha/B``; everything after, including
    the middle coordinate when ``d`` is odd, carries ``1/B``.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    if d > n:
        raise ValueError(f"need d <= n, got d={d}, n={n}")
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if B <= 0:
        raise ValueError("B must be > 0")
    k = d // 2
    s = np.full(d, 1.0 / B)
    s[:k] = alpha / B
    return AlphaInstance(design=DiagonalDesign(n=n, d=d, s=s), alpha=float(alpha), B=float(B), k=k)


def _require_design(design):
    if not isinstance(design, (DiagonalDesign, DenseDesign)):
        raise TypeError(f"unsupported design type {type(design).__name__}")


def min_certified_B(design):
    """Smallest ``B`` with ``(1/n) X^T X >= (1/B) I``."""
    _require_design(design)
    if isinstance(design, DiagonalDesign):
        return float(1.0 / design.s.min())
    # Singular values of X / sqrt(n) are the square roots of the gram eigenvalues
    # and avoid squaring the condition number.
    sv = linalg.svdvals(design.entries / math.sqrt(design.n))
    smin = sv.min()
    if smin <= design.rank_rtol * sv.max():
        raise np.linalg.LinAlgError("X^T X is singular")
    return float(1.0 / (smin * smin))


def diag_class_B(design):
    """``max_i ((1/n) X^T X)^{-1}_{ii}``, the membership level for the diagonal class."""
    _require_design(design)
    if isinstance(design, DiagonalDesign):
        return float(1.0 / design.s.min())
    # (X^T X)^{-1} = R^{-1} R^{-T}; its diagonal is the row norms of R^{-1}.
    rinv = linalg.solve_triangular(design._r, np.eye(design.d), lower=False)
    return float(design.n * np.max(np.sum(rinv * rinv, axis=1)))


def sample_observation(design, theta, sigma, rng):
    """Draw ``y = X theta + sigma w`` with ``w ~ N(0, I_n)``."""
    _require_design(design)
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (design.d,):
        raise ValueError(f"theta must have shape ({design.d},), got {theta.shape}")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    noise = rng.standard_normal(design.n)
    return design.matvec(theta) + sigma * noise


def random_dense_design(n, d, B, rng, spread=4.0):
    """Random correlated design with ``min_certified_B`` equal to ``B``.

    The gram eigenvalues are ``1/B`` (once) and log-uniform in
    ``[1/B, spread/B]`` otherwise; eigenvectors and the column space are
    Haar-random.
    """
    if d > n:
        raise ValueError("need d <= n")
    q, _ = np.linalg.qr(rng.standard_normal((n, d)))
    v, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eig = np.exp(rng.uniform(0.0, math.log(spread), size=d)) / B
    eig[0] = 1.0 / B
    X = math.sqrt(n) * (q * np.sqrt(eig)) @ v.T
    return DenseDesign(X)
