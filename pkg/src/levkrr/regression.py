"""Kernel ridge regression solves and analytic / Monte-Carlo risk evaluation.

Risk is evaluated at the training points (fixed design) under the model
y = f* + sigma * xi with standard normal xi, and decomposes as
risk = n*lambda^2 ||(M + n*lambda I)^(-1) f*||^2
       + (sigma^2/n) Tr(M^2 (M + n*lambda I)^(-2))
for the smoother built from matrix M. The bias term is matrix-decreasing and
the variance term matrix-increasing in M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .sketch import NystromSketch


@dataclass(frozen=True)
class GroundTruth:
    f_star: np.ndarray
    sigma_sq: float

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.f_star)):
            raise ValueError("f_star has non-finite entries")
        if self.sigma_sq < 0:
            raise ValueError("sigma_sq must be >= 0")


@dataclass(frozen=True)
class KrrModel:
    alpha: np.ndarray
    lam: float
    fitted: np.ndarray
    kernel_source: str  # "full" | "nystrom"


@dataclass(frozen=True)
class RiskReport:
    bias_sq: float
    variance: float
    total: float
    noise_sigma_sq: float
    lam: float


def _check_inputs(M: np.ndarray, y: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    M = np.asarray(M, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if M.shape[0] != M.shape[1] or M.shape[0] != y.size:
        raise ValueError("shape mismatch between matrix and targets")
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite inputs")
    return M, y


def krr_fit(K: np.ndarray, y: np.ndarray, lam: float) -> KrrModel:
    """Full solve: alpha = (K + n*lambda I)^(-1) y, fitted = K alpha."""
    K, y = _check_inputs(K, y, lam)
    n = K.shape[0]
    cho = scipy.linalg.cho_factor(K + n * lam * np.eye(n))
    alpha = scipy.linalg.cho_solve(cho, y)
    return KrrModel(alpha=alpha, lam=float(lam), fitted=K @ alpha, kernel_source="full")


def krr_fit_nystrom(sketch: NystromSketch, y: np.ndarray, lam: float) -> KrrModel:
    """Sketch solve: fitted = L (L + n*lambda I)^(-1) y without forming L.

    By the matrix inversion lemma L (L + n*lambda I)^(-1) =
    B (B^T B + n*lambda I)^(-1) B^T, so everything runs in the factor
    dimension at cost O(n r^2 + r^3).
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    B = sketch.B
    if B.shape[1] == 0:
        raise ValueError("degenerate sketch: factor has no columns")
    y = np.asarray(y, dtype=np.float64).ravel()
    n, r = B.shape
    if y.size != n:
        raise ValueError("target length does not match the sketch")
    G = B.T @ B + n * lam * np.eye(r)
    cho = scipy.linalg.cho_factor((G + G.T) / 2.0)
    fitted = B @ scipy.linalg.cho_solve(cho, B.T @ y)
    # L alpha = fitted with alpha = (L + n*lambda I)^(-1) y = (y - fitted)/(n*lambda)
    alpha = (y - fitted) / (n * lam)
    return KrrModel(alpha=alpha, lam=float(lam), fitted=fitted, kernel_source="nystrom")


def bias_squared(M: np.ndarray, truth: GroundTruth, lam: float) -> float:
    """n*lambda^2 ||(M + n*lambda I)^(-1) f*||^2 by symmetric PD solve."""
    M, f = _check_inputs(M, truth.f_star, lam)
    n = M.shape[0]
    cho = scipy.linalg.cho_factor(M + n * lam * np.eye(n))
    v = scipy.linalg.cho_solve(cho, f)
    return float(n * lam**2 * (v @ v))


def variance_term(M: np.ndarray, sigma_sq: float, lam: float) -> float:
    """(sigma^2/n) * sum_j (sigma_j / (sigma_j + n*lambda))^2 over eigenvalues of M."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if sigma_sq < 0:
        raise ValueError("sigma_sq must be >= 0")
    sig = np.maximum(scipy.linalg.eigvalsh(np.asarray(M, dtype=np.float64)), 0.0)
    n = sig.size
    ratios = sig / (sig + n * lam)
    return float(sigma_sq / n * np.sum(ratios**2))


def analytic_risk(M: np.ndarray, truth: GroundTruth, lam: float) -> RiskReport:
    b = bias_squared(M, truth, lam)
    v = variance_term(M, truth.sigma_sq, lam)
    return RiskReport(
        bias_sq=b, variance=v, total=b + v, noise_sigma_sq=float(truth.sigma_sq), lam=float(lam)
    )


def monte_carlo_risk(
    M: np.ndarray, truth: GroundTruth, lam: float, trials: int, seed: int
) -> float:
    """Average of (1/n)||M (M + n*lambda I)^(-1) (f* + sigma xi) - f*||^2 over
    fresh standard normal draws. Accumulation order is fixed for bitwise
    reproducibility of reported numbers.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    M, f = _check_inputs(M, truth.f_star, lam)
    n = M.shape[0]
    cho = scipy.linalg.cho_factor(M + n * lam * np.eye(n))
    # M (M + n*lambda I)^(-1) is the transpose of the solve result; both symmetric.
    smoother = scipy.linalg.cho_solve(cho, M).T
    sigma = np.sqrt(truth.sigma_sq)
    rng = np.random.Generator(np.random.PCG64(seed))
    acc = 0.0
    for _ in range(trials):
        y = f + sigma * rng.standard_normal(n)
        resid = smoother @ y - f
        acc += float(resid @ resid) / n
    return acc / trials
