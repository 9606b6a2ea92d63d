"""Ridge leverage scores, effective dimensionality, and their fast
sketch-based approximation.

The score of point i at level lambda is the i-th diagonal entry of
K (K + n*lambda I)^(-1), equivalently sum_j sigma_j/(sigma_j + n*lambda) U_ij^2
over the eigenpairs of K. The approximate scores are computed entirely in the
sketch dimension from the thin Nystrom factor B, at cost O(n p^2 + p^3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .kernels import KernelSpec
from .sampling import sample_with_replacement
from .sketch import NystromSketch, build_sketch


@dataclass(frozen=True)
class SpectralData:
    """Eigendecomposition of a kernel matrix, eigenvalues descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_kernel(cls, K: np.ndarray) -> "SpectralData":
        K = _check_spsd(K)
        vals, vecs = scipy.linalg.eigh(K)
        return cls(eigenvalues=vals[::-1].copy(), eigenvectors=vecs[:, ::-1].copy())


@dataclass(frozen=True)
class LeverageScores:
    scores: np.ndarray
    lam: float
    method: str  # "exact" | "approximate"
    sketch_size: int | None = None


def _check_spsd(K: np.ndarray) -> np.ndarray:
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("kernel matrix must be square")
    if not np.all(np.isfinite(K)):
        raise ValueError("kernel matrix has non-finite entries")
    scale = max(np.abs(K).max(), 1.0)
    if np.abs(K - K.T).max() > 1e-12 * scale:
        raise ValueError("kernel matrix is not symmetric")
    return (K + K.T) / 2.0


def exact_ridge_leverage(K: np.ndarray, lam: float) -> LeverageScores:
    """Exact scores via the eigendecomposition (the reference path)."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    spectral = SpectralData.from_kernel(K)
    return exact_ridge_leverage_from_spectral(spectral, lam)


def exact_ridge_leverage_from_spectral(spectral: SpectralData, lam: float) -> LeverageScores:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    sig = np.maximum(spectral.eigenvalues, 0.0)
    n = sig.size
    weights = sig / (sig + n * lam)
    scores = (spectral.eigenvectors**2) @ weights
    return LeverageScores(scores=scores, lam=float(lam), method="exact")


def ridge_leverage_by_solve(K: np.ndarray, lam: float) -> np.ndarray:
    """Cross-check path: diag(K (K + n*lambda I)^(-1)) by symmetric PD solve."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    K = _check_spsd(K)
    n = K.shape[0]
    cho = scipy.linalg.cho_factor(K + n * lam * np.eye(n))
    # (K + n*lambda I)^(-1) K is the transpose of the target; same diagonal.
    A = scipy.linalg.cho_solve(cho, K)
    return np.diagonal(A).copy()


def scores_from_factor(B: np.ndarray, lam: float) -> np.ndarray:
    """Approximate scores B_i^T (B^T B + n*lambda I)^(-1) B_i from a thin factor.

    Equals diag(L (L + n*lambda I)^(-1)) for L = B B^T by the matrix inversion
    lemma; everything stays in the factor dimension.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    n, r = B.shape
    G = B.T @ B + n * lam * np.eye(r)
    cho = scipy.linalg.cho_factor((G + G.T) / 2.0)
    X = scipy.linalg.cho_solve(cho, B.T)
    return np.einsum("ij,ji->i", B, X)


def approx_ridge_leverage(
    points: np.ndarray,
    spec: KernelSpec,
    lam: float,
    p: int,
    probabilities: np.ndarray,
    seed: int,
) -> LeverageScores:
    """Fast approximate scores from a p-column Nystrom sketch.

    Samples p columns with replacement, factors the sketch, and evaluates the
    scores in the sketch dimension. Total cost O(n p^2 + p^3); the n x n
    matrix is never formed.
    """
    sampled = sample_with_replacement(probabilities, p, seed)
    sketch = build_sketch(points, spec, sampled)
    scores = scores_from_factor(sketch.B, lam)
    return LeverageScores(scores=scores, lam=float(lam), method="approximate", sketch_size=int(p))


def approx_scores_from_sketch(sketch: NystromSketch, lam: float) -> LeverageScores:
    scores = scores_from_factor(sketch.B, lam)
    return LeverageScores(
        scores=scores, lam=float(lam), method="approximate", sketch_size=int(sketch.indices.size)
    )


def effective_dimension(K: np.ndarray, lam: float) -> float:
    """Tr(K (K + n*lambda I)^(-1)) from the eigenvalues."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    K = _check_spsd(K)
    sig = np.maximum(scipy.linalg.eigvalsh(K), 0.0)
    n = sig.size
    return float(np.sum(sig / (sig + n * lam)))


def max_dof(K: np.ndarray, lam: float) -> float:
    """n * max_i l_i(lambda), the maximal degrees of freedom."""
    scores = exact_ridge_leverage(K, lam).scores
    return float(scores.size * scores.max())
