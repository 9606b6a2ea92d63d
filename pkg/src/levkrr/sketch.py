"""Nystrom sketches and weighted column-sampling sketching matrices.

A Nystrom sketch stores the sampled columns C, the overlap block W = K[I, I]
and a thin factor B with B B^T = C W^+ C^T. The sketching matrix S carries the
per-draw importance weights 1/sqrt(p * p_i) used by the concentration bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .kernels import KernelSpec, kernel_columns

# Safety factor applied on top of p' * eps * lambda_max(W) when discarding
# eigenvalues of the overlap block.
PINV_SAFETY = 100.0

DENSE_CAP_DEFAULT = 5000


class DegenerateSketchError(RuntimeError):
    """All overlap eigenvalues fell below tolerance (degenerate sample)."""


@dataclass(frozen=True)
class SketchingMatrix:
    """Sparse column-sampling sketch: one nonzero 1/sqrt(p * p_i) per column."""

    n: int
    indices: np.ndarray  # sampled row index per column, length p, duplicates kept
    weights: np.ndarray  # positive weight per column, length p

    @property
    def p(self) -> int:
        return self.indices.size

    def dense(self) -> np.ndarray:
        S = np.zeros((self.n, self.p))
        S[self.indices, np.arange(self.p)] = self.weights
        return S

    def gather(self, M: np.ndarray) -> np.ndarray:
        """M @ S without forming S: gather columns of M and scale."""
        return M[:, self.indices] * self.weights


def sketching_matrix(sampled, probabilities: np.ndarray) -> SketchingMatrix:
    """Weighted sketching matrix for a with-replacement index multiset.

    Duplicates are kept: the matrix-multiplication estimator S S^T averages
    over draws, so every draw contributes its own column.
    """
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.ndim != 1 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must be nonnegative and sum to 1")
    idx = np.asarray(sampled, dtype=np.intp).ravel()
    if idx.size == 0:
        raise ValueError("empty sample")
    if np.any(idx < 0) or np.any(idx >= probs.size):
        raise ValueError("sampled index out of range")
    pi = probs[idx]
    if np.any(pi <= 0):
        raise ValueError("sampled an index with zero probability")
    weights = 1.0 / np.sqrt(idx.size * pi)
    return SketchingMatrix(n=probs.size, indices=idx, weights=weights)


@dataclass(frozen=True)
class NystromSketch:
    """Factorized Nystrom approximation L = C W^+ C^T = B B^T."""

    C: np.ndarray  # n x p' sampled kernel columns (distinct indices)
    W: np.ndarray  # p' x p' overlap block K[I, I]
    B: np.ndarray  # n x r thin factor
    rank: int
    indices: np.ndarray  # the p' distinct sampled indices, sorted
    tolerance: float  # eigenvalue cutoff used for W^+

    @property
    def n(self) -> int:
        return self.C.shape[0]


def build_sketch(points: np.ndarray, spec: KernelSpec, sampled_indices) -> NystromSketch:
    """Construct the Nystrom sketch from a sampled index multiset.

    Indices are deduplicated (C W^+ C^T is invariant to duplicates), W^+ is
    taken via symmetric eigendecomposition with a relative cutoff, and
    B = C V diag(retained eigenvalues)^(-1/2). Cost O(n p'^2 + p'^3); the
    n x n matrix is never formed. With-replacement sampling makes W
    rank-deficient routinely, which is why a Cholesky factor of W is not used.
    """
    idx = np.unique(np.asarray(sampled_indices, dtype=np.intp).ravel())
    if idx.size == 0:
        raise ValueError("empty index set")
    C = kernel_columns(points, idx, spec)
    W = C[idx, :]
    vals, vecs = scipy.linalg.eigh(W)
    lmax = max(float(vals[-1]), 0.0)
    tol = idx.size * np.finfo(np.float64).eps * lmax * PINV_SAFETY
    keep = vals > tol
    if not np.any(keep):
        raise DegenerateSketchError(
            f"all {idx.size} overlap eigenvalues are below tolerance {tol:.3e}"
        )
    B = (C @ vecs[:, keep]) / np.sqrt(vals[keep])
    return NystromSketch(C=C, W=W, B=B, rank=int(keep.sum()), indices=idx, tolerance=tol)


def sketch_to_dense(sketch: NystromSketch, cap: int = DENSE_CAP_DEFAULT) -> np.ndarray:
    """Materialize L = B B^T; desk-scale validation only."""
    if sketch.n > cap:
        raise ValueError(f"n = {sketch.n} exceeds the dense materialization cap {cap}")
    L = sketch.B @ sketch.B.T
    return (L + L.T) / 2.0


def apply_regularized_sketch(
    points: np.ndarray, spec: KernelSpec, S: SketchingMatrix, gamma: float
) -> np.ndarray:
    """Regularized approximation L_gamma = K S (S^T K S + n*gamma I)^(-1) S^T K.

    Used by the bounds validation to check the ordering L_gamma <= L <= K;
    materializes K, so desk-scale only.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    K = kernel_columns(points, np.arange(S.n), spec)
    KS = S.gather(K)
    M = (K[np.ix_(S.indices, S.indices)] * S.weights[None, :]) * S.weights[:, None]
    M = M + S.n * gamma * np.eye(S.p)
    cho = scipy.linalg.cho_factor((M + M.T) / 2.0)
    L = KS @ scipy.linalg.cho_solve(cho, KS.T)
    return (L + L.T) / 2.0
