"""Theoretical quantities behind the concentration and bias-inflation
guarantees, plus the empirical harnesses that validate them.

Psi = Phi^(1/2) U^T with Phi = Sigma (Sigma + n*gamma I)^(-1) is the soft
spectral projection of the eigenbasis; its column squared norms are the ridge
leverage scores at level gamma and ||Psi||_F^2 is the effective dimension.
The deviation matrix D = Psi Psi^T - Psi S S^T Psi^T drives both the
Bernstein tail bound and the deterministic bias-inflation condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .leverage import SpectralData
from .sampling import beta_factor, sample_with_replacement, split_seed
from .sketch import SketchingMatrix, sketching_matrix


@dataclass(frozen=True)
class DeviationCheck:
    gamma: float
    t: float
    lambda_max_D: float
    condition_met: bool
    inflation: float | None  # defined only when condition_met and gamma <= (1-t)*lambda


@dataclass(frozen=True)
class TailExperiment:
    t_grid: np.ndarray
    trials: int
    empirical: np.ndarray  # fraction of trials with deviation >= t, per threshold
    bound: np.ndarray  # Bernstein right-hand side per threshold
    beta_used: float


def psi_matrix(spectral: SpectralData, gamma: float) -> np.ndarray:
    """Psi = Phi^(1/2) U^T for the given regularization level."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    sig = np.maximum(spectral.eigenvalues, 0.0)
    n = sig.size
    phi_sqrt = np.sqrt(sig / (sig + n * gamma))
    return phi_sqrt[:, None] * spectral.eigenvectors.T


def deviation_lambda_max(Psi: np.ndarray, S: SketchingMatrix) -> float:
    """Largest eigenvalue of Psi Psi^T - Psi S S^T Psi^T (signed, not clamped)."""
    if Psi.shape[1] != S.n:
        raise ValueError("Psi and sketching matrix dimensions do not conform")
    PsiS = S.gather(Psi)
    D = Psi @ Psi.T - PsiS @ PsiS.T
    return float(scipy.linalg.eigvalsh((D + D.T) / 2.0)[-1])


def bernstein_bound(p: int, t: float, lmax: float, frob_sq: float, beta: float, n: int) -> float:
    """n * exp(-p t^2/2 / (lmax (frob_sq/beta + t/3))).

    Values above 1 are vacuous but returned as is.
    """
    if p < 1 or n < 1:
        raise ValueError("p and n must be >= 1")
    if not (t > 0 and lmax > 0 and frob_sq > 0):
        raise ValueError("t, lmax and frob_sq must be positive")
    if not 0 < beta <= 1:
        raise ValueError("beta must be in (0, 1]")
    exponent = -p * t * t / 2.0 / (lmax * (frob_sq / beta + t / 3.0))
    return n * math.exp(exponent)


def empirical_tail(
    Psi: np.ndarray,
    probabilities: np.ndarray,
    p: int,
    t_grid,
    trials: int,
    seed: int,
) -> TailExperiment:
    """Empirical tail fractions of the deviation over seeded trials, paired
    with the Bernstein bound at the realized beta of the distribution."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    t_grid = np.asarray(t_grid, dtype=np.float64)
    col_sq = np.einsum("ij,ij->j", Psi, Psi)
    beta = beta_factor(probabilities, col_sq)
    gram = Psi @ Psi.T
    lmax = float(scipy.linalg.eigvalsh((gram + gram.T) / 2.0)[-1])
    frob_sq = float(col_sq.sum())
    deviations = np.empty(trials)
    for k in range(trials):
        sampled = sample_with_replacement(probabilities, p, split_seed(seed, k))
        S = sketching_matrix(sampled, probabilities)
        deviations[k] = deviation_lambda_max(Psi, S)
    empirical = np.array([np.mean(deviations >= t) for t in t_grid])
    if beta > 0:
        bound = np.array(
            [bernstein_bound(p, t, lmax, frob_sq, beta, Psi.shape[1]) for t in t_grid]
        )
    else:
        bound = np.full(t_grid.shape, float(Psi.shape[1]))  # vacuous
    return TailExperiment(
        t_grid=t_grid, trials=int(trials), empirical=empirical, bound=bound, beta_used=beta
    )


def deviation_matrix_check(
    spectral: SpectralData, S: SketchingMatrix, gamma: float, t: float, lam: float
) -> DeviationCheck:
    """Evaluate the deterministic bias-inflation condition for a realized sketch.

    When lambda_max(D) <= t and gamma <= (1-t)*lambda, the fitted bias under
    the regularized sketch is inflated by at most (1 - (gamma/lambda)/(1-t))^(-1).
    """
    if not (0 < t < 1):
        raise ValueError("t must be in (0, 1)")
    if not (gamma > 0 and lam > 0):
        raise ValueError("gamma and lambda must be positive")
    Psi = psi_matrix(spectral, gamma)
    lmax_d = deviation_lambda_max(Psi, S)
    condition = lmax_d <= t
    inflation = None
    if condition and gamma <= (1.0 - t) * lam:
        inflation = 1.0 / (1.0 - (gamma / lam) / (1.0 - t))
    return DeviationCheck(
        gamma=float(gamma),
        t=float(t),
        lambda_max_D=lmax_d,
        condition_met=bool(condition),
        inflation=inflation,
    )
