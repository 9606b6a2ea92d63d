"""Column-sampling distributions, seeded with-replacement sampling, and the
sufficient sample-size formula.

All randomness comes from numpy's PCG64 generator. Per-trial seeds are derived
from a base seed through ``split_seed``, which feeds ``(base, index)`` into a
SeedSequence, so experiment harnesses are reproducible trial by trial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("uniform", "diagonal", "exact_leverage", "approx_leverage", "custom")


def split_seed(base_seed: int, index: int) -> int:
    """Derived 64-bit seed for trial ``index`` of a run seeded with ``base_seed``."""
    ss = np.random.SeedSequence(entropy=[int(base_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _validate_distribution(probabilities: np.ndarray) -> np.ndarray:
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("probabilities must be a nonempty vector")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise ValueError("probabilities must be nonnegative and finite")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
    return probs


def make_distribution(kind: str, source=None, n: int | None = None) -> np.ndarray:
    """Probability vector for a sampling kind.

    uniform needs ``n``; diagonal normalizes the kernel diagonal; the leverage
    kinds normalize a score vector; custom validates the vector as given.
    """
    if kind == "uniform":
        if n is None:
            raise ValueError("uniform distribution requires n")
        return np.full(n, 1.0 / n)
    if kind in ("diagonal", "exact_leverage", "approx_leverage"):
        src = np.asarray(source, dtype=np.float64)
        if src.ndim != 1 or src.size == 0 or np.any(src < 0):
            raise ValueError(f"{kind} distribution requires a nonnegative source vector")
        total = src.sum()
        if total <= 0:
            raise ValueError("all-zero source vector")
        return src / total
    if kind == "custom":
        return _validate_distribution(source)
    raise ValueError(f"unknown sampling kind: {kind!r}")


def sample_with_replacement(probabilities: np.ndarray, p: int, seed: int) -> np.ndarray:
    """p independent draws by inverse-CDF lookup, deterministic given the seed."""
    probs = _validate_distribution(probabilities)
    if p < 1:
        raise ValueError("p must be >= 1")
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0  # guard against round-off in the last bin
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(p)
    return np.searchsorted(cdf, u, side="right").astype(np.intp)


@dataclass(frozen=True)
class SamplingPlan:
    """A realized sampling configuration: distribution, draws, and seed."""

    probabilities: np.ndarray
    kind: str
    sampled: np.ndarray
    seed: int
    p: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", int(self.sampled.size))


def draw_plan(kind: str, probabilities: np.ndarray, p: int, seed: int) -> SamplingPlan:
    probs = _validate_distribution(probabilities)
    sampled = sample_with_replacement(probs, p, seed)
    return SamplingPlan(probabilities=probs, kind=kind, sampled=sampled, seed=int(seed))


def beta_factor(probabilities: np.ndarray, reference_scores: np.ndarray) -> float:
    """Largest beta with p_i >= beta * score_i / sum(scores) on the support.

    Returns 0.0 when some index with positive score has zero probability
    (the constraint is violated for every positive beta).
    """
    probs = _validate_distribution(probabilities)
    scores = np.asarray(reference_scores, dtype=np.float64)
    if scores.shape != probs.shape or np.any(scores < 0):
        raise ValueError("reference scores must be nonnegative and match the distribution")
    total = scores.sum()
    if total <= 0:
        raise ValueError("reference scores sum to zero")
    support = scores > 0
    if np.any(probs[support] == 0):
        return 0.0
    beta = float(np.min(probs[support] * total / scores[support]))
    return min(beta, 1.0)


def sufficient_p(d_eff: float, beta: float, n: int, rho: float) -> int:
    """Sufficient with-replacement sample size ceil(8 (d_eff/beta + 1/6) log(n/rho)).

    The logarithm is natural, consistent with the Bernstein-style derivation
    the formula comes from.
    """
    if not d_eff > 0:
        raise ValueError("d_eff must be positive")
    if not 0 < beta <= 1:
        raise ValueError("beta must be in (0, 1]")
    if not 0 < rho < 1:
        raise ValueError("rho must be in (0, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    value = 8.0 * (d_eff / beta + 1.0 / 6.0) * math.log(n / rho)
    return max(math.ceil(value), 0)
