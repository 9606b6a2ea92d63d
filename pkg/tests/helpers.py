"""Shared test utilities: random problem instances and brute-force oracles."""

import numpy as np

from levkrr import KernelSpec, kernel_matrix


def random_spsd(rng, n, rank=None):
    """Random SPSD matrix A A^T / r with controllable rank."""
    r = rank or n
    A = rng.standard_normal((n, r))
    return A @ A.T / r


def random_rbf_instance(rng, n, d=2, bandwidth=0.8):
    """Random points plus their RBF Gram matrix."""
    pts = rng.standard_normal((n, d))
    spec = KernelSpec(family="rbf", bandwidth=bandwidth)
    return pts, spec, kernel_matrix(pts, spec)


def bernoulli_instance(rng, n, order=1):
    """Random points in [0,1) plus their periodic-kernel Gram matrix."""
    pts = rng.random((n, 1))
    spec = KernelSpec(family="bernoulli", order=order)
    return pts, spec, kernel_matrix(pts, spec)


def dense_ridge_diag(M, lam):
    """Brute-force diag(M (M + n*lam I)^(-1)) via explicit inverse."""
    n = M.shape[0]
    return np.diag(M @ np.linalg.inv(M + n * lam * np.eye(n)))
