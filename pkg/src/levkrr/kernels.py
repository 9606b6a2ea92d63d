"""Kernel evaluation and partial Gram-matrix construction.

Three kernel families are supported: linear, Gaussian RBF, and the periodic
Bernoulli-polynomial kernel on [0,1). Column-wise construction is the primary
path so that downstream sketching never has to materialize the full n x n
Gram matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

# Coefficient tables are generated up to this polynomial degree (order <= 10).
MAX_BERNOULLI_DEGREE = 20

FAMILIES = ("linear", "rbf", "bernoulli")


class KernelError(ValueError):
    """Invalid kernel specification or kernel input."""


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters.

    bandwidth is the RBF length scale h in exp(-||x-x'||^2 / (2 h^2));
    order is the Bernoulli half-degree (the polynomial degree is 2*order).
    """

    family: str
    bandwidth: float | None = None
    order: int | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise KernelError(f"unknown kernel family: {self.family!r}")
        if self.family == "rbf":
            if self.bandwidth is None or not (self.bandwidth > 0) or not math.isfinite(self.bandwidth):
                raise KernelError("rbf kernel requires a positive finite bandwidth")
        if self.family == "bernoulli":
            if self.order is None or int(self.order) != self.order or self.order < 1:
                raise KernelError("bernoulli kernel requires an integer order >= 1")
            if 2 * self.order > MAX_BERNOULLI_DEGREE:
                raise KernelError(
                    f"bernoulli order {self.order} exceeds the tabulated degree cap "
                    f"{MAX_BERNOULLI_DEGREE // 2}"
                )


@lru_cache(maxsize=None)
def _bernoulli_fractions(degree: int) -> tuple[Fraction, ...]:
    """Exact coefficients of the Bernoulli polynomial B_degree, ascending order.

    Built from B_n'(x) = n B_{n-1}(x) with the constant fixed by
    integral_0^1 B_n(x) dx = 0.
    """
    if degree == 0:
        return (Fraction(1),)
    prev = _bernoulli_fractions(degree - 1)
    coeffs = [Fraction(0)] * (degree + 1)
    for k, c in enumerate(prev):
        coeffs[k + 1] = Fraction(degree) * c / (k + 1)
    coeffs[0] = -sum(coeffs[k] / (k + 1) for k in range(1, degree + 1))
    return tuple(coeffs)


@lru_cache(maxsize=None)
def bernoulli_coefficients(degree: int) -> np.ndarray:
    """Float coefficients of B_degree in ascending order."""
    if degree < 0 or degree > MAX_BERNOULLI_DEGREE:
        raise KernelError(f"bernoulli degree must be in [0, {MAX_BERNOULLI_DEGREE}]")
    return np.array([float(c) for c in _bernoulli_fractions(degree)])


def _bernoulli_kernel_values(u: np.ndarray | float, order: int) -> np.ndarray | float:
    """k-values for fractional parts u in [0,1).

    The sign (-1)^(order+1) makes the kernel positive semi-definite for every
    order: the raw polynomial's Fourier coefficients alternate sign with the
    degree, so even orders would otherwise give a negative semi-definite Gram
    matrix.
    """
    degree = 2 * order
    coeffs = bernoulli_coefficients(degree)
    val = np.polynomial.polynomial.polyval(u, coeffs)
    sign = -1.0 if order % 2 == 0 else 1.0
    return val * (sign / math.factorial(degree))


def as_points(points: np.ndarray) -> np.ndarray:
    """Coerce input to an (n, d) float64 array of finite values."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise KernelError("points must be a nonempty (n, d) array")
    if not np.all(np.isfinite(pts)):
        raise KernelError("points contain non-finite entries")
    return pts


def _check_domain(pts: np.ndarray, spec: KernelSpec) -> None:
    if spec.family == "bernoulli":
        if pts.shape[1] != 1:
            raise KernelError("bernoulli kernel requires scalar (d = 1) inputs")
        if np.any(pts < 0.0) or np.any(pts >= 1.0):
            raise KernelError("bernoulli kernel points must lie in [0, 1)")


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Single kernel evaluation k(x, y).

    Bernoulli inputs are wrapped periodically, so any finite scalars are
    accepted here (pointwise use does not require the [0,1) domain).
    """
    xv = np.atleast_1d(np.asarray(x, dtype=np.float64))
    yv = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if xv.shape != yv.shape:
        raise KernelError(f"dimension mismatch: {xv.shape} vs {yv.shape}")
    if not (np.all(np.isfinite(xv)) and np.all(np.isfinite(yv))):
        raise KernelError("non-finite kernel input")
    if spec.family == "linear":
        return float(xv @ yv)
    if spec.family == "rbf":
        d2 = float(np.sum((xv - yv) ** 2))
        return float(np.exp(-d2 / (2.0 * spec.bandwidth**2)))
    if xv.size != 1:
        raise KernelError("bernoulli kernel requires scalar inputs")
    delta = float(xv[0] - yv[0])
    u = delta - math.floor(delta)
    return float(_bernoulli_kernel_values(u, spec.order))


def kernel_columns(points: np.ndarray, indices, spec: KernelSpec) -> np.ndarray:
    """Columns of the Gram matrix at the given row indices, shape (n, len(indices)).

    Cost is O(n * len(indices) * d); the full matrix is never formed. For the
    Bernoulli kernel the difference is always taken in the orientation of the
    smaller point index, which makes the assembled Gram matrix exactly
    symmetric bit for bit.
    """
    pts = as_points(points)
    _check_domain(pts, spec)
    n = pts.shape[0]
    idx = np.asarray(indices, dtype=np.intp).ravel()
    if idx.size == 0:
        raise KernelError("empty index set")
    if np.any(idx < 0) or np.any(idx >= n):
        raise KernelError(f"column index out of range [0, {n})")
    out = np.empty((n, idx.size))
    rows = np.arange(n)
    for j, c in enumerate(idx):
        if spec.family == "linear":
            out[:, j] = pts @ pts[c]
        elif spec.family == "rbf":
            diff = pts - pts[c]
            d2 = np.einsum("ij,ij->i", diff, diff)
            out[:, j] = np.exp(-d2 / (2.0 * spec.bandwidth**2))
        else:
            delta = pts[:, 0] - pts[c, 0]
            delta = np.where(rows <= c, delta, -delta)
            u = delta - np.floor(delta)
            out[:, j] = _bernoulli_kernel_values(u, spec.order)
    return out


def kernel_matrix(points: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Full n x n Gram matrix, exactly symmetric by construction."""
    pts = as_points(points)
    return kernel_columns(pts, np.arange(pts.shape[0]), spec)


def kernel_diagonal(points: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Diagonal of the Gram matrix in O(n) evaluations."""
    pts = as_points(points)
    _check_domain(pts, spec)
    n = pts.shape[0]
    if spec.family == "linear":
        return np.einsum("ij,ij->i", pts, pts)
    if spec.family == "rbf":
        return np.ones(n)
    return np.full(n, float(_bernoulli_kernel_values(0.0, spec.order)))


def cross_kernel(points_a: np.ndarray, points_b: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Rectangular kernel matrix k(a_i, b_j), shape (len(a), len(b))."""
    pa = as_points(points_a)
    pb = as_points(points_b)
    if pa.shape[1] != pb.shape[1]:
        raise KernelError("point sets have mismatched dimension")
    if spec.family == "linear":
        return pa @ pb.T
    if spec.family == "rbf":
        d2 = np.sum((pa[:, None, :] - pb[None, :, :]) ** 2, axis=2)
        return np.exp(-d2 / (2.0 * spec.bandwidth**2))
    if pa.shape[1] != 1:
        raise KernelError("bernoulli kernel requires scalar inputs")
    delta = pa[:, 0][:, None] - pb[:, 0][None, :]
    u = delta - np.floor(delta)
    return _bernoulli_kernel_values(u, spec.order)
