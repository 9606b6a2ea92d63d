"""Synthetic regression datasets on [0,1) and CSV ingestion.

The synthetic generator draws points from one of several densities, builds a
ground-truth function with unit RKHS norm as a small anchor expansion
f*(x) = sum_k c_k k(x, z_k), and observes y = f* + sigma * xi.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec, cross_kernel
from .regression import GroundTruth

DENSITIES = ("grid", "arcsine", "uniform", "beta")

# Default Beta(a, a) concentration for the border-clustered density. At this
# value a 500-point draw with the order-1 periodic kernel at lambda = 1e-6
# has effective dimension near 24 while a handful of isolated interior points
# keep the maximal degrees of freedom near n.
BETA_CONCENTRATION_DEFAULT = 0.008


@dataclass(frozen=True)
class SyntheticConfig:
    n: int
    density: str = "arcsine"
    bernoulli_order: int = 1
    noise_sigma: float = 0.1
    anchors: int = 10
    seed: int = 0
    beta_concentration: float = BETA_CONCENTRATION_DEFAULT

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.density not in DENSITIES:
            raise ValueError(f"unknown density: {self.density!r}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.anchors < 1:
            raise ValueError("anchors must be >= 1")
        if self.density == "beta" and not self.beta_concentration > 0:
            raise ValueError("beta_concentration must be positive")


@dataclass(frozen=True)
class RegressionDataset:
    points: np.ndarray
    y: np.ndarray
    spec: KernelSpec | None
    truth: GroundTruth | None = None


def grid_points(n: int) -> np.ndarray:
    """Uniform grid x_i = i/n, i = 0..n-1, as an (n, 1) array."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return (np.arange(n) / n)[:, None]


def arcsine_points(n: int, seed: int) -> np.ndarray:
    """i.i.d. draws from the arcsine law Beta(1/2, 1/2) via x = sin^2(pi u / 2).

    Symmetric about 1/2 with density diverging at both ends of (0, 1).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(n)
    return (np.sin(np.pi * u / 2.0) ** 2)[:, None]


def uniform_points(n: int, seed: int) -> np.ndarray:
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.random(n)[:, None]


def beta_points(n: int, concentration: float, seed: int) -> np.ndarray:
    """i.i.d. Beta(a, a) draws with small a: tight clusters at both borders
    plus a few isolated interior points."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.beta(concentration, concentration, n)
    # beta() can return exactly 1.0 at extreme concentrations; keep [0, 1)
    return np.nextafter(x, 0.0, where=x >= 1.0, out=x.copy())[:, None]


def density_points(density: str, n: int, seed: int, concentration: float | None = None) -> np.ndarray:
    if density == "grid":
        return grid_points(n)
    if density == "arcsine":
        return arcsine_points(n, seed)
    if density == "uniform":
        return uniform_points(n, seed)
    if density == "beta":
        return beta_points(n, concentration or BETA_CONCENTRATION_DEFAULT, seed)
    raise ValueError(f"unknown density: {density!r}")


def make_f_star(
    points: np.ndarray, spec: KernelSpec, anchors: int, seed: int
) -> tuple[np.ndarray, float]:
    """Ground-truth values f*(x_i) for a unit-RKHS-norm anchor expansion.

    Anchors z_k are uniform in the unit cube, coefficients standard normal
    rescaled so that c^T K_z c = 1. Returns (values, rkhs_norm). A singular
    anchor Gram triggers one resample before failing.
    """
    if anchors < 1:
        raise ValueError("anchors must be >= 1")
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    d = pts.shape[1]
    rng = np.random.Generator(np.random.PCG64(seed))
    for attempt in range(2):
        z = rng.random((anchors, d))
        Kz = cross_kernel(z, z, spec)
        c = rng.standard_normal(anchors)
        norm_sq = float(c @ Kz @ c)
        if norm_sq > 1e-12:
            c = c / math.sqrt(norm_sq)
            values = cross_kernel(pts, z, spec) @ c
            return values, float(c @ Kz @ c)
    raise RuntimeError("anchor Gram matrix is singular; f* construction failed")


def synthesize(config: SyntheticConfig) -> RegressionDataset:
    """Full synthetic dataset: points, ground truth, and noisy observations.

    A pure function of the config; sub-seeds for points, anchors and noise are
    distinct so each piece is independently reproducible.
    """
    spec = KernelSpec(family="bernoulli", order=config.bernoulli_order)
    pts = density_points(config.density, config.n, config.seed, config.beta_concentration)
    f_star, _ = make_f_star(pts, spec, config.anchors, config.seed + 1)
    rng = np.random.Generator(np.random.PCG64(config.seed + 2))
    y = f_star + config.noise_sigma * rng.standard_normal(config.n)
    truth = GroundTruth(f_star=f_star, sigma_sq=config.noise_sigma**2)
    return RegressionDataset(points=pts, y=y, spec=spec, truth=truth)


VARIANCE_FLOOR = 1e-12


def load_csv(path: str, target_column: str, standardize: bool = False) -> RegressionDataset:
    """Load a regression dataset from a headered CSV file.

    All non-target columns become features; standardization is per column to
    zero mean / unit variance with a variance floor guarding constant columns.
    The kernel spec is not part of the file; callers attach one separately.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            rows = list(reader)
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {path}: {exc}") from exc
    if target_column not in header:
        raise ValueError(f"{path}: missing target column {target_column!r}")
    if len(rows) < 2:
        raise ValueError(f"{path}: fewer than 2 data rows")
    tgt = header.index(target_column)
    feat_cols = [j for j in range(len(header)) if j != tgt]
    data = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {i + 1} has {len(row)} cells, expected {len(header)}")
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise ValueError(f"{path}: non-numeric cell at row {i + 1}, column {header[j]!r}") from None
    X = data[:, feat_cols]
    y = data[:, tgt]
    if standardize:
        mean = X.mean(axis=0)
        var = X.var(axis=0)
        scale = np.sqrt(np.maximum(var, VARIANCE_FLOOR))
        X = (X - mean) / scale
        X[:, var < VARIANCE_FLOOR] = 0.0
    return RegressionDataset(points=X, y=y, spec=None, truth=None)


def save_csv(dataset: RegressionDataset, path: str, feature_prefix: str = "x") -> None:
    """Write a dataset to CSV with a `target` column and, when ground truth is
    present, an extra `f_star` column."""
    X = np.asarray(dataset.points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    header = [f"{feature_prefix}{j}" for j in range(X.shape[1])] + ["target"]
    cols = [X[:, j] for j in range(X.shape[1])] + [np.asarray(dataset.y)]
    if dataset.truth is not None:
        header.append("f_star")
        cols.append(dataset.truth.f_star)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(X.shape[0]):
            writer.writerow([repr(float(col[i])) for col in cols])
