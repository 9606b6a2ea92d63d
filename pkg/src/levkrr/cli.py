"""Batch experiment harness.

Experiments are configured by an INI-style file plus a few flag overrides and
emit CSV files with a ``#``-prefixed metadata header recording the resolved
configuration. Exit codes: 0 success, 1 config error, 2 runtime/numerical
error, 3 IO error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
import time
from dataclasses import dataclass, replace

import numpy as np

from . import bounds, leverage, regression, sampling, sketch
from .datagen import RegressionDataset, SyntheticConfig, load_csv, synthesize
from .kernels import KernelSpec, kernel_diagonal, kernel_matrix

EXPERIMENTS = (
    "leverage_profile",
    "risk_curve",
    "summary_table",
    "concentration",
    "score_approximation",
)

SAMPLERS = ("uniform", "diagonal", "exact_leverage", "approx_leverage")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "summary_table"
    output_dir: str = "out"
    seed: int = 0
    trials: int = 10
    lam: float = 1e-6
    epsilon: float = 0.25
    rho: float = 0.1
    p_values: tuple[int, ...] = (50,)
    samplers: tuple[str, ...] = ("uniform", "diagonal", "exact_leverage", "approx_leverage")
    t_grid: tuple[float, ...] = (0.1, 0.25, 0.5, 0.75)
    # dataset
    dataset_kind: str = "synthetic"  # "synthetic" | "csv"
    dataset_name: str = "synth"
    n: int = 500
    density: str = "arcsine"
    bernoulli_order: int = 1
    noise_sigma: float = 0.1
    anchors: int = 10
    beta_concentration: float = 0.008
    csv_path: str = ""
    target_column: str = "target"
    standardize: bool = True
    # kernel (synthetic datasets always use the bernoulli kernel)
    kernel_family: str = "bernoulli"
    bandwidth: float = 1.0

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.lam > 0:
            raise ConfigError("lambda must be positive")
        if not 0 < self.epsilon < 0.5:
            raise ConfigError("epsilon must be in (0, 0.5)")
        if not 0 < self.rho < 1:
            raise ConfigError("rho must be in (0, 1)")
        if self.dataset_kind not in ("synthetic", "csv"):
            raise ConfigError("dataset kind must be 'synthetic' or 'csv'")
        if self.dataset_kind == "csv" and not self.csv_path:
            raise ConfigError("csv dataset requires a path")
        for s in self.samplers:
            if s not in SAMPLERS:
                raise ConfigError(f"unknown sampler {s!r}")
        if any(p < 1 for p in self.p_values):
            raise ConfigError("p values must be >= 1")


def _parse_list(raw: str, conv):
    return tuple(conv(tok) for tok in raw.replace(",", " ").split())


def load_config(path: str | None) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    try:
        exp = parser["experiment"] if "experiment" in parser else {}
        ds = parser["dataset"] if "dataset" in parser else {}
        ker = parser["kernel"] if "kernel" in parser else {}
        par = parser["params"] if "params" in parser else {}
        cfg = replace(
            cfg,
            experiment=exp.get("name", cfg.experiment),
            output_dir=exp.get("output_dir", cfg.output_dir),
            seed=int(exp.get("seed", cfg.seed)),
            trials=int(exp.get("trials", cfg.trials)),
            lam=float(par.get("lambda", cfg.lam)),
            epsilon=float(par.get("epsilon", cfg.epsilon)),
            rho=float(par.get("rho", cfg.rho)),
            p_values=_parse_list(par.get("p_values", ""), int) or cfg.p_values,
            samplers=_parse_list(par.get("samplers", ""), str) or cfg.samplers,
            t_grid=_parse_list(par.get("t_grid", ""), float) or cfg.t_grid,
            dataset_kind=ds.get("kind", cfg.dataset_kind),
            dataset_name=ds.get("name", cfg.dataset_name),
            n=int(ds.get("n", cfg.n)),
            density=ds.get("density", cfg.density),
            bernoulli_order=int(ker.get("order", cfg.bernoulli_order)),
            noise_sigma=float(ds.get("noise_sigma", cfg.noise_sigma)),
            anchors=int(ds.get("anchors", cfg.anchors)),
            beta_concentration=float(ds.get("beta_concentration", cfg.beta_concentration)),
            csv_path=ds.get("path", cfg.csv_path),
            target_column=ds.get("target_column", cfg.target_column),
            standardize=ds.get("standardize", str(cfg.standardize)).lower() in ("1", "true", "yes"),
            kernel_family=ker.get("family", cfg.kernel_family),
            bandwidth=float(ker.get("bandwidth", cfg.bandwidth)),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    return cfg


def _kernel_spec(cfg: ExperimentConfig) -> KernelSpec:
    if cfg.kernel_family == "bernoulli":
        return KernelSpec(family="bernoulli", order=cfg.bernoulli_order)
    if cfg.kernel_family == "rbf":
        return KernelSpec(family="rbf", bandwidth=cfg.bandwidth)
    if cfg.kernel_family == "linear":
        return KernelSpec(family="linear")
    raise ConfigError(f"unknown kernel family {cfg.kernel_family!r}")


def build_dataset(cfg: ExperimentConfig) -> RegressionDataset:
    if cfg.dataset_kind == "synthetic":
        syn = SyntheticConfig(
            n=cfg.n,
            density=cfg.density,
            bernoulli_order=cfg.bernoulli_order,
            noise_sigma=cfg.noise_sigma,
            anchors=cfg.anchors,
            seed=cfg.seed,
            beta_concentration=cfg.beta_concentration,
        )
        return synthesize(syn)
    ds = load_csv(cfg.csv_path, cfg.target_column, cfg.standardize)
    return RegressionDataset(points=ds.points, y=ds.y, spec=_kernel_spec(cfg), truth=ds.truth)


@dataclass
class Problem:
    """Shared per-run context: dataset, Gram matrix, spectral data."""

    cfg: ExperimentConfig
    dataset: RegressionDataset
    K: np.ndarray
    spectral: leverage.SpectralData
    exact_scores: np.ndarray  # at level lambda
    sampling_scores: np.ndarray  # at level lambda * epsilon
    truth: regression.GroundTruth


def build_problem(cfg: ExperimentConfig) -> Problem:
    dataset = build_dataset(cfg)
    K = kernel_matrix(dataset.points, dataset.spec)
    spectral = leverage.SpectralData.from_kernel(K)
    exact = leverage.exact_ridge_leverage_from_spectral(spectral, cfg.lam).scores
    at_eps = leverage.exact_ridge_leverage_from_spectral(spectral, cfg.lam * cfg.epsilon).scores
    if dataset.truth is not None:
        truth = dataset.truth
    else:
        # real data: no ground truth; use the observations as a fixed target
        # with zero modeled noise so risk ratios remain well defined
        truth = regression.GroundTruth(f_star=dataset.y, sigma_sq=0.0)
    return Problem(
        cfg=cfg,
        dataset=dataset,
        K=K,
        spectral=spectral,
        exact_scores=exact,
        sampling_scores=at_eps,
        truth=truth,
    )


def sampler_distribution(problem: Problem, kind: str, seed: int, p: int) -> np.ndarray:
    """Probability vector for a sampler kind; leverage kinds use the scores at
    level lambda * epsilon."""
    cfg = problem.cfg
    n = problem.K.shape[0]
    if kind == "uniform":
        return sampling.make_distribution("uniform", n=n)
    if kind == "diagonal":
        return sampling.make_distribution("diagonal", kernel_diagonal(problem.dataset.points, problem.dataset.spec))
    if kind == "exact_leverage":
        return sampling.make_distribution("exact_leverage", problem.sampling_scores)
    if kind == "approx_leverage":
        diag_probs = sampling.make_distribution(
            "diagonal", kernel_diagonal(problem.dataset.points, problem.dataset.spec)
        )
        approx = leverage.approx_ridge_leverage(
            problem.dataset.points,
            problem.dataset.spec,
            cfg.lam * cfg.epsilon,
            p,
            diag_probs,
            seed,
        )
        return sampling.make_distribution("approx_leverage", approx.scores)
    raise ConfigError(f"unknown sampler {kind!r}")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return "%.12g" % value
    return str(value)


def write_csv(path: str, meta: dict, columns: list[str], rows: list[tuple], footer: dict | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key in sorted(meta):
            fh.write(f"# {key} = {_fmt(meta[key])}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
        if footer:
            for key in sorted(footer):
                fh.write(f"# {key} = {_fmt(footer[key])}\n")


def resolved_meta(cfg: ExperimentConfig) -> dict:
    meta = {}
    for key, value in vars(cfg).items():
        if isinstance(value, tuple):
            value = " ".join(_fmt(v) for v in value)
        meta[key] = value
    return meta


def _risk_ratio_row(problem: Problem, kind: str, p: int, trial: int):
    """One (sampler, p, trial) cell of a risk experiment."""
    cfg = problem.cfg
    seed_t = sampling.split_seed(cfg.seed, trial * 1000 + p)
    probs = sampler_distribution(problem, kind, sampling.split_seed(seed_t, 1), p)
    sampled = sampling.sample_with_replacement(probs, p, seed_t)
    t0 = time.perf_counter()
    sk = sketch.build_sketch(problem.dataset.points, problem.dataset.spec, sampled)
    wall_ms = (time.perf_counter() - t0) * 1e3
    L = sketch.sketch_to_dense(sk)
    report_l = regression.analytic_risk(L, problem.truth, cfg.lam)
    report_k = regression.analytic_risk(problem.K, problem.truth, cfg.lam)
    ratio = report_l.total / report_k.total if report_k.total > 0 else math.nan
    beta = sampling.beta_factor(probs, problem.sampling_scores)
    return report_l, report_k, ratio, beta, seed_t, wall_ms


def run_leverage_profile(problem: Problem, out_path: str) -> None:
    cfg = problem.cfg
    n = problem.K.shape[0]
    p = cfg.p_values[0]
    diag_probs = sampling.make_distribution(
        "diagonal", kernel_diagonal(problem.dataset.points, problem.dataset.spec)
    )
    approx = leverage.approx_ridge_leverage(
        problem.dataset.points, problem.dataset.spec, cfg.lam, p, diag_probs, cfg.seed
    )
    rows = [
        (i, float(problem.dataset.points[i, 0]), float(problem.exact_scores[i]), float(approx.scores[i]))
        for i in range(n)
    ]
    write_csv(out_path, resolved_meta(cfg), ["index", "x", "exact_score", "approx_score"], rows)


def run_risk_curve(problem: Problem, out_path: str) -> None:
    cfg = problem.cfg
    if not cfg.p_values:
        raise ConfigError("risk_curve requires a nonempty p_values list")
    rows = []
    for kind in cfg.samplers:
        for p in cfg.p_values:
            for trial in range(cfg.trials):
                report_l, _, ratio, _, seed_t, _ = _risk_ratio_row(problem, kind, p, trial)
                rows.append((kind, p, seed_t, report_l.total, ratio))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    write_csv(out_path, resolved_meta(cfg), ["sampler", "p", "seed", "risk", "risk_ratio"], rows)


def run_summary_table(problem: Problem, out_path: str) -> None:
    cfg = problem.cfg
    d_eff = float(problem.exact_scores.sum())
    d_mof = float(problem.K.shape[0] * problem.exact_scores.max())
    p = max(2 * math.ceil(d_eff), 1)
    rows = []
    for kind in cfg.samplers:
        for trial in range(cfg.trials):
            report_l, _, ratio, beta, seed_t, wall_ms = _risk_ratio_row(problem, kind, p, trial)
            rows.append(
                (
                    cfg.dataset_name,
                    cfg.kernel_family,
                    kind,
                    p,
                    seed_t,
                    d_eff,
                    d_mof,
                    report_l.bias_sq,
                    report_l.variance,
                    report_l.total,
                    ratio,
                    beta,
                    wall_ms,
                )
            )
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4]))
    write_csv(
        out_path,
        resolved_meta(cfg),
        [
            "dataset",
            "kernel",
            "sampler",
            "p",
            "seed",
            "d_eff",
            "d_mof",
            "bias_sq",
            "variance",
            "risk",
            "risk_ratio",
            "beta",
            "wall_time_ms",
        ],
        rows,
    )


def run_concentration(problem: Problem, out_path: str) -> None:
    cfg = problem.cfg
    gamma = cfg.lam * cfg.epsilon
    Psi = bounds.psi_matrix(problem.spectral, gamma)
    p = cfg.p_values[0]
    rows = []
    for kind in cfg.samplers:
        if kind == "approx_leverage":
            continue  # concentration uses closed-form distributions only
        probs = sampler_distribution(problem, kind, cfg.seed, p)
        tail = bounds.empirical_tail(Psi, probs, p, cfg.t_grid, cfg.trials, cfg.seed)
        for j, t in enumerate(tail.t_grid):
            rows.append((kind, float(t), float(tail.empirical[j]), float(tail.bound[j]), tail.beta_used))
    rows.sort(key=lambda r: (r[0], r[1]))
    write_csv(out_path, resolved_meta(cfg), ["sampler", "t", "empirical", "bound", "beta"], rows)


def run_score_approximation(problem: Problem, out_path: str) -> None:
    cfg = problem.cfg
    n = problem.K.shape[0]
    diag = kernel_diagonal(problem.dataset.points, problem.dataset.spec)
    probs = sampling.make_distribution("diagonal", diag)
    trace = float(diag.sum())
    p_thm = math.ceil(
        8.0 * (trace / (n * cfg.lam * cfg.epsilon) + 1.0 / 6.0) * math.log(n / cfg.rho)
    )
    p = cfg.p_values[0] if cfg.p_values else p_thm
    exact = problem.exact_scores
    rows = []
    successes = 0
    for trial in range(cfg.trials):
        seed_t = sampling.split_seed(cfg.seed, trial)
        approx = leverage.approx_ridge_leverage(
            problem.dataset.points, problem.dataset.spec, cfg.lam, p, probs, seed_t
        )
        err = exact - approx.scores
        max_err = float(err.max())
        additive_ok = bool(np.all(approx.scores >= exact - 2 * cfg.epsilon))
        upper_ok = bool(np.all(approx.scores <= exact + 1e-8))
        successes += additive_ok
        rows.append((trial, seed_t, max_err, additive_ok, upper_ok))
    meta = resolved_meta(cfg)
    meta["p_used"] = p
    meta["p_theorem"] = p_thm
    footer = {
        "success_fraction": successes / cfg.trials,
        "target_fraction": 1.0 - cfg.rho,
    }
    write_csv(
        out_path,
        meta,
        ["trial", "seed", "max_additive_error", "additive_ok", "upper_ok"],
        rows,
        footer=footer,
    )


RUNNERS = {
    "leverage_profile": run_leverage_profile,
    "risk_curve": run_risk_curve,
    "summary_table": run_summary_table,
    "concentration": run_concentration,
    "score_approximation": run_score_approximation,
}


def run_experiment(cfg: ExperimentConfig) -> str:
    cfg.validate()
    os.makedirs(cfg.output_dir, exist_ok=True)
    problem = build_problem(cfg)
    out_path = os.path.join(cfg.output_dir, f"{cfg.experiment}.csv")
    RUNNERS[cfg.experiment](problem, out_path)
    return out_path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="levkrr", description="Sketched kernel ridge regression experiment harness"
    )
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--experiment", choices=EXPERIMENTS, help="experiment to run")
    parser.add_argument("--seed", type=int, help="base seed override")
    parser.add_argument("--trials", type=int, help="trial count override")
    parser.add_argument("--out", help="output directory override")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.experiment is not None:
            overrides["experiment"] = args.experiment
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.out is not None:
            overrides["output_dir"] = args.out
        cfg = replace(cfg, **overrides)
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        out_path = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error ({cfg.experiment}): {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # numerical / runtime failures
        print(f"runtime error ({cfg.experiment}): {exc}", file=sys.stderr)
        return 2
    print(out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
