import os

import numpy as np
import pytest

from levkrr.cli import (
    ConfigError,
    ExperimentConfig,
    build_problem,
    load_config,
    main,
    run_experiment,
)

FIXTURE = os.path.join(os.path.dirname(__file__), "data", "fixture_200.csv")


def read_output(path):
    """Split an experiment CSV into (meta, header, rows, footer)."""
    meta, rows, footer = {}, [], {}
    header = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                (footer if header is not None else meta)[key.strip()] = value.strip()
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    return meta, header, rows, footer


class TestConfigLoading:
    def test_defaults_without_file(self):
        cfg = load_config(None)
        assert cfg.experiment == "summary_table"
        assert cfg.n == 500

    def test_ini_parsing(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(
            "[experiment]\n"
            "name = risk_curve\n"
            "seed = 9\n"
            "trials = 3  # inline comment\n"
            "[dataset]\n"
            "n = 80\n"
            "density = grid\n"
            "[kernel]\n"
            "order = 2\n"
            "[params]\n"
            "lambda = 0.01\n"
            "p_values = 10, 20 40\n"
            "samplers = uniform exact_leverage\n"
        )
        cfg = load_config(str(path))
        assert cfg.experiment == "risk_curve"
        assert cfg.seed == 9 and cfg.trials == 3
        assert cfg.n == 80 and cfg.density == "grid"
        assert cfg.bernoulli_order == 2
        assert cfg.lam == 0.01
        assert cfg.p_values == (10, 20, 40)
        assert cfg.samplers == ("uniform", "exact_leverage")

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent.ini")

    def test_bad_value(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[experiment]\ntrials = many\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_validate_rejects(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(experiment="magic").validate()
        with pytest.raises(ConfigError):
            ExperimentConfig(lam=0.0).validate()
        with pytest.raises(ConfigError):
            ExperimentConfig(dataset_kind="csv", csv_path="").validate()
        with pytest.raises(ConfigError):
            ExperimentConfig(samplers=("magic",)).validate()


class TestMainExitCodes:
    def test_bad_experiment_via_config(self, tmp_path, capsys):
        path = tmp_path / "exp.ini"
        path.write_text("[experiment]\nname = wat\n")
        assert main(["--config", str(path)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_missing_csv_dataset(self, tmp_path, capsys):
        path = tmp_path / "exp.ini"
        path.write_text(
            "[experiment]\nname = summary_table\ntrials = 1\n"
            "[dataset]\nkind = csv\npath = /no/such.csv\n"
            "[kernel]\nfamily = linear\n"
        )
        assert main(["--config", str(path), "--out", str(tmp_path / "out")]) == 3
        assert "io error" in capsys.readouterr().err

    def test_success_prints_path(self, tmp_path, capsys):
        path = tmp_path / "exp.ini"
        path.write_text(
            "[experiment]\nname = leverage_profile\nseed = 1\n"
            "[dataset]\nn = 40\ndensity = grid\n"
            "[params]\nlambda = 0.001\np_values = 30\n"
        )
        out = str(tmp_path / "out")
        assert main(["--config", str(path), "--out", out]) == 0
        printed = capsys.readouterr().out.strip()
        assert printed == os.path.join(out, "leverage_profile.csv")
        assert os.path.exists(printed)


class TestLeverageProfile:
    def test_grid_profile_flat_and_reproducible(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="leverage_profile",
            output_dir=str(tmp_path),
            seed=2,
            n=60,
            density="grid",
            lam=1e-3,
            p_values=(40,),
        )
        path_a = run_experiment(cfg)
        meta, header, rows, _ = read_output(path_a)
        assert header == ["index", "x", "exact_score", "approx_score"]
        assert len(rows) == 60
        exact = np.array([float(r[2]) for r in rows])
        approx = np.array([float(r[3]) for r in rows])
        # circulant grid kernel has constant scores
        assert (exact.max() - exact.min()) / exact.mean() <= 1e-8
        assert np.all(approx <= exact + 1e-8)
        assert meta["n"] == "60" and meta["density"] == "grid"
        # byte-identical rerun of the same configuration
        with open(path_a, "rb") as fa:
            first = fa.read()
        path_b = run_experiment(cfg)
        assert path_b == path_a
        with open(path_b, "rb") as fb:
            assert fb.read() == first


class TestRiskCurve:
    def test_full_sampling_ratio_near_one(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="risk_curve",
            output_dir=str(tmp_path),
            seed=3,
            trials=2,
            n=40,
            density="grid",
            lam=1e-3,
            p_values=(400,),  # p >> n: every index sampled, L = K
            samplers=("uniform",),
        )
        _, header, rows, _ = read_output(run_experiment(cfg))
        assert header == ["sampler", "p", "seed", "risk", "risk_ratio"]
        assert len(rows) == 2
        for r in rows:
            assert float(r[4]) == pytest.approx(1.0, abs=1e-6)

    def test_row_count_and_sorting(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="risk_curve",
            output_dir=str(tmp_path),
            trials=2,
            n=30,
            density="grid",
            lam=1e-2,
            p_values=(5, 10),
            samplers=("uniform", "diagonal"),
        )
        _, _, rows, _ = read_output(run_experiment(cfg))
        assert len(rows) == 2 * 2 * 2
        keys = [(r[0], int(r[1]), int(r[2])) for r in rows]
        assert keys == sorted(keys)


class TestConcentration:
    def test_bound_and_formula(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="concentration",
            output_dir=str(tmp_path),
            seed=5,
            trials=40,
            n=30,
            density="grid",
            lam=1e-2,
            epsilon=0.25,
            p_values=(200,),
            t_grid=(0.25, 0.5),
            samplers=("uniform", "exact_leverage"),
        )
        _, header, rows, _ = read_output(run_experiment(cfg))
        assert header == ["sampler", "t", "empirical", "bound", "beta"]
        assert len(rows) == 4
        slack = 3 * np.sqrt(0.25 / cfg.trials)
        for r in rows:
            emp, bound, beta = float(r[2]), float(r[3]), float(r[4])
            assert 0 < beta <= 1
            assert emp <= min(bound, 1.0) + slack

    def test_approx_sampler_skipped(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="concentration",
            output_dir=str(tmp_path),
            trials=2,
            n=20,
            density="grid",
            lam=1e-2,
            p_values=(50,),
            t_grid=(0.5,),
            samplers=("uniform", "approx_leverage"),
        )
        _, _, rows, _ = read_output(run_experiment(cfg))
        assert {r[0] for r in rows} == {"uniform"}


class TestScoreApproximation:
    def test_upper_bound_always_holds(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="score_approximation",
            output_dir=str(tmp_path),
            seed=7,
            trials=5,
            n=50,
            density="arcsine",
            lam=1e-2,
            epsilon=0.4,
            rho=0.3,
            p_values=(60,),
        )
        meta, header, rows, footer = read_output(run_experiment(cfg))
        assert header == ["trial", "seed", "max_additive_error", "additive_ok", "upper_ok"]
        assert len(rows) == 5
        assert all(r[4] == "1" for r in rows)
        assert "p_theorem" in meta
        assert 0.0 <= float(footer["success_fraction"]) <= 1.0
        assert float(footer["target_fraction"]) == 0.7


class TestSummaryTableOnCsv:
    def test_end_to_end_linear_kernel(self, tmp_path):
        cfg = ExperimentConfig(
            experiment="summary_table",
            output_dir=str(tmp_path),
            seed=4,
            trials=2,
            dataset_kind="csv",
            dataset_name="fixture",
            csv_path=FIXTURE,
            kernel_family="linear",
            lam=1e-3,
            samplers=("uniform", "exact_leverage"),
        )
        meta, header, rows, _ = read_output(run_experiment(cfg))
        assert header[:4] == ["dataset", "kernel", "sampler", "p"]
        assert len(rows) == 4
        d_eff = float(rows[0][5])
        # linear kernel on 5 standardized features has rank <= 5
        assert d_eff <= 5.0 + 1e-8
        for r in rows:
            assert r[0] == "fixture" and r[1] == "linear"
            assert float(r[10]) > 0  # risk ratio well defined
        assert meta["csv_path"] == FIXTURE
