import numpy as np
import pytest

from levkrr import (
    bernstein_bound,
    deviation_lambda_max,
    deviation_matrix_check,
    empirical_tail,
    exact_ridge_leverage,
    psi_matrix,
    sketching_matrix,
)
from levkrr.leverage import SpectralData

from helpers import random_spsd


def spectral_of(K):
    return SpectralData.from_kernel(K)


class TestPsiMatrix:
    def test_identity_kernel(self):
        # sigma = 1 everywhere: Psi = sqrt(1/(1 + n*gamma)) * U^T, so
        # Psi Psi^T = I/2 at gamma = 1/4 regardless of the eigenbasis ordering
        sp = spectral_of(np.eye(4))
        Psi = psi_matrix(sp, gamma=0.25)
        np.testing.assert_allclose(Psi @ Psi.T, np.eye(4) / 2.0, atol=1e-12)

    def test_column_norms_are_leverage_scores(self):
        rng = np.random.default_rng(0)
        K = random_spsd(rng, 20)
        gamma = 1e-2
        Psi = psi_matrix(spectral_of(K), gamma)
        col_sq = np.einsum("ij,ij->j", Psi, Psi)
        np.testing.assert_allclose(
            col_sq, exact_ridge_leverage(K, gamma).scores, atol=1e-10
        )

    def test_operator_norm_below_one(self):
        rng = np.random.default_rng(1)
        K = random_spsd(rng, 15)
        Psi = psi_matrix(spectral_of(K), 1e-3)
        assert np.linalg.norm(Psi, 2) <= 1.0 + 1e-12

    def test_gamma_positive(self):
        with pytest.raises(ValueError):
            psi_matrix(spectral_of(np.eye(2)), 0.0)


class TestDeviationLambdaMax:
    def test_full_uniform_draw_is_zero(self):
        rng = np.random.default_rng(2)
        K = random_spsd(rng, 8)
        Psi = psi_matrix(spectral_of(K), 0.05)
        # S S^T = I exactly for one uniform draw of each index
        S = sketching_matrix(np.arange(8), np.full(8, 1 / 8))
        assert abs(deviation_lambda_max(Psi, S)) <= 1e-12

    def test_single_draw_hand_computed(self):
        # identity kernel, n = 2, draw index 0 with prob q: D = diag(s - s/q, s)
        # where s = 1/(1 + 2*gamma); lambda_max = s since s - s/q < 0 < s.
        gamma = 0.5
        s = 1.0 / 2.0
        sp = spectral_of(np.eye(2))
        Psi = psi_matrix(sp, gamma)
        S = sketching_matrix([0], np.array([0.4, 0.6]))
        assert deviation_lambda_max(Psi, S) == pytest.approx(s, abs=1e-12)

    def test_unbiased_over_draws(self):
        # Monte Carlo oracle: E[Psi S S^T Psi^T] = Psi Psi^T
        rng = np.random.default_rng(3)
        K = random_spsd(rng, 5)
        Psi = psi_matrix(spectral_of(K), 0.02)
        probs = rng.random(5)
        probs /= probs.sum()
        acc = np.zeros((5, 5))
        draws = 20_000
        for _ in range(draws):
            idx = rng.choice(5, size=3, p=probs)
            PsiS = sketching_matrix(idx, probs).gather(Psi)
            acc += PsiS @ PsiS.T
        target = Psi @ Psi.T
        assert np.abs(acc / draws - target).max() <= 0.05

    def test_shape_mismatch(self):
        Psi = np.zeros((3, 3))
        S = sketching_matrix([0], np.full(4, 0.25))
        with pytest.raises(ValueError):
            deviation_lambda_max(Psi, S)


class TestBernsteinBound:
    def test_small_t_is_vacuous_n(self):
        assert bernstein_bound(10, 1e-12, 1.0, 5.0, 1.0, 500) == pytest.approx(500.0)

    def test_doubling_p_squares_normalized_bound(self):
        n = 100
        b1 = bernstein_bound(40, 0.3, 0.9, 12.0, 0.7, n)
        b2 = bernstein_bound(80, 0.3, 0.9, 12.0, 0.7, n)
        assert b2 / n == pytest.approx((b1 / n) ** 2, rel=1e-10)

    def test_frozen_example(self):
        # p = 1647, t = 1, lmax = 1, frob_sq = 24, beta = 1, n = 500:
        # exponent = -1647/2/(24 + 1/3), bound ~ 500*exp(-33.83) well below rho=0.1
        val = bernstein_bound(1647, 1.0, 1.0, 24.0, 1.0, 500)
        assert val <= 0.1

    def test_monotone_decreasing_in_t(self):
        vals = [bernstein_bound(50, t, 1.0, 10.0, 0.5, 200) for t in (0.1, 0.3, 0.6)]
        assert vals[0] > vals[1] > vals[2]

    def test_input_validation(self):
        with pytest.raises(ValueError):
            bernstein_bound(0, 0.1, 1.0, 1.0, 1.0, 10)
        with pytest.raises(ValueError):
            bernstein_bound(5, 0.1, 1.0, 1.0, 1.5, 10)
        with pytest.raises(ValueError):
            bernstein_bound(5, -0.1, 1.0, 1.0, 1.0, 10)


class TestEmpiricalTail:
    def test_fields_and_determinism(self):
        rng = np.random.default_rng(4)
        K = random_spsd(rng, 10)
        Psi = psi_matrix(spectral_of(K), 0.05)
        probs = np.full(10, 0.1)
        a = empirical_tail(Psi, probs, p=20, t_grid=[0.1, 0.5], trials=30, seed=7)
        b = empirical_tail(Psi, probs, p=20, t_grid=[0.1, 0.5], trials=30, seed=7)
        np.testing.assert_array_equal(a.empirical, b.empirical)
        assert a.trials == 30
        assert np.all((0 <= a.empirical) & (a.empirical <= 1))
        assert np.all(np.diff(a.empirical) <= 0)  # tail fraction decreasing in t

    def test_bound_dominates_at_large_p(self):
        rng = np.random.default_rng(5)
        K = random_spsd(rng, 12)
        Psi = psi_matrix(spectral_of(K), 0.1)
        scores = exact_ridge_leverage(K, 0.1).scores
        probs = scores / scores.sum()
        exp = empirical_tail(Psi, probs, p=400, t_grid=[0.3], trials=60, seed=1)
        assert exp.beta_used == pytest.approx(1.0, abs=1e-10)
        assert exp.empirical[0] * exp.trials <= exp.bound[0] * exp.trials + 1e-9

    def test_vacuous_beta_zero(self):
        rng = np.random.default_rng(6)
        K = random_spsd(rng, 4)
        Psi = psi_matrix(spectral_of(K), 0.05)
        probs = np.array([0.0, 0.5, 0.25, 0.25])  # zero prob on positive score
        exp = empirical_tail(Psi, probs, p=5, t_grid=[0.2], trials=5, seed=0)
        assert exp.beta_used == 0.0
        assert exp.bound[0] == 4.0

    def test_trials_positive(self):
        Psi = np.eye(2) * 0.5
        with pytest.raises(ValueError):
            empirical_tail(Psi, np.full(2, 0.5), 3, [0.1], trials=0, seed=0)


class TestDeviationMatrixCheck:
    def test_inflation_closed_form(self):
        # gamma/lambda = 0.25 and t = 0.5: inflation = 1/(1 - 0.5) = 2
        rng = np.random.default_rng(7)
        K = random_spsd(rng, 10)
        sp = spectral_of(K)
        lam = 0.4
        gamma = 0.1
        S = sketching_matrix(np.arange(10), np.full(10, 0.1))  # zero deviation
        check = deviation_matrix_check(sp, S, gamma=gamma, t=0.5, lam=lam)
        assert check.condition_met
        assert check.inflation == pytest.approx(2.0, rel=1e-12)

    def test_condition_fails_when_deviation_large(self):
        sp = spectral_of(np.eye(3))
        S = sketching_matrix([0], np.full(3, 1 / 3))
        check = deviation_matrix_check(sp, S, gamma=1e-6, t=0.01, lam=0.5)
        assert not check.condition_met
        assert check.inflation is None

    def test_gamma_too_large_no_inflation(self):
        rng = np.random.default_rng(8)
        K = random_spsd(rng, 6)
        S = sketching_matrix(np.arange(6), np.full(6, 1 / 6))
        check = deviation_matrix_check(spectral_of(K), S, gamma=0.4, t=0.5, lam=0.5)
        # gamma > (1-t)*lam = 0.25 so the multiplier is undefined
        assert check.condition_met and check.inflation is None

    def test_t_range_enforced(self):
        sp = spectral_of(np.eye(2))
        S = sketching_matrix([0], np.full(2, 0.5))
        with pytest.raises(ValueError):
            deviation_matrix_check(sp, S, gamma=0.1, t=1.0, lam=0.1)
