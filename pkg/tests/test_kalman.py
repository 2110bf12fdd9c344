"""Tests for the Riccati recursion, steady-state solvers and the fixed-point smoother."""

import math

import numpy as np
import pytest

from feedback_lab.channel.spec import awgn, validate_channel
from feedback_lab.coding.encoder import EncoderSpec
from feedback_lab.coding.transmission import control_system
from feedback_lab.errors import AssumptionA2Violated, NoConvergence
from feedback_lab.kalman import (
    AugmentedSystem,
    SmootherState,
    fixed_point_smoother_step,
    information_path,
    inverse_power_step,
    mmse_path,
    mmse_W_update,
    riccati_run,
    riccati_step,
    riccati_steady_iterate,
    riccati_steady_transform,
    stable_antistable_split,
    sylvester_solve,
)
from feedback_lab.kalman.smoother import mmse_W_inverse_power, smooth
from feedback_lab.limits.information import fim_crb_mmse
from feedback_lab.limits.report import convergence_rows
from feedback_lab.utils.linalg import numerical_rank

from conftest import random_systems


@pytest.mark.parametrize("P", [1.0, 3.0, 8.0])
def test_awgn_closed_form(P):
    a = math.sqrt(1.0 + P)
    steady = riccati_steady_iterate(EncoderSpec.scalar(a, 1.0), awgn())
    assert steady.Sigma[0, 0] == pytest.approx(a * a - 1.0, abs=1e-9)
    assert steady.L[0] == pytest.approx((a * a - 1.0) / a, abs=1e-9)
    assert 0.5 * math.log(steady.Ke) == pytest.approx(0.5 * math.log(1.0 + P), abs=1e-9)


def test_recursion_starts_from_prior(arma1, vector_encoder):
    traj = riccati_run(vector_encoder, arma1, 10)
    assert traj.Sigma.shape == (12, 3, 3)
    assert np.array_equal(traj.Sigma[0], np.diag([1.0, 1.0, 0.0]))
    assert traj.Ke[0] == pytest.approx(vector_encoder.C @ vector_encoder.C + 1.0)
    assert np.all(traj.Ke >= 1.0)


def test_negative_horizon_rejected(scalar_encoder):
    with pytest.raises(ValueError):
        riccati_run(scalar_encoder, awgn(), -1)


class TestRiccatiStep:
    def test_zero_covariance_is_a_fixed_point(self):
        aug = AugmentedSystem.build([[2.0]], [1.0], awgn())
        Sigma_next, L, Ke = riccati_step(np.zeros((1, 1)), aug)
        assert np.array_equal(Sigma_next, np.zeros((1, 1)))
        assert np.array_equal(L, np.zeros(1))
        assert Ke == 1.0

    def test_scalar_hand_evaluation(self):
        aug = AugmentedSystem.build([[2.0]], [1.0], awgn())
        Sigma_next, L, Ke = riccati_step(np.eye(1), aug)
        assert Ke == pytest.approx(2.0)
        assert L[0] == pytest.approx(1.0)
        assert Sigma_next[0, 0] == pytest.approx(2.0)

    def test_awgn_innovations_rise_to_a_squared(self):
        traj = riccati_run(EncoderSpec.scalar(2.0, 1.0), awgn(), 60)
        assert np.all(np.diff(traj.Ke) >= -1e-12)
        assert traj.Ke[-1] == pytest.approx(4.0, rel=1e-12)
        assert traj.Sigma[-1, 0, 0] == pytest.approx(3.0, rel=1e-12)
        assert traj.L[-1, 0] == pytest.approx(1.5, rel=1e-12)

    @pytest.mark.parametrize("channel, encoder", random_systems(10, 41))
    def test_covariances_stay_psd(self, channel, encoder):
        traj = riccati_run(encoder, channel, 100)
        for Sigma in traj.Sigma:
            lam = np.linalg.eigvalsh(Sigma)
            assert lam[0] >= -1e-10 * max(1.0, lam[-1])


class TestSteadyState:
    def test_solvers_agree(self, arma1, vector_encoder):
        steady = riccati_steady_iterate(vector_encoder, arma1)
        transformed = riccati_steady_transform(vector_encoder, arma1)
        assert np.max(np.abs(steady.Sigma - transformed)) <= 1e-8

    def test_solvers_agree_without_stable_modes(self, arma2):
        encoder = EncoderSpec.from_matrices([[1.3, 0.2], [0.0, -1.1]], [1.0, 1.0])
        steady = riccati_steady_iterate(encoder, arma2)
        assert np.max(np.abs(steady.Sigma - riccati_steady_transform(encoder, arma2))) <= 1e-8

    def test_rank_equals_unstable_count(self, arma1):
        encoder = EncoderSpec.from_matrices([[1.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, -1.2]],
                                            [1.0, 1.0, 1.0])
        assert numerical_rank(riccati_steady_iterate(encoder, arma1).Sigma) == 2
        assert numerical_rank(riccati_steady_transform(encoder, arma1)) == 2

    def test_rank_with_one_stable_mode(self):
        encoder = EncoderSpec.from_matrices([[2.0, 0.0], [0.0, 0.5]], [1.0, 1.0])
        assert numerical_rank(riccati_steady_iterate(encoder, awgn()).Sigma) == 1
        assert numerical_rank(riccati_steady_transform(encoder, awgn())) == 1

    def test_innovation_variance_is_squared_instability(self, arma2, vector_encoder):
        steady = riccati_steady_iterate(vector_encoder, arma2)
        di = vector_encoder.degree_of_instability()
        assert abs(steady.Ke - di * di) / (di * di) <= 1e-8

    def test_closed_loop_is_stable(self, arma1, vector_encoder):
        steady = riccati_steady_iterate(vector_encoder, arma1)
        aug = AugmentedSystem.from_encoder(vector_encoder, arma1)
        assert np.max(np.abs(np.linalg.eigvals(aug.closed_loop(steady.L)))) < 1.0

    def test_stable_mode_does_not_change_rate_or_power(self):
        base = riccati_steady_iterate(EncoderSpec.scalar(2.0, 1.0), awgn())
        encoder = EncoderSpec.from_matrices([[2.0, 0.0], [0.0, 0.3]], [1.0, 1.0])
        augmented = riccati_steady_iterate(encoder, awgn())
        aug = AugmentedSystem.from_encoder(encoder, awgn())
        assert abs(0.5 * math.log(augmented.Ke) - 0.5 * math.log(base.Ke)) <= 1e-6
        assert abs(aug.Dbb @ augmented.Sigma @ aug.Dbb - base.Sigma[0, 0]) <= 1e-6

    def test_per_step_rate_converges(self):
        encoder = EncoderSpec.scalar(2.0, 1.0)
        row = convergence_rows(encoder, awgn(), [2000])[0]
        assert row["gap_log_di"] <= 1e-3

    def test_unit_circle_eigenvalue(self):
        with pytest.raises(AssumptionA2Violated):
            riccati_steady_iterate(EncoderSpec.scalar(1.0, 1.0), awgn())

    def test_eigenvalue_shared_with_channel(self):
        channel = validate_channel([0.5], [0.3])
        with pytest.raises(AssumptionA2Violated):
            riccati_steady_iterate(EncoderSpec.from_matrices([[2.0, 0.0], [0.0, -0.5]],
                                                             [1.0, 1.0]), channel)

    def test_iteration_budget(self):
        with pytest.raises(NoConvergence) as excinfo:
            riccati_steady_iterate(EncoderSpec.scalar(2.0, 1.0), awgn(), max_iter=2)
        assert excinfo.value.iterations == 2


class TestSylvester:
    def test_residual(self, rng):
        F = np.diag([0.3, -0.2])
        A = np.array([[1.5, 0.4], [0.0, 2.0]])
        G = rng.standard_normal(2)
        C = rng.standard_normal(2)
        psi = sylvester_solve(F, A, G, C)
        assert np.allclose(F @ psi - psi @ A, -np.outer(G, C), atol=1e-12)

    def test_stable_antistable_split(self):
        A = np.array([[1.4, 0.2, 0.0], [0.1, 0.3, 0.5], [0.0, 0.2, -1.1]])
        V, A_plus, A_minus = stable_antistable_split(A)
        block = np.zeros((3, 3))
        kp = A_plus.shape[0]
        block[:kp, :kp] = A_plus
        block[kp:, kp:] = A_minus
        assert np.allclose(V @ block @ np.linalg.inv(V), A, atol=1e-10)
        assert np.all(np.abs(np.linalg.eigvals(A_plus)) > 1.0)
        assert np.all(np.abs(np.linalg.eigvals(A_minus)) < 1.0)


class TestSmoother:
    def test_mmse_matches_inverse_power_form(self):
        traj = riccati_run(EncoderSpec.scalar(2.0, 1.0), awgn(), 60)
        path = mmse_path(traj)
        for t in range(61):
            assert np.allclose(path[t + 1], mmse_W_inverse_power(traj, t), rtol=1e-9, atol=0.0)

    def test_information_form_at_long_horizon(self):
        traj = riccati_run(EncoderSpec.scalar(2.0, 1.0), awgn(), 60)
        info = information_path(traj)
        mmse = mmse_path(traj)
        for t in range(61):
            J = (4.0 ** (t + 1) + 2.0) / 3.0
            assert info[t + 1, 0, 0] == pytest.approx(J, rel=1e-12)
            assert mmse[t + 1, 0, 0] == pytest.approx(1.0 / J, rel=1e-12)
        assert mmse[61, 0, 0] == pytest.approx(traj.Sigma[61, 0, 0] / 4.0 ** 61, rel=1e-9)

    def test_mmse_agrees_with_fisher_information(self):
        encoder = EncoderSpec.scalar(2.0, 1.0)
        traj = riccati_run(encoder, awgn(), 60)
        bounds = fim_crb_mmse(encoder, awgn(), 60, traj)
        assert bounds.logdet_mmse_inv == pytest.approx(bounds.logdet_fim, rel=1e-12)
        assert bounds.mmseW[0, 0] > 0.0

    def test_mmse_decreases_in_loewner_order(self, arma1, vector_encoder):
        mmse = mmse_path(riccati_run(vector_encoder, arma1, 60))
        assert np.array_equal(mmse[0], np.eye(2))
        for t in range(61):
            assert np.linalg.eigvalsh(mmse[t] - mmse[t + 1])[0] >= -1e-10
            assert np.linalg.eigvalsh(mmse[t + 1])[0] >= -1e-10

    def test_stepwise_update_matches_path(self, arma1, vector_encoder):
        traj = riccati_run(vector_encoder, arma1, 30)
        state = SmootherState.initial(2)
        expected = mmse_path(traj)
        for t in range(31):
            assert np.allclose(mmse_W_update(state, traj, t), expected[t + 1],
                               rtol=1e-9, atol=1e-13)
            state = fixed_point_smoother_step(state, traj, t, 0.0)
        assert np.array_equal(state.xhat0, np.zeros(2))

    @pytest.mark.parametrize("A, C", [([[1.5]], [1.0]), ([[1.5, 0.2], [0.0, -1.3]], [1.0, 1.0])])
    def test_update_forms_agree(self, arma1, rng, A, C):
        encoder = EncoderSpec.from_matrices(A, C)
        traj = riccati_run(encoder, arma1, 60)
        e = rng.standard_normal(61) * np.sqrt(traj.Ke)
        path = smooth(traj, e)
        xhat0 = np.zeros(encoder.dim)
        for t in range(61):
            xhat0 = inverse_power_step(xhat0, traj, t, e[t])
            assert np.allclose(xhat0, path[t], rtol=1e-8, atol=1e-10)

    def test_information_form_inverts_mmse(self, arma1, vector_encoder):
        traj = riccati_run(vector_encoder, arma1, 15)
        mmse = mmse_path(traj)
        info = information_path(traj)
        for t in range(17):
            assert np.allclose(info[t] @ mmse[t], np.eye(2), atol=1e-8)

    def test_noise_free_run_recovers_message(self, arma1, scalar_encoder):
        W = np.array([0.3])
        transcript = control_system(scalar_encoder, arma1, W, np.zeros(31), 30)
        assert np.allclose(transcript.xhat0_path[-1], W, atol=1e-6)

    def test_smoother_is_linear_in_innovations(self, arma1, scalar_encoder, rng):
        traj = riccati_run(scalar_encoder, arma1, 20)
        e1, e2 = rng.standard_normal(21), rng.standard_normal(21)
        assert np.allclose(smooth(traj, e1 + 2.0 * e2), smooth(traj, e1) + 2.0 * smooth(traj, e2))
