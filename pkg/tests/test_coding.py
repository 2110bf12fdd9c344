"""Tests for the feedback coding layer: transmission forms, generators, CP parameters,
precoding and the Monte Carlo error-rate sweep."""

import math

import numpy as np
import pytest

from feedback_lab.channel.spec import awgn
from feedback_lab.coding import (
    CPParams,
    EncoderSpec,
    LinearPolicy,
    SchemeConfig,
    control_system,
    cp_from_structure,
    cp_optimal_form,
    cp_power,
    cp_rate_colored,
    cp_rate_isi,
    decode_message,
    embed_message,
    encode_message,
    message_count,
    message_direction,
    mmse_precode,
    monte_carlo_error_rate,
    monte_carlo_power,
    montecarlo_to_csv,
    one_step_predictor,
    optimal_feedback_generator,
    ridge_sequence,
    sk_transmit,
    structure_from_cp,
    transcript_to_csv,
    transmit,
    transmit_linear,
)
from feedback_lab.channel.toeplitz import toeplitz_bundle
from feedback_lab.coding.generator import FeedbackGenerator, generator_from_predictor
from feedback_lab.errors import DimensionMismatch, MessageRangeError, NotPSD
from feedback_lab.properties import covariance_engine, policy_ledger
from feedback_lab.utils.exports import read_csv
from feedback_lab.utils.linalg import logdet_pd, strictly_lower


def scaled_gap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)), np.max(np.abs(b))))


class TestMessages:
    def test_interval_centers(self):
        assert encode_message(1, 4) == pytest.approx(-0.375)
        assert encode_message(4, 4) == pytest.approx(0.375)
        assert encode_message(1, 1) == 0.0

    @pytest.mark.parametrize("M_T", [1, 2, 7, 445])
    def test_decoding_a_center_returns_its_index(self, M_T):
        for index in {1, (M_T + 1) // 2, M_T}:
            assert decode_message(encode_message(index, M_T), M_T) == index

    def test_tie_goes_to_lower_index(self):
        assert decode_message(0.0, 4) == 2

    def test_estimates_outside_the_interval_clip(self):
        assert decode_message(-3.0, 8) == 1
        assert decode_message(3.0, 8) == 8

    @pytest.mark.parametrize("index,M_T", [(0, 4), (5, 4), (1, 0)])
    def test_out_of_range(self, index, M_T):
        with pytest.raises(MessageRangeError):
            encode_message(index, M_T)

    def test_message_count(self):
        assert message_count(3.0, 0.2, 10) == 445
        assert message_count(3.0, 0.99, 0) == 1

    def test_vector_message_rides_on_dominant_direction(self, vector_encoder, rng):
        d = message_direction(vector_encoder)
        assert np.linalg.norm(d) == pytest.approx(1.0)
        W = embed_message(vector_encoder, 0.25, rng)
        assert d @ W == pytest.approx(0.25)


class TestTransmission:
    def test_recursive_scheme_matches_control_form(self):
        a, T = 2.0, 100
        g = math.sqrt(a * a - 1.0)
        rng = np.random.default_rng(np.random.SeedSequence([3, T]))
        x0 = float(rng.uniform(-0.5, 0.5))
        noise = rng.standard_normal(T + 1)
        sk = sk_transmit(a, g, x0, noise, T)
        kf = control_system(EncoderSpec.scalar(a, -g), awgn(), [x0], noise, T)
        assert np.max(np.abs(sk.u - kf.u)) <= 1e-10
        assert np.max(np.abs(sk.y - kf.y)) <= 1e-10
        assert np.max(np.abs(sk.xhat0_path - kf.xhat0_path)) <= 1e-10

    def test_recursive_scheme_decodes(self):
        a, T = 2.0, 30
        M_T = message_count(3.0, 0.2, T)
        x0 = encode_message(17, M_T)
        sk = sk_transmit(a, math.sqrt(3.0), x0, np.zeros(T + 1), T, message_count=M_T)
        assert sk.decoded == 17

    def test_recursive_scheme_needs_unstable_gain(self):
        with pytest.raises(ValueError):
            sk_transmit(0.9, 0.1, 0.0, np.zeros(3), 2)

    def test_generator_reproduces_prediction(self, arma1, scalar_encoder, rng):
        T = 15
        gen = optimal_feedback_generator(scalar_encoder, arma1, T)
        transcript = transmit(scalar_encoder, arma1, [0.2], rng.standard_normal(T + 1), T,
                              generator=gen)
        assert scaled_gap(gen.G_T @ transcript.y, -transcript.rhat) <= 1e-9
        assert transcript.max_identity_violation() <= 1e-9

    def test_state_space_and_matrix_generators_agree(self, arma1, vector_encoder, rng):
        T = 12
        gen = optimal_feedback_generator(vector_encoder, arma1, T)
        y = rng.standard_normal(T + 1)
        assert scaled_gap(gen.apply(y), gen.apply_state_space(y)) <= 1e-9

    def test_linear_solve_matches_recursion(self, arma2, scalar_encoder, rng):
        T = 15
        noise = rng.standard_normal(T + 1)
        gen = optimal_feedback_generator(scalar_encoder, arma2, T)
        u, y = transmit_linear(scalar_encoder, gen.G_T, arma2, [0.1], noise, T)
        transcript = transmit(scalar_encoder, arma2, [0.1], noise, T, generator=gen)
        assert scaled_gap(u, transcript.u) <= 1e-9
        assert scaled_gap(y, transcript.y) <= 1e-9

    def test_arbitrary_generator_is_refused_by_recursion(self, arma1, scalar_encoder):
        with pytest.raises(ValueError):
            transmit(scalar_encoder, arma1, [0.0], np.zeros(6), 5,
                     generator=FeedbackGenerator.zero(5))

    def test_noise_length_checked(self, arma1, scalar_encoder):
        with pytest.raises(DimensionMismatch):
            transmit(scalar_encoder, arma1, [0.0], np.zeros(4), 5)

    def test_transcript_csv(self, arma1, scalar_encoder, rng, tmp_path):
        T = 8
        transcript = control_system(scalar_encoder, arma1, [0.1], rng.standard_normal(T + 1), T)
        rows = read_csv(transcript_to_csv(transcript, tmp_path / "transcript.csv"))
        assert len(rows) == T + 1
        assert list(rows[0]) == ["t", "u", "y", "e", "r", "rhat", "xhat0"]
        assert float(rows[-1]["u"]) == pytest.approx(transcript.u[-1])


class TestGenerators:
    def test_kalman_generator_matches_covariance_predictor(self, arma1, scalar_encoder):
        T = 12
        Zinv = toeplitz_bundle(arma1, T).Zinv_T
        Ghat, v = one_step_predictor(scalar_encoder.K_r(T), Zinv)
        expected = generator_from_predictor(Ghat, Zinv)
        assert scaled_gap(optimal_feedback_generator(scalar_encoder, arma1, T).G_T,
                          expected) <= 1e-8
        assert np.all(v >= -1e-9)

    def test_generators_are_strictly_causal(self, arma2, vector_encoder):
        G = optimal_feedback_generator(vector_encoder, arma2, 10).G_T
        assert np.array_equal(G, strictly_lower(G))

    def test_direct_feedthrough_is_rejected(self):
        with pytest.raises(ValueError):
            FeedbackGenerator(G_T=np.eye(3))


class TestCPParameters:
    @staticmethod
    def random_cp(rng, T):
        size = T + 1
        M = rng.standard_normal((size, size))
        K_r = M @ M.T / size + np.eye(size)
        B = strictly_lower(rng.standard_normal((size, size))) * 0.3 / math.sqrt(size)
        return CPParams(K_r=K_r, B_T=B)

    def test_full_rank_round_trip(self, arma1, rng):
        T = 20
        cp = self.random_cp(rng, T)
        encoder, gen = structure_from_cp(cp, arma1, T)
        assert encoder.n == T
        ledger = policy_ledger(encoder.gamma(T), gen.G_T, arma1, T)
        assert ledger.power == pytest.approx(cp_power(cp, arma1), rel=1e-8)
        assert 0.5 * logdet_pd(ledger.K_y) == pytest.approx(cp_rate_isi(cp, arma1), rel=1e-8)

    def test_colored_and_isi_rates_agree(self, arma2, rng):
        cp = self.random_cp(rng, 15)
        assert cp_rate_colored(cp, arma2) == pytest.approx(cp_rate_isi(cp, arma2), rel=1e-9)

    def test_optimal_form_matches_structure(self, arma1, scalar_encoder):
        T = 15
        gen = optimal_feedback_generator(scalar_encoder, arma1, T)
        from_structure = cp_from_structure(scalar_encoder, gen, arma1, T)
        optimal = cp_optimal_form(scalar_encoder, arma1, T)
        assert scaled_gap(from_structure.B_T, optimal.B_T) <= 1e-8
        ledger = covariance_engine(scalar_encoder, gen, arma1, T)
        assert cp_power(optimal, arma1) == pytest.approx(ledger.power, rel=1e-8)

    def test_singular_covariance_needs_ridge(self, arma1):
        T = 8
        cp = cp_optimal_form(EncoderSpec.scalar(1.3, 1.0), arma1, T)
        with pytest.raises(NotPSD):
            structure_from_cp(cp, arma1, T)

    def test_ridge_sequence_approaches_target_power(self, arma1):
        T = 8
        cp = cp_optimal_form(EncoderSpec.scalar(1.3, 1.0), arma1, T)
        target = cp_power(cp, arma1)
        gaps = []
        for i, encoder, gen in ridge_sequence(cp, arma1, T):
            ledger = policy_ledger(encoder.gamma(T), gen.G_T, arma1, T)
            gaps.append(abs(ledger.power - target))
        assert gaps[0] > gaps[1] > gaps[2]

    def test_b_must_be_strictly_lower(self):
        with pytest.raises(ValueError):
            CPParams(K_r=np.eye(3), B_T=np.eye(3))


class TestPrecode:
    def test_precoding_open_loop_gives_optimal_generator(self, arma1, scalar_encoder):
        T = 12
        policy = LinearPolicy.from_encoder(scalar_encoder, np.zeros((T + 1, T + 1)))
        precoded = mmse_precode(policy, arma1, T)
        optimal = optimal_feedback_generator(scalar_encoder, arma1, T)
        assert scaled_gap(precoded.G_T, optimal.G_T) <= 1e-8
        assert np.array_equal(precoded.Gamma, policy.Gamma)

    def test_precoding_is_idempotent(self, arma2, vector_encoder):
        T = 10
        gen = optimal_feedback_generator(vector_encoder, arma2, T)
        policy = LinearPolicy.from_encoder(vector_encoder, gen.G_T)
        assert scaled_gap(mmse_precode(policy, arma2, T).G_T, gen.G_T) <= 1e-8

    def test_horizon_mismatch(self, arma1, scalar_encoder):
        policy = LinearPolicy.from_encoder(scalar_encoder, np.zeros((6, 6)))
        with pytest.raises(DimensionMismatch):
            mmse_precode(policy, arma1, 7)


class TestMonteCarlo:
    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = SchemeConfig(chunk_size=50, max_workers=3)
        first = monte_carlo_error_rate(cfg, 3.0, 0.2, [10, 20], 200, 7)
        second = monte_carlo_error_rate(SchemeConfig(chunk_size=50, max_workers=1),
                                        3.0, 0.2, [10, 20], 200, 7)
        a = montecarlo_to_csv(first, tmp_path / "a.csv").read_bytes()
        b = montecarlo_to_csv(second, tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_noise_free_runs_never_err(self):
        rows = monte_carlo_error_rate(SchemeConfig(zero_noise=True), 3.0, 0.2, [10], 300, 1)
        assert rows[0].Pe == 0.0
        assert rows[0].M_T == 445

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            monte_carlo_error_rate(None, 3.0, 1.0, [10], 10, 0)
        with pytest.raises(ValueError):
            monte_carlo_error_rate(None, 3.0, 0.2, [10], 0, 0)

    def test_error_rate_decreases_near_capacity(self):
        rows = monte_carlo_error_rate(None, 3.0, 0.1, [10, 20, 30], 2000, 3)
        pe = [row.Pe for row in rows]
        assert pe[0] > pe[1] > pe[2]
        assert pe[2] > 0.0
        assert rows[-1].M_T == message_count(3.0, 0.1, 30)

    @pytest.mark.slow
    def test_error_rate_falls_with_horizon(self):
        rows = monte_carlo_error_rate(None, 3.0, 0.2, [10, 25, 40], 10_000, 2024)
        pe = [row.Pe for row in rows]
        assert all(later <= earlier for earlier, later in zip(pe, pe[1:]))
        assert pe[0] > pe[-1]
        assert pe[-1] < 0.05
        assert all(row.power_hat <= 1.05 * 3.0 for row in rows)

    @pytest.mark.slow
    def test_empirical_power_matches_ledger(self, arma1, scalar_encoder):
        T = 20
        mean, se = monte_carlo_power(scalar_encoder, arma1, T, 10_000, 11)
        analytic = covariance_engine(scalar_encoder,
                                     optimal_feedback_generator(scalar_encoder, arma1, T),
                                     arma1, T).power
        assert abs(mean - analytic) <= 3.0 * se
