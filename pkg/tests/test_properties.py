"""Tests for the covariance ledger, structural checks and the property suite."""

import numpy as np
import pytest

from feedback_lab.coding import EncoderSpec, LinearPolicy, optimal_feedback_generator
from feedback_lab.errors import DimensionMismatch
from feedback_lab.kalman import riccati_run
from feedback_lab.properties import (
    PropertyCase,
    check_ma_banded,
    check_orthogonality,
    check_predictor_reduction,
    check_steady_structure,
    check_t_equivalence,
    closed_loop_system,
    covariance_engine,
    default_cases,
    negative_control_generators,
    policy_ledger,
    run_property_suite,
)

from conftest import random_channel, random_systems


class TestLedger:
    def test_kalman_and_matrix_routes_agree(self, arma2, vector_encoder):
        T = 15
        gen = optimal_feedback_generator(vector_encoder, arma2, T)
        kalman = covariance_engine(vector_encoder, gen, arma2, T)
        matrix = policy_ledger(vector_encoder.gamma(T), gen.G_T, arma2, T)
        assert np.allclose(kalman.K_y, matrix.K_y, rtol=1e-9, atol=1e-9)
        assert kalman.power == pytest.approx(matrix.power, rel=1e-9)
        assert np.allclose(kalman.K_e, matrix.K_e, rtol=1e-9)

    def test_innovation_variances_match_recursion(self, arma1, scalar_encoder):
        T = 20
        gen = optimal_feedback_generator(scalar_encoder, arma1, T)
        ledger = covariance_engine(scalar_encoder, gen, arma1, T)
        assert np.allclose(ledger.K_e, riccati_run(scalar_encoder, arma1, T).Ke, rtol=1e-9)

    def test_generator_horizon_checked(self, arma1, scalar_encoder):
        gen = optimal_feedback_generator(scalar_encoder, arma1, 5)
        with pytest.raises(DimensionMismatch):
            covariance_engine(scalar_encoder, gen, arma1, 6)


class TestOrthogonality:
    @pytest.mark.parametrize("channel, encoder", random_systems(6, 77, max_n=2))
    def test_inputs_orthogonal_to_past_outputs(self, channel, encoder):
        T = 30
        ledger = covariance_engine(encoder, optimal_feedback_generator(encoder, channel, T),
                                   channel, T)
        assert check_orthogonality(ledger) <= 1e-9

    def test_random_generators_are_not_orthogonal(self, arma1, scalar_encoder):
        T = 20
        values = [check_orthogonality(covariance_engine(scalar_encoder, gen, arma1, T))
                  for gen in negative_control_generators(T, 5)]
        assert min(values) > 1e-6


class TestMovingAverage:
    @pytest.mark.parametrize("m", [1, 2])
    def test_filtered_output_is_banded(self, m, rng, vector_encoder):
        T = 40
        channel = random_channel(rng, m)
        ledger = covariance_engine(vector_encoder,
                                   optimal_feedback_generator(vector_encoder, channel, T),
                                   channel, T)
        assert check_ma_banded(ledger, m) <= 1e-9


class TestEquivalence:
    @pytest.mark.parametrize("form", ["estimation", "control"])
    def test_forms_agree(self, form, arma1, vector_encoder):
        T = 20
        dim = vector_encoder.dim + T + 1
        coding = closed_loop_system("coding", vector_encoder, arma1, T, ("u", "e"))
        other = closed_loop_system(form, vector_encoder, arma1, T, ("u", "e"))
        assert check_t_equivalence(coding, other, T, dim) <= 1e-10

    def test_different_encoders_are_told_apart(self, arma1):
        T = 10
        first = closed_loop_system("coding", EncoderSpec.scalar(1.5, 1.0), arma1, T, ("u",))
        second = closed_loop_system("coding", EncoderSpec.scalar(1.2, 1.0), arma1, T, ("u",))
        assert check_t_equivalence(first, second, T, T + 2) > 1e-3

    def test_no_shared_signal(self):
        with pytest.raises(DimensionMismatch):
            check_t_equivalence(lambda x: {"a": x}, lambda x: {"b": x}, 2)

    def test_unknown_form(self, arma1, scalar_encoder):
        with pytest.raises(ValueError):
            closed_loop_system("bogus", scalar_encoder, arma1, 5)


def test_predictor_reduction(arma2, scalar_encoder):
    T = 20
    for gen in negative_control_generators(T, 20, seed=3):
        delta_rate, delta_power = check_predictor_reduction(
            LinearPolicy.from_encoder(scalar_encoder, gen.G_T), arma2, T)
        assert delta_rate <= 1e-9
        assert delta_power >= -1e-10


def test_steady_structure(arma1, vector_encoder):
    report = check_steady_structure(vector_encoder, arma1)
    assert report["closed_loop_radius"] < 1.0
    assert report["sigma_rank"] == report["unstable_count"]
    assert report["allpass_flatness"] <= 1e-6
    assert report["ke_relative_error"] <= 1e-8


class TestSuite:
    def test_negative_controls_are_seeded(self):
        first = negative_control_generators(10, 3, seed=4)
        again = negative_control_generators(10, 3, seed=4)
        other = negative_control_generators(10, 3, seed=5)
        assert all(np.array_equal(a.G_T, b.G_T) for a, b in zip(first, again))
        assert not np.array_equal(first[0].G_T, other[0].G_T)

    def test_default_cases_construct(self):
        cases = default_cases()
        assert [c.name for c in cases] == [
            "awgn_scalar", "arma1_scalar", "arma1_vector", "arma2_scalar"]
        for case in cases:
            k = case.encoder.dim
            assert np.linalg.matrix_rank(case.encoder.gamma(k - 1)) == k

    def test_default_cases_pass(self):
        summary = run_property_suite(default_cases(), tolerance=1e-9, max_workers=2, controls=5)
        assert summary["passed"], [
            (r["case"], name) for r in summary["cases"]
            for name, c in r["checks"].items() if not c["passed"]]
        assert [r["case"] for r in summary["cases"]] == [c.name for c in default_cases()]

    def test_loose_tolerance_is_recorded(self, arma1):
        case = PropertyCase("scalar", arma1, EncoderSpec.scalar(1.4, 1.0), 8)
        summary = run_property_suite([case], tolerance=1e-6, max_workers=1, controls=2)
        assert summary["tolerance"] == 1e-6
        assert summary["cases"][0]["checks"]["orthogonality"]["tolerance"] == 1e-6
