"""Tests for channel validation, realizations and Toeplitz operators."""

import numpy as np
import pytest

from feedback_lab.channel import (
    channel_state_space,
    factor_realizations,
    frequency_response,
    invert_realization,
    simulate_channel,
    simulate_colored,
    toeplitz_bundle,
    validate_channel,
)
from feedback_lab.channel.realization import (
    StateSpaceRealization,
    cascade,
    io_map,
    unit_circle_grid,
)
from feedback_lab.channel.spec import awgn
from feedback_lab.errors import DimensionMismatch, NotInvertible, NotMinimumPhase, NotStable

from conftest import random_channel


class TestValidateChannel:
    def test_awgn_has_no_memory(self):
        spec = awgn()
        assert spec.m == 0
        assert spec.is_awgn
        bundle = toeplitz_bundle(spec, 5)
        assert np.array_equal(bundle.Z_T, np.eye(6))
        assert np.array_equal(bundle.Zinv_T, np.eye(6))

    def test_numerator_root_outside_circle(self):
        with pytest.raises(NotMinimumPhase) as excinfo:
            validate_channel([1.5], [0.0])
        assert excinfo.value.modulus == pytest.approx(1.5)
        assert "1.5" in str(excinfo.value)

    def test_denominator_root_outside_circle(self):
        with pytest.raises(NotStable) as excinfo:
            validate_channel([0.5], [1.0])
        assert excinfo.value.modulus == pytest.approx(1.5)

    def test_root_on_margin_is_rejected(self):
        with pytest.raises(NotMinimumPhase):
            validate_channel([1.0], [-0.5])

    def test_unequal_lengths(self):
        with pytest.raises(DimensionMismatch):
            validate_channel([0.5, 0.1], [0.3])

    def test_coefficients_are_read_only(self, arma1):
        with pytest.raises(ValueError):
            arma1.f[0] = 0.0

    def test_transfer_functions_are_reciprocal(self, arma2):
        z = np.exp(1j * unit_circle_grid(16))
        assert np.allclose(arma2.transfer(z) * arma2.inverse_transfer(z), 1.0)


class TestRealizations:
    def test_canonical_realization_matches_inverse_filter(self, arma2):
        ss = channel_state_space(arma2)
        theta = unit_circle_grid(32)
        expected = arma2.inverse_transfer(np.exp(1j * theta))
        assert np.allclose(frequency_response(ss, theta), expected, atol=1e-12)

    def test_factor_impulse_responses_match_toeplitz_columns(self, arma2):
        T = 12
        bundle = toeplitz_bundle(arma2, T)
        factors = factor_realizations(arma2)
        assert np.allclose(factors["Z"].impulse_response(T), bundle.Z_T[:, 0])
        assert np.allclose(factors["Zinv"].impulse_response(T), bundle.Zinv_T[:, 0])
        assert np.allclose(factors["Zz"].impulse_response(T), bundle.Zz_T[:, 0])
        assert np.allclose(factors["Zp"].impulse_response(T), bundle.Zp_T[:, 0])

    def test_factorization_identities(self, arma2):
        residuals = toeplitz_bundle(arma2, 30).factorization_residuals()
        assert residuals["Z_Zinv"] <= 1e-12
        assert residuals["Zp_Z_minus_Zz"] <= 1e-12

    def test_first_order_bands(self):
        spec = validate_channel([0.1], [0.2])
        ss = channel_state_space(spec)
        assert ss.A_mat.tolist() == [[-0.1]]
        assert ss.B_vec.tolist() == [0.2]
        assert ss.C_vec.tolist() == [1.0]
        bundle = toeplitz_bundle(spec, 3)
        assert np.allclose(bundle.Zz_T[:, 0], [1.0, 0.1, 0.0, 0.0], atol=1e-15)
        assert np.allclose(bundle.Zp_T[:, 0], [1.0, 0.3, 0.0, 0.0], atol=1e-15)

    def test_factorization_on_random_channel(self):
        bundle = toeplitz_bundle(random_channel(np.random.default_rng(8), 3), 50)
        assert np.max(np.abs(bundle.Zp_T @ bundle.Z_T - bundle.Zz_T)) <= 1e-12
        assert np.max(np.abs(bundle.Z_T @ bundle.Zinv_T - np.eye(51))) <= 1e-12

    def test_double_inversion_returns_the_same_system(self, arma2):
        ss = channel_state_space(arma2)
        twice = invert_realization(invert_realization(ss))
        assert np.allclose(twice.impulse_response(30), ss.impulse_response(30), atol=1e-12)

    def test_colored_and_isi_views_agree(self, arma1, rng):
        u = rng.standard_normal(40)
        noise = rng.standard_normal(40)
        _, y_tilde, y = simulate_colored(arma1, u, noise)
        direct = simulate_channel(channel_state_space(arma1), u, noise)
        assert np.allclose(y, direct, atol=1e-12)
        Z = toeplitz_bundle(arma1, 39).Z_T
        assert np.allclose(y_tilde, u + Z @ noise, atol=1e-12)

    def test_simulation_equals_toeplitz_map(self, arma2, rng):
        u = rng.standard_normal(25)
        y = simulate_channel(channel_state_space(arma2), u, np.zeros(25))
        assert np.allclose(y, io_map(channel_state_space(arma2), 24) @ u, atol=1e-12)

    def test_cascade_with_inverse_is_identity(self, arma1):
        ss = channel_state_space(arma1)
        h = cascade(ss, invert_realization(ss)).impulse_response(10)
        assert h[0] == pytest.approx(1.0)
        assert np.allclose(h[1:], 0.0, atol=1e-12)

    def test_zero_feedthrough_cannot_be_inverted(self):
        ss = StateSpaceRealization.build([[0.5]], [1.0], [1.0], 0.0)
        with pytest.raises(NotInvertible):
            invert_realization(ss)

    def test_length_mismatch(self, arma1):
        with pytest.raises(DimensionMismatch):
            simulate_channel(channel_state_space(arma1), np.zeros(5), np.zeros(4))
