"""Tests for LoS, polarization, Rummler and tap discretization."""

import numpy as np
import pytest
from pydantic import ValidationError

from los_mimo_backhaul.channel.los import (
    apply_polarization,
    build_los_channel,
    build_los_channel_from_positions,
    cross_polar_gain,
)
from los_mimo_backhaul.channel.pulse import raised_cosine
from los_mimo_backhaul.channel.rummler import extend_rummler, single_path
from los_mimo_backhaul.channel.taps import ChannelTaps, discretize_taps
from los_mimo_backhaul.config import Settings, rayleigh_spacing
from los_mimo_backhaul.errors import InvalidGeometryError, InvalidParameterError
from los_mimo_backhaul.models.params import ArrayGeometry, PulseShape, RummlerParams


class TestLosChannel:
    def test_entries_are_unit_modulus(self):
        h = build_los_channel(Settings().geometry())
        assert h.shape == (8, 8)
        np.testing.assert_allclose(np.abs(h), 1.0, atol=1e-12)

    def test_same_path_length_gives_same_phase(self):
        tx = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        rx = np.array([[100.0, 0.0, 0.0], [100.0, 1.0, 0.0]])
        h = build_los_channel_from_positions(rx, tx, 0.013)
        assert h[0, 0] == pytest.approx(h[1, 1])
        assert h[0, 1] == pytest.approx(h[1, 0])

    def test_rayleigh_spacing_makes_response_nearly_orthogonal(self):
        settings = Settings()
        geometry = settings.geometry()
        h = build_los_channel(geometry)
        # co-located H/V modes share a dipole, so only one polarization block is orthogonal
        block = h[:4, :4]
        gram = block.conj().T @ block / 4
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) < 0.1

    def test_panel_layout(self):
        geometry = ArrayGeometry(n_rx=8, m_tx=8, element_spacing_m=0.5)
        tx = geometry.tx_positions()
        # dipoles 0 and 3 sit on opposite corners of the 2x2 grid
        assert np.linalg.norm(tx[3] - tx[0]) == pytest.approx(geometry.diagonal_spacing_m)
        np.testing.assert_allclose(tx[:4], tx[4:])
        assert np.all(geometry.rx_positions()[:, 0] == geometry.link_distance_m)

    def test_rayleigh_spacing_value(self):
        assert rayleigh_spacing(0.013, 3000.0, 2) == pytest.approx(np.sqrt(0.013 * 3000.0 / 2))

    def test_zero_wavelength_rejected(self):
        with pytest.raises(InvalidGeometryError):
            build_los_channel_from_positions(np.zeros((1, 3)), np.ones((1, 3)), 0.0)

    def test_coincident_antennas_rejected(self):
        with pytest.raises(InvalidGeometryError):
            build_los_channel_from_positions(np.zeros((1, 3)), np.zeros((1, 3)), 0.01)

    def test_odd_antenna_count_rejected(self):
        geometry = ArrayGeometry(n_rx=3, m_tx=4, element_spacing_m=0.5)
        with pytest.raises(InvalidGeometryError):
            build_los_channel(geometry)


class TestPolarization:
    def test_cross_polar_gain(self):
        assert cross_polar_gain(20.0) == pytest.approx(0.1)
        assert cross_polar_gain(float("inf")) == 0.0

    def test_blocks_weighted(self):
        h = apply_polarization(np.ones((4, 4), dtype=complex), 20.0)
        np.testing.assert_allclose(h[:2, :2], 1.0)
        np.testing.assert_allclose(h[:2, 2:], 0.1)
        np.testing.assert_allclose(h[2:, :2], 0.1)

    def test_cross_polar_link_is_xpd_below_co_polar(self):
        h = apply_polarization(np.ones((8, 8), dtype=complex), 20.0)
        ratio_db = 10 * np.log10(np.abs(h[0, 0]) ** 2 / np.abs(h[0, 4]) ** 2)
        assert ratio_db == pytest.approx(20.0)

    def test_odd_dimensions_rejected(self):
        with pytest.raises(InvalidParameterError):
            apply_polarization(np.ones((3, 4)), 20.0)


class TestRummler:
    def test_beta_from_notch_depth(self):
        assert RummlerParams(notch_depth_db=20.0).beta == pytest.approx(0.9)

    def test_delay_longer_than_symbol_rejected(self):
        with pytest.raises(ValidationError):
            RummlerParams(interpath_delay_s=50e-9, symbol_time_s=40e-9)

    def test_reflection_magnitude(self, rng):
        h = np.exp(1j * rng.uniform(0, 2 * np.pi, (4, 4)))
        channel = extend_rummler(h, RummlerParams(notch_depth_db=10.0), rng)
        np.testing.assert_allclose(np.abs(channel.nlos), RummlerParams().beta, rtol=1e-12)
        assert channel.delay_symbols == pytest.approx(6.3 / 40.0)


class TestPulse:
    def test_nyquist_zero_crossings(self):
        values = raised_cosine(np.arange(-4, 5), 0.25)
        expected = np.zeros(9)
        expected[4] = 1.0
        np.testing.assert_allclose(values, expected, atol=1e-12)

    def test_singular_points_are_finite(self):
        value = raised_cosine(1.0 / (2 * 0.25), 0.25)
        assert np.isfinite(value)

    def test_truncation(self):
        assert raised_cosine(5.5, 0.25, span=4) == 0.0


class TestTaps:
    def test_zero_offsets_single_path_is_memoryless(self):
        h = np.eye(2, dtype=complex)
        taps = discretize_taps(single_path(h), PulseShape(), np.zeros(2), np.zeros(2), 2)
        np.testing.assert_allclose(taps.principal, h, atol=1e-12)
        np.testing.assert_allclose(taps.tap(1), 0.0, atol=1e-12)
        np.testing.assert_allclose(taps.tap(5), 0.0)

    def test_fractional_offset_spreads_energy(self):
        h = np.ones((1, 1), dtype=complex)
        taps = discretize_taps(single_path(h), PulseShape(), np.array([0.5]), np.zeros(1), 2)
        assert abs(taps.tap(0)[0, 0]) == pytest.approx(abs(taps.tap(1)[0, 0]))

    def test_aggregate_layout(self, taps):
        aggregate = taps.aggregate()
        assert aggregate.shape == (4, 12)
        np.testing.assert_allclose(aggregate[:, 4:8], taps.principal)
        rebuilt = ChannelTaps.from_aggregate(aggregate, taps.window_w)
        np.testing.assert_allclose(rebuilt.taps, taps.taps)

    def test_rotation(self, taps):
        phi_rx = np.array([0.1, 0.2, 0.3, 0.4])
        phi_tx = np.array([-0.1, 0.0, 0.5, 1.0])
        rotated = taps.rotated(phi_rx, phi_tx)
        expected = taps.tap(-1)[2, 3] * np.exp(1j * (0.3 + 1.0))
        assert rotated.tap(-1)[2, 3] == pytest.approx(expected)

    def test_wrong_tap_count_rejected(self):
        with pytest.raises(InvalidParameterError):
            ChannelTaps(taps=np.zeros((2, 2, 2)), window_w=1)
