"""Tests for preamble stacking and least-squares channel estimation."""

import numpy as np
import pytest

from los_mimo_backhaul.channel_est.least_squares import ls_estimate, stack_preamble
from los_mimo_backhaul.errors import IllConditionedError, InvalidParameterError
from los_mimo_backhaul.link_sim.waveform import propagate_symbols
from los_mimo_backhaul.sequences.correlation import SequenceSet
from los_mimo_backhaul.sequences.design import design_preamble


@pytest.fixture(scope="module")
def preamble() -> SequenceSet:
    return design_preamble(4, 64, 1.0, max_iters=300, rng=4)


class TestStackPreamble:
    def test_zero_window_is_identity(self, preamble):
        stacked = stack_preamble(preamble, 0)
        np.testing.assert_array_equal(stacked.matrix, preamble.sequences)

    def test_dimensions(self, preamble):
        assert stack_preamble(preamble, 3).matrix.shape == (28, 64)

    def test_column_content(self, preamble):
        w = 2
        u = stack_preamble(preamble, w).matrix
        a = preamble.sequences
        k = 10
        for r in range(2 * w + 1):
            np.testing.assert_array_equal(u[4 * r : 4 * (r + 1), k], a[:, k + w - r])
        # a(k + W) runs off the end in the last column
        np.testing.assert_array_equal(u[:4, 63], 0.0)

    def test_window_too_wide(self, preamble):
        with pytest.raises(InvalidParameterError):
            stack_preamble(preamble.sequences[:, :4], 2)


class TestLsEstimate:
    def test_noiseless_exact(self, preamble, taps):
        received = propagate_symbols(preamble.sequences, taps)
        estimate = ls_estimate(received, stack_preamble(preamble, 1), reference_symbol=32)
        error = np.linalg.norm(estimate.taps - taps.taps) / np.linalg.norm(taps.taps)
        assert error < 1e-8
        assert estimate.reference_symbol == 32

    def test_constant_phase_absorbed(self, preamble, taps):
        phi_tx = np.array([0.1, -0.4, 1.0, 2.0])
        phi_rx = np.array([0.0, 0.3, -0.2, 0.7])
        received = propagate_symbols(
            preamble.sequences, taps, np.tile(phi_tx, (64, 1)), np.tile(phi_rx, (64, 1))
        )
        estimate = ls_estimate(received, stack_preamble(preamble, 1))
        np.testing.assert_allclose(estimate.taps, taps.rotated(phi_rx, phi_tx).taps, atol=1e-9)

    def test_matches_pseudo_inverse(self, preamble, rng):
        received = rng.standard_normal((4, 64)) + 1j * rng.standard_normal((4, 64))
        stacked = stack_preamble(preamble, 1)
        estimate = ls_estimate(received, stacked)
        oracle = received @ np.linalg.pinv(stacked.matrix)
        np.testing.assert_allclose(estimate.aggregate(), oracle, atol=1e-10)

    def test_residual_orthogonal_to_preamble(self, preamble, taps, rng):
        stacked = stack_preamble(preamble, 1)
        received = propagate_symbols(preamble.sequences, taps, sigma2=0.01, rng=rng)
        estimate = ls_estimate(received, stacked)
        residual = received - estimate.aggregate() @ stacked.matrix
        assert np.max(np.abs(residual @ stacked.matrix.conj().T)) < 1e-8 * np.linalg.norm(
            received
        )

    def test_singular_gram(self):
        stacked = stack_preamble(np.ones((2, 16), dtype=complex), 0)
        with pytest.raises(IllConditionedError):
            ls_estimate(np.ones((2, 16)), stacked)
