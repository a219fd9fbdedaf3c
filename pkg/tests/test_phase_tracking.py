"""Tests for the linearized PHN estimator, decision-feedback tracking and FDD corrections."""

import numpy as np
import pytest

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.errors import InvalidParameterError
from los_mimo_backhaul.link_sim.qam import random_qam
from los_mimo_backhaul.link_sim.receiver import decorrelate
from los_mimo_backhaul.link_sim.waveform import propagate_symbols
from los_mimo_backhaul.phase_tracking.fdd import plan_fdd_compensation
from los_mimo_backhaul.phase_tracking.linearized import (
    build_system,
    estimate_increment_pilot,
    solve_increment,
)
from los_mimo_backhaul.phase_tracking.tracker import (
    PhaseEstimate,
    accumulate,
    estimate_increment_dfb,
    fuse_moving_average,
)
from los_mimo_backhaul.precoding.wmmse import optimize


@pytest.fixture
def memoryless(rng):
    h = 2.0 * np.eye(4) + 0.3 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    taps = ChannelTaps(taps=h[None], window_w=0)
    design = optimize(taps, sigma2=1e-3, power_p=1.0, cap_bits=12, d=0, max_iters=30)
    return taps, design


def rotated_outputs(taps, design, symbols, phases):
    n = taps.n_rx
    k = symbols.shape[1]
    theta_rx = np.tile(phases[:n], (k, 1))
    theta_tx = np.tile(phases[n:], (k, 1))
    y = propagate_symbols(design.precoder @ symbols, taps, theta_tx, theta_rx)
    return decorrelate(y, design)


def true_increment(rng, scale):
    phases = scale * rng.standard_normal(8)
    phases[0] = 0.0
    return phases


class TestPilotEstimator:
    def test_gauss_newton_recovers_phases(self, memoryless, rng):
        taps, design = memoryless
        pilots = np.vstack([random_qam(32, 4, rng) for _ in range(4)])
        phases = true_increment(rng, 0.05)
        z = rotated_outputs(taps, design, pilots, phases)
        system = build_system(design, taps, design.precoder @ pilots)
        estimate = estimate_increment_pilot(system, z, refine_steps=4)
        np.testing.assert_allclose(estimate, phases, atol=1e-8)

    def test_first_order_error_decays_quadratically(self, memoryless, rng):
        taps, design = memoryless
        pilots = np.vstack([random_qam(32, 4, rng) for _ in range(4)])
        direction = true_increment(rng, 1.0)
        system = build_system(design, taps, design.precoder @ pilots)
        errors = []
        for scale in (0.02, 0.002):
            z = rotated_outputs(taps, design, pilots, scale * direction)
            errors.append(np.linalg.norm(solve_increment(system, z) - scale * direction))
        assert errors[1] < 0.03 * errors[0]

    def test_reference_antenna_stays_zero(self, memoryless, rng):
        taps, design = memoryless
        pilots = np.vstack([random_qam(16, 4, rng) for _ in range(4)])
        z = rotated_outputs(taps, design, pilots, true_increment(rng, 0.01))
        system = build_system(design, taps, design.precoder @ pilots)
        assert estimate_increment_pilot(system, z)[0] == 0.0

    def test_relinearized_system_moves_operating_point(self, memoryless, rng):
        taps, design = memoryless
        pilots = np.vstack([random_qam(16, 4, rng) for _ in range(4)])
        phases = true_increment(rng, 0.2)
        system = build_system(design, taps, design.precoder @ pilots)
        moved = system.relinearized(phases)
        z = rotated_outputs(taps, design, pilots, phases)
        np.testing.assert_allclose(moved.zeta, z.T.reshape(-1), atol=1e-10)

    def test_silent_pilot_falls_back_to_regularized_solve(self, memoryless):
        taps, design = memoryless
        system = build_system(design, taps, np.zeros((4, 8)))
        delta = solve_increment(system, np.zeros((4, 8)))
        np.testing.assert_allclose(delta, 0.0)


class TestDecisionFeedback:
    def test_detected_symbols_act_as_pilots(self, memoryless, rng):
        taps, design = memoryless
        block = np.vstack([random_qam(64, 16, rng) for _ in range(4)])
        phases = true_increment(rng, 0.02)
        z = rotated_outputs(taps, design, block, phases)
        delta = estimate_increment_dfb(design, taps, block, z, refine_steps=3)
        np.testing.assert_allclose(delta, phases, atol=1e-8)


class TestPhaseEstimate:
    def test_accumulate_books_common_phase(self):
        estimate = PhaseEstimate.initial(2, 2)
        moved = accumulate(estimate, np.array([0.0, 0.1, 0.2, 0.3]))
        assert moved.common_phase == pytest.approx(0.2)
        assert moved.subframe_q == 1
        np.testing.assert_allclose(moved.sum_phases(), [0.2, 0.3, 0.3, 0.4])

    def test_moving_average_weights(self):
        history = PhaseEstimate(phi=np.zeros(4), n_rx=2)
        dfb = PhaseEstimate(phi=np.ones(4), n_rx=2, common_phase=1.0)
        fused = fuse_moving_average(history, dfb, 0.25)
        np.testing.assert_allclose(fused.phi, 0.25)
        assert fused.common_phase == pytest.approx(0.25)
        assert fused.block_p == 1
        np.testing.assert_allclose(fuse_moving_average(history, dfb, 0.0).phi, 0.0)
        np.testing.assert_allclose(fuse_moving_average(history, dfb, 1.0).phi, 1.0)

    def test_alpha_outside_unit_interval(self):
        estimate = PhaseEstimate.initial(2, 2)
        with pytest.raises(InvalidParameterError):
            fuse_moving_average(estimate, estimate, 1.5)


def link_estimates(
    theta_rx: np.ndarray, theta_tx: np.ndarray, gauge: float = 0.0
) -> PhaseEstimate:
    """Noiseless estimate of one direction, referenced to the first receive antenna."""
    rx = theta_rx - theta_rx[0] + gauge
    tx = theta_tx + theta_rx[0] - gauge
    return PhaseEstimate(
        phi=np.concatenate([rx, tx]), n_rx=theta_rx.size, common_phase=rx[0] + tx[0]
    )


class TestFddCompensation:
    def test_receive_side_adds_common_phase(self):
        receive = PhaseEstimate(phi=np.array([0.0, 0.4, 0.1, 0.2]), n_rx=2, common_phase=0.1)
        transmit = PhaseEstimate(phi=np.array([0.0, 0.3, 0.1, 0.5]), n_rx=2, common_phase=0.1)
        corrections = plan_fdd_compensation(receive, transmit)
        np.testing.assert_allclose(corrections.rx, [0.1, 0.5])
        np.testing.assert_allclose(corrections.tx, [0.0, 0.4])

    def test_common_phase_can_be_disabled(self):
        estimate = PhaseEstimate(phi=np.array([0.0, 0.4, 0.1, 0.2]), n_rx=2, common_phase=0.1)
        corrections = plan_fdd_compensation(estimate, estimate, apply_common_phase=False)
        np.testing.assert_allclose(corrections.rx, corrections.tx)

    def test_both_directions_are_averaged(self):
        receive = PhaseEstimate(phi=np.array([0.0, 0.2, 0.0, 0.0]), n_rx=2, common_phase=0.1)
        transmit = PhaseEstimate(phi=np.array([0.0, 0.0, 0.3, 0.7]), n_rx=2, common_phase=0.3)
        corrections = plan_fdd_compensation(receive, transmit)
        # local = ([0, 0.2] + [0.3, 0.7] - 0.3) / 2, common = (0.1 + 0.3) / 2
        np.testing.assert_allclose(corrections.tx, [0.0, 0.3])
        np.testing.assert_allclose(corrections.rx, [0.2, 0.5])

    def test_antenna_count_mismatch(self):
        receive = PhaseEstimate.initial(2, 4)
        transmit = PhaseEstimate.initial(2, 4)
        with pytest.raises(InvalidParameterError):
            plan_fdd_compensation(receive, transmit)

    @pytest.mark.parametrize("gauge", [(0.0, 0.0), (0.05, -0.02)])
    def test_both_sites_cancel_true_link_phases(self, rng, gauge):
        # per-antenna phases of site A (4) and site B (4)
        theta_a = rng.uniform(-0.1, 0.1, 4)
        theta_b = rng.uniform(-0.1, 0.1, 4)
        uplink = link_estimates(theta_b, theta_a, gauge[0])
        downlink = link_estimates(theta_a, theta_b, gauge[1])
        site_b = plan_fdd_compensation(uplink, downlink)
        site_a = plan_fdd_compensation(downlink, uplink)
        uplink_links = site_b.rx[:, None] + site_a.tx[None, :]
        np.testing.assert_allclose(uplink_links, theta_b[:, None] + theta_a[None, :], atol=1e-12)
        downlink_links = site_a.rx[:, None] + site_b.tx[None, :]
        np.testing.assert_allclose(downlink_links, theta_a[:, None] + theta_b[None, :], atol=1e-12)
