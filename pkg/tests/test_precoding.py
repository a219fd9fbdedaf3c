"""Tests for channel stacking, the AO transceiver, SVD baseline and SINR figures."""

import numpy as np
import pytest
from scipy.optimize import minimize

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.errors import NumericalDegeneracyError, SingularityError
from los_mimo_backhaul.link_sim.metrics import SinrAccumulator
from los_mimo_backhaul.link_sim.qam import random_qam
from los_mimo_backhaul.link_sim.receiver import decorrelate, effective_gains
from los_mimo_backhaul.link_sim.waveform import propagate_symbols
from los_mimo_backhaul.precoding.metrics import capped_rates, sinr, stream_sinrs, sum_rate
from los_mimo_backhaul.precoding.stacking import stack_channel, stack_received
from los_mimo_backhaul.precoding.svd import svd_baseline
from los_mimo_backhaul.precoding.wmmse import (
    ao_objective,
    initial_precoder,
    mse_matrix,
    optimize,
    update_decorrelator,
    update_gamma,
    update_precoder,
)
from tests.conftest import random_taps


def scalar_taps(h: complex = 1.0) -> ChannelTaps:
    return ChannelTaps(taps=np.full((1, 1, 1), h, dtype=complex), window_w=0)


def water_filling_capacity(gains: np.ndarray, sigma2: float, power: float) -> float:
    """Capacity of parallel Gaussian channels with power gains `gains`."""
    floors = np.sort(sigma2 / gains)
    for active in range(floors.size, 0, -1):
        level = (power + floors[:active].sum()) / active
        if level > floors[active - 1]:
            break
    return float(np.sum(np.log2(np.maximum(level / floors, 1.0))))


def solve_precoder_numerically(w, gamma, stacked, power_p, sigma2):
    """Generic SLSQP solution of the power-constrained precoder subproblem."""
    m, n_streams = stacked.blocks.shape[2], w.shape[1]
    hw = np.conj(np.transpose(stacked.blocks, (0, 2, 1))) @ w
    a = sum(block @ np.diag(gamma) @ block.conj().T for block in hw)
    b = stacked.principal.conj().T @ w @ np.diag(gamma)

    def unpack(v: np.ndarray) -> np.ndarray:
        return (v[: m * n_streams] + 1j * v[m * n_streams :]).reshape(m, n_streams)

    def objective(v: np.ndarray) -> float:
        return ao_objective(w, unpack(v), gamma, stacked, sigma2)

    def gradient(v: np.ndarray) -> np.ndarray:
        g = 2.0 * (a @ unpack(v) - b)
        return np.concatenate([g.real.ravel(), g.imag.ravel()])

    result = minimize(
        objective,
        np.zeros(2 * m * n_streams),
        jac=gradient,
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": lambda v: power_p - v @ v, "jac": lambda v: -2 * v}],
        options={"ftol": 1e-15, "maxiter": 1000},
    )
    return unpack(result.x)


class TestStacking:
    def test_block_layout(self, taps):
        stacked = stack_channel(taps, 2)
        n = taps.n_rx
        assert stacked.blocks.shape == (7, 4 * 5, 4)
        for v in (-3, 0, 2):
            for r in range(5):
                np.testing.assert_array_equal(
                    stacked.block(v)[r * n : (r + 1) * n], taps.tap(v + 2 - r)
                )
        assert stacked.interference().shape[0] == 6

    def test_stack_received_is_consistent_with_stacked_channel(self, taps, rng):
        x = rng.standard_normal((4, 40)) + 1j * rng.standard_normal((4, 40))
        y = propagate_symbols(x, taps)
        stacked = stack_channel(taps, 1)
        k = 20
        expected = sum(stacked.block(v) @ x[:, k - v] for v in range(-2, 3))
        np.testing.assert_allclose(stack_received(y, 1)[:, k], expected, atol=1e-12)


class TestScalarTransceiver:
    def test_full_power_point(self):
        design = optimize(scalar_taps(), sigma2=1.0, power_p=1.0, cap_bits=12, d=0)
        assert abs(design.precoder[0, 0]) == pytest.approx(1.0, rel=1e-6)
        stacked = stack_channel(scalar_taps(), 0)
        e = mse_matrix(design.decorrelator, design.precoder, stacked, 1.0)
        assert e[0, 0].real == pytest.approx(0.5, rel=1e-6)
        assert sinr(design, stacked, 1.0, 0) == pytest.approx(1.0, rel=1e-6)
        assert sum_rate(design, stacked, 1.0) == pytest.approx(1.0, rel=1e-6)

    def test_power_multiplier_binds(self):
        stacked = stack_channel(scalar_taps(), 0)
        f = update_precoder(np.ones((1, 1)), np.ones(1), stacked, power_p=0.25)
        assert f[0, 0].real == pytest.approx(0.5, rel=1e-8)

    def test_power_multiplier_slack(self):
        stacked = stack_channel(scalar_taps(), 0)
        f = update_precoder(np.ones((1, 1)), np.ones(1), stacked, power_p=4.0)
        assert f[0, 0].real == pytest.approx(1.0, rel=1e-8)


class TestAlternatingOptimization:
    def test_objective_monotone_and_power_feasible(self, taps):
        design = optimize(taps, sigma2=1e-3, power_p=1.0, cap_bits=12, d=1, max_iters=60)
        history = design.objective_history
        assert np.all(np.diff(history) <= 1e-9 * np.abs(history[0]) + 1e-12)
        power = np.real(np.vdot(design.precoder, design.precoder))
        assert power <= 1.0 * (1 + 1e-9)
        assert design.decorrelator.shape == (12, 4)

    def test_precoder_step_beats_feasible_alternatives(self, taps, rng):
        stacked = stack_channel(taps, 1)
        f0 = initial_precoder(4, 4, 1.0)
        w = update_decorrelator(f0, stacked, 1e-2)
        gamma = update_gamma(mse_matrix(w, f0, stacked, 1e-2), 12)
        best = update_precoder(w, gamma, stacked, 1.0)
        best_value = ao_objective(w, best, gamma, stacked, 1e-2)
        for _ in range(30):
            candidate = best + 0.05 * (
                rng.standard_normal(best.shape) + 1j * rng.standard_normal(best.shape)
            )
            candidate *= min(1.0, 1.0 / np.linalg.norm(candidate))
            assert ao_objective(w, candidate, gamma, stacked, 1e-2) >= best_value - 1e-9

    def test_every_step_is_nonincreasing(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            instance = random_taps(rng, decay=rng.uniform(0.05, 0.3))
            sigma2 = 10.0 ** rng.uniform(-3.0, -1.0)
            design = optimize(instance, sigma2, power_p=1.0, cap_bits=12, d=1, max_iters=25)
            values = design.step_history.ravel()
            slack = 1e-8 * np.maximum(1.0, np.abs(values[:-1]))
            assert np.all(np.diff(values) <= slack), f"seed {seed}"

    def test_first_step_uses_capped_weights(self, taps):
        design = optimize(taps, sigma2=1e-2, power_p=1.0, cap_bits=4, d=1, max_iters=1)
        stacked = stack_channel(taps, 1)
        f0 = initial_precoder(4, 4, 1.0)
        w = update_decorrelator(f0, stacked, 1e-2)
        expected = ao_objective(w, f0, np.full(4, 16.0), stacked, 1e-2)
        assert design.step_history[0, 0] == pytest.approx(expected)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("power_p", [0.05, 1.0])
    def test_precoder_matches_generic_solver(self, seed, power_p):
        rng = np.random.default_rng(seed)
        stacked = stack_channel(random_taps(rng, n=2, m=2), 1)
        sigma2 = 0.1
        f0 = initial_precoder(2, 2, power_p)
        w = update_decorrelator(f0, stacked, sigma2)
        gamma = update_gamma(mse_matrix(w, f0, stacked, sigma2), 12)
        closed_form = update_precoder(w, gamma, stacked, power_p)
        numerical = solve_precoder_numerically(w, gamma, stacked, power_p, sigma2)
        np.testing.assert_allclose(closed_form, numerical, atol=1e-5)
        assert np.real(np.vdot(closed_form, closed_form)) <= power_p * (1 + 1e-8)

    def test_decorrelator_is_stationary(self, taps):
        stacked = stack_channel(taps, 1)
        f = initial_precoder(4, 4, 1.0)
        w = update_decorrelator(f, stacked, 1e-2)
        step = 1e-6
        gradient = []
        for index in np.ndindex(w.shape):
            for direction in (1.0, 1j):
                delta = np.zeros_like(w)
                delta[index] = direction * step
                up = np.trace(mse_matrix(w + delta, f, stacked, 1e-2)).real
                down = np.trace(mse_matrix(w - delta, f, stacked, 1e-2)).real
                gradient.append((up - down) / (2 * step))
        assert np.max(np.abs(gradient)) < 1e-6

    def test_parallel_channels_reach_water_filling_capacity(self):
        amplitudes = np.array([2.0, 1.0, 0.5])
        diagonal = ChannelTaps(taps=np.diag(amplitudes).astype(complex)[None], window_w=0)
        sigma2, power_p = 0.1, 3.0
        design = optimize(
            diagonal, sigma2, power_p, cap_bits=40, d=0, max_iters=3000, tol=1e-14
        )
        rate = sum_rate(design, stack_channel(diagonal, 0), sigma2)
        capacity = water_filling_capacity(amplitudes**2, sigma2, power_p)
        assert rate == pytest.approx(capacity, abs=1e-3)

    def test_beats_svd_on_dispersive_channel(self, taps):
        stacked = stack_channel(taps, 1)
        proposed = optimize(taps, sigma2=1e-3, power_p=1.0, cap_bits=12, d=1)
        baseline = svd_baseline(taps, 1.0, memory_d=1)
        assert sum_rate(proposed, stacked, 1e-3) >= sum_rate(baseline, stacked, 1e-3)

    def test_gamma_capped(self):
        gamma = update_gamma(np.diag([1e-6, 0.5]), cap_bits=4)
        np.testing.assert_allclose(gamma, [16.0, 2.0])

    def test_gamma_rejects_nonpositive_mse(self):
        with pytest.raises(NumericalDegeneracyError):
            update_gamma(np.diag([0.0, 0.5]), 12)

    def test_noiseless_rank_deficient_channel(self):
        rank_one = ChannelTaps(taps=np.ones((1, 2, 2), dtype=complex), window_w=0)
        with pytest.raises(SingularityError):
            update_decorrelator(initial_precoder(2, 2, 1.0), stack_channel(rank_one, 0), 0.0)


class TestSvdBaseline:
    def test_diagonalizes_memoryless_channel(self, rng):
        h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        taps = ChannelTaps(taps=h[None], window_w=0)
        design = svd_baseline(taps, 1.0)
        gains = design.decorrelator.conj().T @ h @ design.precoder
        off = gains - np.diag(np.diag(gains))
        assert np.max(np.abs(off)) < 1e-10
        assert np.real(np.vdot(design.precoder, design.precoder)) == pytest.approx(1.0)

    def test_memory_positions_are_zero(self, taps):
        design = svd_baseline(taps, 1.0, memory_d=2)
        np.testing.assert_array_equal(design.decorrelator[:8], 0.0)
        np.testing.assert_array_equal(design.decorrelator[12:], 0.0)


class TestSinr:
    def test_capped_rates(self):
        rates = capped_rates(np.array([1.0, np.inf, 0.0]), 12)
        np.testing.assert_allclose(rates, [1.0, 12.0, 0.0])

    def test_prediction_matches_simulation(self, taps, rng):
        sigma2 = 1e-2
        design = optimize(taps, sigma2=sigma2, power_p=1.0, cap_bits=12, d=1, max_iters=30)
        stacked = stack_channel(taps, 1)
        symbols = np.vstack([random_qam(20000, 4, rng) for _ in range(4)])
        y = propagate_symbols(design.precoder @ symbols, taps, sigma2=sigma2, rng=rng)
        z = decorrelate(y, design)
        accumulator = SinrAccumulator(4)
        accumulator.add(z[:, 10:-10], symbols[:, 10:-10], effective_gains(design, stacked))
        predicted = 10 * np.log10(stream_sinrs(design, stacked, sigma2))
        np.testing.assert_allclose(accumulator.sinr_db(), predicted, atol=0.5)
