"""Wiener phase noise of the local oscillators."""

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class PhaseNoiseState:
    """Oscillator phases at one sample index."""

    theta_tx: np.ndarray
    theta_rx: np.ndarray
    sigma2_per_sample: float
    sample_index: int = 0


@dataclass(frozen=True)
class PhaseTrajectory:
    """Phases for consecutive samples, rows indexed from the start state."""

    theta_tx: np.ndarray  # (n_steps + 1, M)
    theta_rx: np.ndarray  # (n_steps + 1, N)


def phn_variance(c_3db_hz: float, t_s: float) -> float:
    """Increment variance 2 pi c T_s of a free-running oscillator."""
    return 2.0 * math.pi * c_3db_hz * t_s


def initial_phase_noise(
    n: int, m: int, sigma2_per_sample: float, rng: np.random.Generator
) -> PhaseNoiseState:
    """Start state with phases uniform on [0, 2 pi)."""
    return PhaseNoiseState(
        theta_tx=rng.uniform(0.0, 2.0 * np.pi, size=m),
        theta_rx=rng.uniform(0.0, 2.0 * np.pi, size=n),
        sigma2_per_sample=sigma2_per_sample,
    )


def phase_noise_trajectory(
    state: PhaseNoiseState, n_steps: int, rng: np.random.Generator
) -> tuple[PhaseTrajectory, PhaseNoiseState]:
    """Random-walk the phases for n_steps samples.

    Returns:
        The trajectory including the start row, and the state after the last step.
    """
    std = math.sqrt(state.sigma2_per_sample)
    m, n = state.theta_tx.size, state.theta_rx.size
    steps = rng.normal(0.0, std, size=(n_steps, m + n)) if std > 0 else np.zeros((n_steps, m + n))
    start = np.concatenate([state.theta_tx, state.theta_rx])
    walk = start + np.vstack([np.zeros((1, m + n)), np.cumsum(steps, axis=0)])
    trajectory = PhaseTrajectory(theta_tx=walk[:, :m], theta_rx=walk[:, m:])
    final = replace(
        state,
        theta_tx=walk[-1, :m].copy(),
        theta_rx=walk[-1, m:].copy(),
        sample_index=state.sample_index + n_steps,
    )
    return trajectory, final
