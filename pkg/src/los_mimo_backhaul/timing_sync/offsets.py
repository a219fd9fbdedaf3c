"""Sum-offset estimation by peak picking and per-antenna recovery by least squares."""

import math
from dataclasses import dataclass

import numpy as np
import structlog
from scipy.linalg import cho_factor, cho_solve

from los_mimo_backhaul.errors import DegenerateInputError
from los_mimo_backhaul.sequences.correlation import SequenceSet
from los_mimo_backhaul.timing_sync.metric import correlation_metrics

logger = structlog.get_logger()


@dataclass(frozen=True)
class SumOffsetMatrix:
    """Per-link offsets tau_rx[i] + tau_tx[j] in symbols, ordered i-major."""

    gamma: np.ndarray
    n_rx: int
    m_tx: int
    resolution: float

    @property
    def matrix(self) -> np.ndarray:
        return self.gamma.reshape(self.n_rx, self.m_tx)


def incidence_matrix(n: int, m: int) -> np.ndarray:
    """[I_N kron 1_M | 1_N kron I_M], mapping per-antenna offsets to link sums."""
    return np.hstack([
        np.kron(np.eye(n), np.ones((m, 1))),
        np.kron(np.ones((n, 1)), np.eye(m)),
    ])


def estimate_sum_offsets(
    rx: np.ndarray, seq_set: SequenceSet, tau_max: float, q: int
) -> SumOffsetMatrix:
    """Pick the highest correlation peak per link over shifts 0..ceil(2 Q tau_max).

    Ties resolve to the smallest shift.

    Raises:
        DegenerateInputError: When a receive stream is identically zero.
    """
    rx = np.atleast_2d(rx)
    silent = np.flatnonzero(~np.any(rx != 0, axis=1))
    if silent.size:
        raise DegenerateInputError(f"receive stream(s) {silent.tolist()} carry no signal")
    n_shifts = math.ceil(2.0 * q * tau_max) + 1
    metrics = correlation_metrics(rx, seq_set.sequences, n_shifts, q)
    peaks = np.argmax(metrics, axis=2)
    return SumOffsetMatrix(
        gamma=(peaks / q).ravel(), n_rx=rx.shape[0], m_tx=seq_set.m, resolution=1.0 / q
    )


def solve_per_antenna(gamma_hat: SumOffsetMatrix) -> np.ndarray:
    """Least-squares per-antenna offsets [tau_rx; tau_tx] with tau_rx[0] = 0.

    The constrained column is deleted and the reduced normal equations, which
    have full rank, are solved by Cholesky factorization.
    """
    n, m = gamma_hat.n_rx, gamma_hat.m_tx
    reduced = incidence_matrix(n, m)[:, 1:]
    factor = cho_factor(reduced.T @ reduced)
    tau = np.zeros(n + m)
    tau[1:] = cho_solve(factor, reduced.T @ gamma_hat.gamma)
    return tau


def reconstruct_sum_offsets(tau_hat: np.ndarray, n: int, m: int) -> np.ndarray:
    """gamma_tilde = I_NM tau_hat."""
    return incidence_matrix(n, m) @ tau_hat


def sum_offset_rmse(gamma_hat: np.ndarray, gamma: np.ndarray, n: int) -> float:
    """sqrt(||gamma_hat - gamma||^2 / N^2) for one realization."""
    return float(np.sqrt(np.sum((np.asarray(gamma_hat) - np.asarray(gamma)) ** 2) / n**2))
