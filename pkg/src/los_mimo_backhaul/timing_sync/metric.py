"""Preamble correlation metric over candidate sample shifts."""

import numpy as np

from los_mimo_backhaul.errors import InvalidParameterError


def correlation_metric(rx_samples: np.ndarray, preamble: np.ndarray, shift: int, q: int) -> float:
    """Lambda(s) = |sum_k conj(a(k)) y(kQ + s)|^2 for one receive stream.

    Raises:
        InvalidParameterError: When the stream ends before the last preamble sample.
    """
    length = preamble.size
    last = (length - 1) * q + shift
    if shift < 0 or last >= rx_samples.size:
        raise InvalidParameterError(
            f"need {last + 1} samples for shift {shift}, stream has {rx_samples.size}"
        )
    picked = rx_samples[shift : last + 1 : q]
    return float(np.abs(np.vdot(preamble, picked)) ** 2)


def correlation_metrics(
    rx_samples: np.ndarray, preambles: np.ndarray, n_shifts: int, q: int
) -> np.ndarray:
    """Metric for every (receive antenna, sequence, shift) triple.

    Args:
        rx_samples: Streams at Q samples per symbol, shape (N, n_samples).
        preambles: Sequences, shape (M, L_t).
        n_shifts: Shifts 0..n_shifts-1 are evaluated.
        q: Oversampling factor.

    Returns:
        Array of shape (N, M, n_shifts).
    """
    rx_samples = np.atleast_2d(rx_samples)
    length = preambles.shape[1]
    needed = (length - 1) * q + n_shifts
    if needed > rx_samples.shape[1]:
        raise InvalidParameterError(
            f"need {needed} samples for {n_shifts} shifts, stream has {rx_samples.shape[1]}"
        )
    index = np.arange(n_shifts)[:, None] + q * np.arange(length)[None, :]
    windows = rx_samples[:, index]  # (N, S, L)
    return np.abs(np.einsum("nsl,ml->nms", windows, np.conj(preambles))) ** 2
