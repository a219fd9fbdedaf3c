"""Aperiodic correlation of preamble sequences."""

from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from los_mimo_backhaul.errors import InvalidParameterError
from los_mimo_backhaul.models.report import IsolationReport

ISOLATION_FLOOR_DB = -300.0


@dataclass(frozen=True)
class SequenceSet:
    """M unimodular sequences of length L_t, one per transmit antenna."""

    sequences: np.ndarray  # (M, L_t)
    lag_window: int
    family: str = "designed"
    objective_history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def m(self) -> int:
        return self.sequences.shape[0]

    @property
    def length(self) -> int:
        return self.sequences.shape[1]

    def truncated(self, length: int) -> np.ndarray:
        """First ``length`` symbols of every sequence (pilot construction)."""
        return self.sequences[:, :length].copy()


def correlation(a: np.ndarray, b: np.ndarray, lag: int) -> complex:
    """eta_ab(l) = sum_k a(k+l) conj(b(k))."""
    if a.shape != b.shape:
        raise InvalidParameterError("sequences must have equal length")
    length = a.size
    if abs(lag) >= length:
        raise InvalidParameterError(f"lag {lag} outside (-{length}, {length})")
    if lag >= 0:
        return complex(np.sum(a[lag:] * np.conj(b[: length - lag])))
    return complex(np.sum(a[: length + lag] * np.conj(b[-lag:])))


def cross_correlations(sequences: np.ndarray) -> np.ndarray:
    """All pairwise correlations via a zero-padded FFT.

    Returns:
        Array r of shape (M, M, 2L) with r[a, b, l mod 2L] = eta_ab(l).
    """
    n_fft = 2 * sequences.shape[1]
    spectra = fft.fft(sequences, n=n_fft, axis=1)
    return fft.ifft(spectra[:, None, :] * np.conj(spectra)[None, :, :], axis=2)


def correlation_profile(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Correlation at every lag -(L-1)..L-1.

    Returns:
        (lags, values).
    """
    if a.shape != b.shape:
        raise InvalidParameterError("sequences must have equal length")
    length = a.size
    r = cross_correlations(np.vstack([a, b]))[0, 1]
    lags = np.arange(-(length - 1), length)
    return lags, r[lags % (2 * length)]


def isolation_report(seq_set: SequenceSet, window: int | None = None) -> IsolationReport:
    """Worst in-window correlation per pair relative to L_t, excluding the auto peak."""
    window = seq_set.lag_window if window is None else window
    length = seq_set.length
    r = cross_correlations(seq_set.sequences)
    lags = np.arange(-window, window + 1) % (2 * length)
    magnitudes = np.abs(r[:, :, lags])
    m = seq_set.m
    diag = np.arange(m)
    magnitudes[diag, diag, window] = 0.0  # lag-0 entry sits at index `window`
    peak = magnitudes.max(axis=2) / length
    with np.errstate(divide="ignore"):
        pair_db = np.maximum(20.0 * np.log10(peak), ISOLATION_FLOOR_DB)
    off = ~np.eye(m, dtype=bool)
    worst_cross = float(pair_db[off].max()) if m > 1 else ISOLATION_FLOOR_DB
    worst_auto = float(np.diag(pair_db).max()) if window > 0 else ISOLATION_FLOOR_DB
    return IsolationReport(
        family=seq_set.family,
        lag_window=window,
        pair_db=pair_db.tolist(),
        worst_auto_db=worst_auto,
        worst_cross_db=worst_cross,
    )
