"""Per-stream SINR and capped sum-rate of a transceiver design."""

import numpy as np

from los_mimo_backhaul.precoding.stacking import StackedTapChannel
from los_mimo_backhaul.precoding.wmmse import TransceiverDesign


def stream_sinrs(
    design: TransceiverDesign, stacked: StackedTapChannel, sigma2: float
) -> np.ndarray:
    """Linear SINR of every stream.

    The denominator holds the intra-tap MAI from the other streams, the cross-tap
    ISI of all streams and the filtered noise sigma2 ||w_m||^2.
    """
    w, f = design.decorrelator, design.precoder
    gains = w.conj().T @ stacked.principal @ f  # (Ns, Ns)
    power = np.abs(gains) ** 2
    signal = np.diag(power)
    mai = power.sum(axis=1) - signal
    leak = np.abs(w.conj().T[None] @ stacked.interference() @ f[None]) ** 2
    isi = leak.sum(axis=(0, 2))
    noise = sigma2 * np.sum(np.abs(w) ** 2, axis=0)
    denominator = mai + isi + noise
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = np.where(denominator > 0.0, signal / denominator, np.inf)
    return np.where(signal > 0.0, sinr, 0.0)


def sinr(
    design: TransceiverDesign, stacked: StackedTapChannel, sigma2: float, stream: int
) -> float:
    return float(stream_sinrs(design, stacked, sigma2)[stream])


def capped_rates(sinrs: np.ndarray, cap_bits: float) -> np.ndarray:
    """min(log2(1 + SINR), cap) per stream."""
    return np.minimum(np.log2(1.0 + np.asarray(sinrs, dtype=float)), cap_bits)


def sum_rate(design: TransceiverDesign, stacked: StackedTapChannel, sigma2: float) -> float:
    """Capped sum-rate in bits/s/Hz."""
    return float(np.sum(capped_rates(stream_sinrs(design, stacked, sigma2), design.cap_bits)))
