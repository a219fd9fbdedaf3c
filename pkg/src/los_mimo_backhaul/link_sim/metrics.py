"""Simulator-side performance figures."""

from dataclasses import dataclass

import numpy as np

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.link_sim.qam import qam_demodulate
from los_mimo_backhaul.link_sim.receiver import effective_gains
from los_mimo_backhaul.precoding.stacking import stack_channel
from los_mimo_backhaul.precoding.wmmse import TransceiverDesign

SINR_CLAMP_DB = 100.0


def wrap_phase(phase: np.ndarray) -> np.ndarray:
    """Map angles to (-pi, pi]."""
    return -np.angle(np.exp(-1j * np.asarray(phase)))


class SinrAccumulator:
    """Ratio-of-sums SINR per stream: desired-projection power over residual power."""

    def __init__(self, n_streams: int) -> None:
        self.desired = np.zeros(n_streams)
        self.residual = np.zeros(n_streams)

    def add(self, z: np.ndarray, symbols: np.ndarray, desired_gains: np.ndarray) -> None:
        wanted = desired_gains[:, None] * symbols
        self.desired += np.sum(np.abs(wanted) ** 2, axis=1)
        self.residual += np.sum(np.abs(z - wanted) ** 2, axis=1)

    def sinr_db(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = 10.0 * np.log10(self.desired / self.residual)
        ratio = np.where(self.desired > 0.0, ratio, -SINR_CLAMP_DB)
        return np.clip(np.nan_to_num(ratio, posinf=SINR_CLAMP_DB), -SINR_CLAMP_DB, SINR_CLAMP_DB)


@dataclass(frozen=True)
class ReceivedStreams:
    """Decorrelator outputs z (Ns x K) and the symbols sent on each stream."""

    z: np.ndarray
    symbols: np.ndarray


def measure_per_stream_sinr(
    rx_stream: ReceivedStreams,
    design: TransceiverDesign,
    taps: ChannelTaps,
    phn_truth: tuple[np.ndarray, np.ndarray],
) -> np.ndarray:
    """SINR (dB) of each stream against the true channel, clamped to +-100 dB.

    The desired gain of stream m is [W^H H0 F]_mm on the true taps rotated by the
    true (rx, tx) phase drift; everything else in z counts as residual.
    """
    phi_rx, phi_tx = phn_truth
    stacked = stack_channel(taps.rotated(phi_rx, phi_tx), design.memory_d)
    accumulator = SinrAccumulator(rx_stream.z.shape[0])
    accumulator.add(rx_stream.z, rx_stream.symbols, effective_gains(design, stacked))
    return accumulator.sinr_db()


def count_bit_errors(
    detected: np.ndarray, sent: np.ndarray, qam_levels: list[int]
) -> tuple[int, int]:
    """(bit errors, bits) over the streams that carry data."""
    errors = 0
    total = 0
    for m, level in enumerate(qam_levels):
        if level == 0:
            continue
        sent_bits = qam_demodulate(sent[m], level)
        errors += int(np.count_nonzero(qam_demodulate(detected[m], level) != sent_bits))
        total += sent_bits.size
    return errors, total


def extract_sum_phases(h_current: np.ndarray, h_reference: np.ndarray) -> np.ndarray:
    """angle(vec(H_q[0])) - angle(vec(H[0])) wrapped, ordered i-major."""
    return wrap_phase(np.angle(h_current).ravel() - np.angle(h_reference).ravel())


def sum_phase_rmse(estimated: np.ndarray, truth: np.ndarray) -> float:
    """RMS of the wrapped difference between sum-phase vectors."""
    error = wrap_phase(np.asarray(estimated) - np.asarray(truth))
    return float(np.sqrt(np.mean(error**2)))
