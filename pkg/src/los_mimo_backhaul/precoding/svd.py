"""SVD transceiver on the principal tap."""

import numpy as np

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.precoding.wmmse import TransceiverDesign


def svd_baseline(
    taps: ChannelTaps,
    power_p: float,
    memory_d: int = 0,
    cap_bits: float = 12.0,
    n_streams: int | None = None,
) -> TransceiverDesign:
    """Right singular vectors with uniform power; left singular vectors at the centre tap.

    The decorrelator is zero at every memory position except r = D.
    """
    n, m = taps.n_rx, taps.m_tx
    n_streams = n_streams or min(n, m)
    u, _, vh = np.linalg.svd(taps.principal)
    f = vh.conj().T[:, :n_streams] * np.sqrt(power_p / n_streams)
    w = np.zeros((n * (2 * memory_d + 1), n_streams), dtype=complex)
    w[memory_d * n : (memory_d + 1) * n] = u[:, :n_streams]
    return TransceiverDesign(
        precoder=f,
        decorrelator=w,
        gamma=np.ones(n_streams),
        memory_d=memory_d,
        power_p=power_p,
        cap_bits=cap_bits,
    )
