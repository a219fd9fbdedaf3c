"""Symbol-spaced tap representation of the continuous channel."""

from dataclasses import dataclass, replace

import numpy as np

from los_mimo_backhaul.channel.rummler import TwoPathChannel
from los_mimo_backhaul.errors import InvalidParameterError
from los_mimo_backhaul.models.params import PulseShape


@dataclass(frozen=True)
class ChannelTaps:
    """Taps H[w], w = -W..W, stored as an array of shape (2W+1, N, M)."""

    taps: np.ndarray
    window_w: int
    reference_symbol: int = 0

    def __post_init__(self) -> None:
        if self.taps.shape[0] != 2 * self.window_w + 1:
            raise InvalidParameterError("tap array must hold exactly 2W+1 matrices")

    @property
    def n_rx(self) -> int:
        return self.taps.shape[1]

    @property
    def m_tx(self) -> int:
        return self.taps.shape[2]

    @property
    def principal(self) -> np.ndarray:
        return self.taps[self.window_w]

    def tap(self, w: int) -> np.ndarray:
        """H[w], zero outside the window."""
        if abs(w) > self.window_w:
            return np.zeros((self.n_rx, self.m_tx), dtype=complex)
        return self.taps[w + self.window_w]

    def aggregate(self) -> np.ndarray:
        """Concatenation [H[-W], ..., H[W]] of shape N x (2W+1)M."""
        return np.concatenate(list(self.taps), axis=1)

    def rotated(self, phi_rx: np.ndarray, phi_tx: np.ndarray) -> "ChannelTaps":
        """Taps with per-antenna phases applied, diag(e^{j phi_rx}) H[w] diag(e^{j phi_tx})."""
        rot = np.exp(1j * (np.asarray(phi_rx)[:, None] + np.asarray(phi_tx)[None, :]))
        return replace(self, taps=self.taps * rot[None, :, :])

    @classmethod
    def from_aggregate(
        cls, aggregate: np.ndarray, window_w: int, reference_symbol: int = 0
    ) -> "ChannelTaps":
        n, cols = aggregate.shape
        m = cols // (2 * window_w + 1)
        taps = aggregate.reshape(n, 2 * window_w + 1, m).transpose(1, 0, 2)
        return cls(taps=np.ascontiguousarray(taps), window_w=window_w,
                   reference_symbol=reference_symbol)


def discretize_taps(
    channel: TwoPathChannel,
    pulse: PulseShape,
    residual_tx_to: np.ndarray,
    residual_rx_to: np.ndarray,
    window_w: int,
    reference_symbol: int = 0,
) -> ChannelTaps:
    """Sample the pulse-shaped channel at symbol spacing.

    [H[w]]_ij = H_los_ij g((w - dtau_ij)T) + H_nlos_ij g((w - dtau_ij - tau_d)T) with
    dtau_ij = residual_rx_to[i] + residual_tx_to[j] (in symbols).
    """
    if window_w < 0:
        raise InvalidParameterError(f"window must be nonnegative, got {window_w}")
    delays = np.asarray(residual_rx_to, float)[:, None] + np.asarray(residual_tx_to, float)[None, :]
    lags = np.arange(-window_w, window_w + 1, dtype=float)[:, None, None]
    taps = channel.los[None] * pulse.response(lags - delays[None])
    taps = taps + channel.nlos[None] * pulse.response(lags - delays[None] - channel.delay_symbols)
    return ChannelTaps(taps=taps, window_w=window_w, reference_symbol=reference_symbol)
