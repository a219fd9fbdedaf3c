"""Memory stacking of the tap channel for the decorrelator."""

from dataclasses import dataclass

import numpy as np

from los_mimo_backhaul.channel.taps import ChannelTaps


@dataclass(frozen=True)
class StackedTapChannel:
    """H_tilde[v], v = -(D+W)..(D+W), each N(2D+1) x M.

    Row block r of H_tilde[v] is H[v + D - r].
    """

    blocks: np.ndarray  # (2(D+W)+1, N(2D+1), M)
    memory_d: int
    window_w: int

    @property
    def span(self) -> int:
        return self.memory_d + self.window_w

    @property
    def principal(self) -> np.ndarray:
        return self.blocks[self.span]

    def block(self, v: int) -> np.ndarray:
        return self.blocks[v + self.span]

    def interference(self) -> np.ndarray:
        """All blocks except v = 0."""
        return np.delete(self.blocks, self.span, axis=0)


def stack_channel(taps: ChannelTaps, d: int) -> StackedTapChannel:
    span = d + taps.window_w
    blocks = np.empty((2 * span + 1, taps.n_rx * (2 * d + 1), taps.m_tx), dtype=complex)
    for index, v in enumerate(range(-span, span + 1)):
        blocks[index] = np.vstack([taps.tap(v + d - r) for r in range(2 * d + 1)])
    return StackedTapChannel(blocks=blocks, memory_d=d, window_w=taps.window_w)


def stack_received(y: np.ndarray, d: int) -> np.ndarray:
    """Stack y(k+D), ..., y(k-D) per column k, zero outside the observed range.

    Args:
        y: Received symbols, shape (N, K).

    Returns:
        Array of shape (N(2D+1), K).
    """
    n, k = y.shape
    stacked = np.zeros((n * (2 * d + 1), k), dtype=complex)
    for r in range(2 * d + 1):
        shift = d - r
        rows = slice(r * n, (r + 1) * n)
        if abs(shift) >= k:
            continue
        if shift >= 0:
            stacked[rows, : k - shift] = y[:, shift:]
        else:
            stacked[rows, -shift:] = y[:, : k + shift]
    return stacked
