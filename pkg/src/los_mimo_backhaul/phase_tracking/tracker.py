"""Accumulated phase-noise ledger with decision-feedback tracking."""

from dataclasses import dataclass, replace

import numpy as np

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.errors import InvalidParameterError
from los_mimo_backhaul.phase_tracking.linearized import build_system, estimate_increment_pilot
from los_mimo_backhaul.precoding.stacking import StackedTapChannel
from los_mimo_backhaul.precoding.wmmse import TransceiverDesign


@dataclass(frozen=True)
class PhaseEstimate:
    """Per-antenna phases [rx; tx] accumulated since the preamble, plus the common phase.

    The first receive antenna is the reference and stays at zero.
    """

    phi: np.ndarray
    n_rx: int
    common_phase: float = 0.0
    subframe_q: int = 0
    block_p: int = 0

    @classmethod
    def initial(cls, n_rx: int, m_tx: int) -> "PhaseEstimate":
        return cls(phi=np.zeros(n_rx + m_tx), n_rx=n_rx)

    @property
    def rx(self) -> np.ndarray:
        return self.phi[: self.n_rx]

    @property
    def tx(self) -> np.ndarray:
        return self.phi[self.n_rx :]

    def sum_phases(self) -> np.ndarray:
        """phi_rx[i] + phi_tx[j], i-major."""
        return (self.rx[:, None] + self.tx[None, :]).ravel()

    def with_increment(self, delta: np.ndarray) -> "PhaseEstimate":
        """The estimate moved by ``delta`` without advancing the frame position."""
        delta = np.asarray(delta, dtype=float)
        return replace(
            self,
            phi=self.phi + delta,
            common_phase=self.common_phase + float(delta[0] + delta[self.n_rx]),
        )


def accumulate(prev: PhaseEstimate, delta: np.ndarray) -> PhaseEstimate:
    """phi[q+1] = phi[q] + dphi[q]; the common phase books the first link's increment."""
    moved = prev.with_increment(delta)
    return replace(moved, subframe_q=prev.subframe_q + 1, block_p=0)


def estimate_increment_dfb(
    design: TransceiverDesign,
    taps: ChannelTaps | StackedTapChannel,
    detected_block: np.ndarray,
    rx_block: np.ndarray,
    refine_steps: int = 0,
) -> np.ndarray:
    """Pilot estimator fed with detected data symbols S; the virtual pilots are F S."""
    system = build_system(design, taps, design.precoder @ detected_block)
    return estimate_increment_pilot(system, rx_block, refine_steps)


def fuse_moving_average(history: PhaseEstimate, dfb: PhaseEstimate, alpha: float) -> PhaseEstimate:
    """(1 - alpha) history + alpha dfb for the per-antenna and common phases.

    Raises:
        InvalidParameterError: When alpha is outside [0, 1].
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha}")
    return replace(
        history,
        phi=(1.0 - alpha) * history.phi + alpha * dfb.phi,
        common_phase=(1.0 - alpha) * history.common_phase + alpha * dfb.common_phase,
        block_p=history.block_p + 1,
    )
