"""Transceiver methods the end-to-end simulator can run side by side."""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.link_sim.receiver import effective_gains
from los_mimo_backhaul.phase_tracking.linearized import build_system, estimate_increment_pilot
from los_mimo_backhaul.phase_tracking.tracker import (
    PhaseEstimate,
    accumulate,
    estimate_increment_dfb,
    fuse_moving_average,
)
from los_mimo_backhaul.precoding.stacking import StackedTapChannel, stack_channel
from los_mimo_backhaul.precoding.wmmse import TransceiverDesign, optimize


class MethodName(StrEnum):
    PROPOSED = "proposed"
    BASELINE1 = "baseline1"
    BASELINE2 = "baseline2"
    BASELINE3 = "baseline3"


@dataclass(frozen=True)
class MethodParams:
    """Receiver knobs shared by every method."""

    sigma2: float
    power_p: float
    cap_bits: float
    memory_d: int
    window_w: int
    alpha: float = 0.1
    refine_steps: int = 1
    ao_max_iters: int = 200
    ao_tol: float = 1e-6


@dataclass
class DirectionState:
    """What one receiver knows about its link while the frame runs."""

    design: TransceiverDesign
    stacked: StackedTapChannel
    estimate: PhaseEstimate

    @property
    def gains(self) -> np.ndarray:
        return effective_gains(self.design, self.stacked)


class LinkMethod:
    """Design, pilot and data-block hooks of one method."""

    name: MethodName
    tracks_phase = True

    def initial_design(self, est_taps: ChannelTaps, params: MethodParams) -> TransceiverDesign:
        raise NotImplementedError

    def start(self, est_taps: ChannelTaps, params: MethodParams) -> DirectionState:
        design = self.initial_design(est_taps, params)
        return DirectionState(
            design=design,
            stacked=stack_channel(est_taps, design.memory_d),
            estimate=PhaseEstimate.initial(est_taps.n_rx, est_taps.m_tx),
        )

    def on_pilot(
        self,
        state: DirectionState,
        params: MethodParams,
        pilots: np.ndarray,
        y: np.ndarray,
        z: np.ndarray,
    ) -> bool:
        """Process one pilot; returns True when the receive filters were rebuilt.

        Args:
            state: Receiver state, updated in place.
            params: Receiver knobs.
            pilots: Stream pilot symbols U_P, shape (Ns, L_p).
            y: Antenna-level received pilot, shape (N, L_p).
            z: Decorrelator outputs over the pilot, shape (Ns, L_p).
        """
        return False

    def on_block(
        self, state: DirectionState, params: MethodParams, fed_back: np.ndarray, z: np.ndarray
    ) -> None:
        """Track between pilots from a data block's fed-back symbols."""


class ProposedMethod(LinkMethod):
    """AO transceiver, linearized per-antenna PHN estimation and decision-feedback tracking."""

    name = MethodName.PROPOSED

    def initial_design(self, est_taps: ChannelTaps, params: MethodParams) -> TransceiverDesign:
        return optimize(
            est_taps,
            params.sigma2,
            params.power_p,
            params.cap_bits,
            params.memory_d,
            max_iters=params.ao_max_iters,
            tol=params.ao_tol,
        )

    def on_pilot(
        self,
        state: DirectionState,
        params: MethodParams,
        pilots: np.ndarray,
        y: np.ndarray,
        z: np.ndarray,
    ) -> bool:
        system = build_system(state.design, state.stacked, state.design.precoder @ pilots)
        delta = estimate_increment_pilot(system, z, params.refine_steps)
        state.estimate = accumulate(state.estimate, delta)
        return False

    def on_block(
        self, state: DirectionState, params: MethodParams, fed_back: np.ndarray, z: np.ndarray
    ) -> None:
        if not np.any(fed_back):
            return
        delta = estimate_increment_dfb(
            state.design, state.stacked, fed_back, z, params.refine_steps
        )
        dfb = state.estimate.with_increment(delta)
        state.estimate = fuse_moving_average(state.estimate, dfb, params.alpha)

