"""Decentralized timing compensation through pulse-filter shifts."""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from los_mimo_backhaul.impairments.timing import TimingOffsets


class LinkSide(StrEnum):
    TX = "tx"
    RX = "rx"


@dataclass(frozen=True)
class FilterPlan:
    """Delays a site applies to its own pulse filters, in symbols.

    ``frame_delay`` shifts the whole receive frame and is zero on the transmit side.
    """

    side: LinkSide
    delays: np.ndarray
    frame_delay: float = 0.0


def plan_compensation(tau_hat: np.ndarray, n_local: int, side: LinkSide) -> FilterPlan:
    """Build a site's filter plan from the estimate it computed while receiving.

    Args:
        tau_hat: The site's own LS estimate [local antennas; remote antennas],
            gauge-fixed on its first antenna.
        n_local: Number of antennas at this site.
        side: Whether the plan drives the transmit or the receive filters.

    Returns:
        Per-antenna delays equal to the local entries of tau_hat. On the receive
        side the frame is also delayed by the reconstructed first-link offset,
        which removes the common delay introduced by the gauge choice.
    """
    tau_hat = np.asarray(tau_hat, dtype=float)
    delays = tau_hat[:n_local].copy()
    frame_delay = float(tau_hat[0] + tau_hat[n_local]) if side is LinkSide.RX else 0.0
    return FilterPlan(side=side, delays=delays, frame_delay=frame_delay)


def residual_offsets(
    timing: TimingOffsets, tx_plan: FilterPlan | None, rx_plan: FilterPlan | None
) -> tuple[np.ndarray, np.ndarray]:
    """Offsets left after both sites apply their plans.

    Returns:
        (residual_tx, residual_rx) in symbols.
    """
    residual_tx = timing.tau_tx.astype(float).copy()
    residual_rx = timing.tau_rx.astype(float).copy()
    if tx_plan is not None:
        residual_tx -= tx_plan.delays
    if rx_plan is not None:
        residual_rx -= rx_plan.delays + rx_plan.frame_delay
    return residual_tx, residual_rx
