"""Decorrelation and hard detection of spatial streams."""

import numpy as np

from los_mimo_backhaul.link_sim.qam import qam_decide
from los_mimo_backhaul.precoding.stacking import StackedTapChannel, stack_received
from los_mimo_backhaul.precoding.wmmse import TransceiverDesign


def decorrelate(y: np.ndarray, design: TransceiverDesign) -> np.ndarray:
    """Stream outputs z(k) = W^H [y(k+D); ...; y(k-D)], shape (Ns, K)."""
    return design.decorrelator.conj().T @ stack_received(y, design.memory_d)


def effective_gains(design: TransceiverDesign, stacked: StackedTapChannel) -> np.ndarray:
    """diag(W^H H0 F), the complex gain each stream sees from its own symbol."""
    return np.diag(design.decorrelator.conj().T @ stacked.principal @ design.precoder)


def detect(z: np.ndarray, gains: np.ndarray, qam_levels: list[int]) -> np.ndarray:
    """Scale every stream by its gain and slice to its constellation; dropped streams stay zero."""
    decided = np.zeros_like(z)
    for m, level in enumerate(qam_levels):
        if level == 0 or gains[m] == 0:
            continue
        decided[m] = qam_decide(z[m] / gains[m], level)
    return decided
