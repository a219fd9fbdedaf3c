"""Per-antenna timing offsets."""

from dataclasses import dataclass

import numpy as np
import structlog

logger = structlog.get_logger()


@dataclass(frozen=True)
class TimingOffsets:
    """Offsets in symbol periods; tau_rx[0] is the reference."""

    tau_rx: np.ndarray
    tau_tx: np.ndarray
    tau_max: float

    @property
    def sum_offsets(self) -> np.ndarray:
        """gamma = (tau_rx[i] + tau_tx[j]) ordered i-major."""
        return (self.tau_rx[:, None] + self.tau_tx[None, :]).ravel()

    @property
    def stacked(self) -> np.ndarray:
        """[tau_rx; tau_tx]."""
        return np.concatenate([self.tau_rx, self.tau_tx])


def draw_timing_offsets(
    n: int, m: int, tau_max: float, rng: np.random.Generator
) -> TimingOffsets:
    """Draw quasi-static offsets uniform on [0, tau_max] with tau_rx[0] = 0."""
    if tau_max < 1.0:
        logger.warning("tau_max_below_one_symbol", tau_max=tau_max)
    tau_rx = rng.uniform(0.0, tau_max, size=n)
    tau_tx = rng.uniform(0.0, tau_max, size=m)
    tau_rx[0] = 0.0
    return TimingOffsets(tau_rx=tau_rx, tau_tx=tau_tx, tau_max=tau_max)
