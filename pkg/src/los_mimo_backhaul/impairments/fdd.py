"""Site-level impairments shared by the uplink and downlink of an FDD hop."""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from los_mimo_backhaul.impairments.phase_noise import (
    initial_phase_noise,
    phase_noise_trajectory,
)
from los_mimo_backhaul.impairments.timing import TimingOffsets, draw_timing_offsets


class Direction(StrEnum):
    """Link direction; site A transmits on the uplink."""

    UPLINK = "uplink"
    DOWNLINK = "downlink"


@dataclass(frozen=True)
class SiteImpairments:
    """One site's oscillator and per-antenna clock offsets."""

    name: str
    tau: np.ndarray  # (n_antennas,) symbols
    theta: np.ndarray  # (n_symbols, n_antennas) rad

    @property
    def n_antennas(self) -> int:
        return self.tau.size


@dataclass(frozen=True)
class FddImpairments:
    """Site A (M antennas) and site B (N antennas)."""

    site_a: SiteImpairments
    site_b: SiteImpairments
    tau_max: float

    def sites(self, direction: Direction) -> tuple[SiteImpairments, SiteImpairments]:
        """(transmitting site, receiving site)."""
        if direction is Direction.UPLINK:
            return self.site_a, self.site_b
        return self.site_b, self.site_a

    def timing(self, direction: Direction) -> TimingOffsets:
        """Offsets seen by one direction; arrays are shared with the sites."""
        tx, rx = self.sites(direction)
        return TimingOffsets(tau_rx=rx.tau, tau_tx=tx.tau, tau_max=self.tau_max)


def draw_fdd_impairments(
    m: int,
    n: int,
    tau_max: float,
    sigma2_per_symbol: float,
    n_symbols: int,
    timing_rng: np.random.Generator,
    phase_rng: np.random.Generator,
) -> FddImpairments:
    """Draw offsets and per-symbol oscillator phases for both sites.

    Site B's first antenna is the timing reference (the uplink receive reference).
    """
    uplink = draw_timing_offsets(n, m, tau_max, timing_rng)
    start = initial_phase_noise(n, m, sigma2_per_symbol, phase_rng)
    trajectory, _ = phase_noise_trajectory(start, n_symbols - 1, phase_rng)
    return FddImpairments(
        site_a=SiteImpairments(name="A", tau=uplink.tau_tx, theta=trajectory.theta_tx),
        site_b=SiteImpairments(name="B", tau=uplink.tau_rx, theta=trajectory.theta_rx),
        tau_max=tau_max,
    )
