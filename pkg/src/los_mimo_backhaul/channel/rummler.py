"""Two-ray Rummler extension of the LoS channel."""

from dataclasses import dataclass

import numpy as np

from los_mimo_backhaul.models.params import RummlerParams


@dataclass(frozen=True)
class TwoPathChannel:
    """LoS matrix plus one delayed reflection, H(t) = H_los d(t) + H_nlos d(t - tau_d)."""

    los: np.ndarray
    nlos: np.ndarray
    delay_symbols: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.los.shape


def extend_rummler(
    h_los: np.ndarray, params: RummlerParams, rng: np.random.Generator
) -> TwoPathChannel:
    """Add the reflected path beta * R (.) H_los with i.i.d. uniform phases in R."""
    phases = rng.uniform(0.0, 2.0 * np.pi, size=h_los.shape)
    nlos = params.beta * np.exp(1j * phases) * h_los
    return TwoPathChannel(los=h_los, nlos=nlos, delay_symbols=params.delay_symbols)


def single_path(h_los: np.ndarray) -> TwoPathChannel:
    return TwoPathChannel(los=h_los, nlos=np.zeros_like(h_los), delay_symbols=0.0)
