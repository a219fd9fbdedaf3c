"""Physical parameter models for the array, multipath and pulse shaping."""

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from los_mimo_backhaul.channel.pulse import raised_cosine

SPEED_OF_LIGHT = 299_792_458.0


class ArrayGeometry(BaseModel):
    """Flat-panel arrays facing each other across the hop.

    Each panel holds n/2 dual-polarized dipoles on a square grid with pitch
    ``element_spacing_m`` (diagonal pitch is sqrt(2) times larger). Antennas are
    ordered polarization-major: indices 0..n/2-1 are the H modes, n/2..n-1 the V
    modes of the same dipoles. TX sits in the x=0 plane, RX at x=link_distance.
    """

    model_config = ConfigDict(frozen=True)

    n_rx: int = Field(default=8, ge=1)
    m_tx: int = Field(default=8, ge=1)
    element_spacing_m: float = Field(default=0.0, ge=0.0)
    link_distance_m: float = Field(default=3000.0)
    wavelength_m: float = Field(default=SPEED_OF_LIGHT / 23e9)

    @property
    def diagonal_spacing_m(self) -> float:
        return math.sqrt(2.0) * self.element_spacing_m

    def rx_positions(self) -> np.ndarray:
        """Receive antenna coordinates, shape (n_rx, 3)."""
        return _panel_positions(self.n_rx, self.element_spacing_m, self.link_distance_m)

    def tx_positions(self) -> np.ndarray:
        """Transmit antenna coordinates, shape (m_tx, 3)."""
        return _panel_positions(self.m_tx, self.element_spacing_m, 0.0)


def _panel_positions(n_antennas: int, spacing: float, x: float) -> np.ndarray:
    n_dipoles = max(n_antennas // 2, 1)
    cols = math.ceil(math.sqrt(n_dipoles))
    dipole = np.arange(n_antennas) % n_dipoles
    positions = np.zeros((n_antennas, 3))
    positions[:, 0] = x
    positions[:, 1] = (dipole % cols) * spacing
    positions[:, 2] = (dipole // cols) * spacing
    return positions


def grid_side(n_antennas: int) -> int:
    """Number of dipoles along one side of the panel grid."""
    return math.ceil(math.sqrt(max(n_antennas // 2, 1)))


class RummlerParams(BaseModel):
    """Two-ray multipath parameters."""

    model_config = ConfigDict(frozen=True)

    notch_depth_db: float = Field(default=10.0, ge=0.0)
    interpath_delay_s: float = Field(default=6.3e-9, ge=0.0)
    symbol_time_s: float = Field(default=40e-9, gt=0.0)

    @model_validator(mode="after")
    def _delay_within_symbol(self) -> "RummlerParams":
        if self.interpath_delay_s >= self.symbol_time_s:
            raise ValueError("interpath delay must be shorter than one symbol")
        return self

    @property
    def beta(self) -> float:
        """Reflected-path gain 1 - 10^(-rho/20)."""
        return 1.0 - 10.0 ** (-self.notch_depth_db / 20.0)

    @property
    def delay_symbols(self) -> float:
        return self.interpath_delay_s / self.symbol_time_s


class PulseShape(BaseModel):
    """Root-raised-cosine transmit/receive filter pair."""

    model_config = ConfigDict(frozen=True)

    family: Literal["root-raised-cosine"] = "root-raised-cosine"
    rolloff: float = Field(default=0.25, ge=0.0, le=1.0)
    span_symbols: int = Field(default=8, ge=1)
    oversampling: int = Field(default=8, ge=1)

    def response(self, t_symbols: np.ndarray | float) -> np.ndarray:
        """End-to-end pulse g = g_tx * g_rx at times in symbol periods."""
        return raised_cosine(t_symbols, self.rolloff, self.span_symbols)
