"""Dual-polarized line-of-sight channel synthesis."""

import numpy as np

from los_mimo_backhaul.errors import InvalidGeometryError, InvalidParameterError
from los_mimo_backhaul.models.params import ArrayGeometry


def build_los_channel_from_positions(
    rx_positions: np.ndarray, tx_positions: np.ndarray, wavelength_m: float
) -> np.ndarray:
    """Array response [H_A]_ij = exp(-j 2 pi d_ij / lambda) for explicit coordinates.

    Raises:
        InvalidGeometryError: Non-positive wavelength or a TX/RX pair at zero distance.
    """
    if not wavelength_m > 0.0:
        raise InvalidGeometryError(f"wavelength must be positive, got {wavelength_m}")
    rx = np.atleast_2d(np.asarray(rx_positions, dtype=float))
    tx = np.atleast_2d(np.asarray(tx_positions, dtype=float))
    distances = np.linalg.norm(rx[:, None, :] - tx[None, :, :], axis=-1)
    if np.any(distances <= 0.0):
        raise InvalidGeometryError("coincident transmit and receive antennas")
    # reduce modulo one wavelength first to keep the phase accurate at km range
    cycles = np.mod(distances / wavelength_m, 1.0)
    return np.exp(-2j * np.pi * cycles)


def build_los_channel(geometry: ArrayGeometry) -> np.ndarray:
    """Spherical-wavefront LoS response of the flat-panel geometry (N x M)."""
    if geometry.n_rx % 2 or geometry.m_tx % 2:
        raise InvalidGeometryError("antenna counts must be even (H and V mode per dipole)")
    return build_los_channel_from_positions(
        geometry.rx_positions(), geometry.tx_positions(), geometry.wavelength_m
    )


def cross_polar_gain(xpd_db: float) -> float:
    """Amplitude leakage chi = 10^(-XPD/20); zero for infinite XPD."""
    if np.isinf(xpd_db):
        return 0.0
    return 10.0 ** (-xpd_db / 20.0)


def apply_polarization(h_a: np.ndarray, xpd_db: float) -> np.ndarray:
    """Weight the array response by H_xp kron J (co-polar 1, cross-polar chi)."""
    n, m = h_a.shape
    if n % 2 or m % 2:
        raise InvalidParameterError(f"polarization blocks need even dimensions, got {n}x{m}")
    chi = cross_polar_gain(xpd_db)
    h_xp = np.array([[1.0, chi], [chi, 1.0]])
    return np.kron(h_xp, np.ones((n // 2, m // 2))) * h_a
