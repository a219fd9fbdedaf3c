"""Gray-mapped square QAM with unit average power."""

import functools
import math

import numpy as np

from los_mimo_backhaul.errors import InvalidParameterError

MIN_LEVEL = 4
MAX_LEVEL = 4096


def bits_per_symbol(q_m: int) -> int:
    """log2(Q_M) for a supported square level.

    Raises:
        InvalidParameterError: For non-square or out-of-range levels.
    """
    bits = int(q_m).bit_length() - 1
    if q_m < MIN_LEVEL or q_m > MAX_LEVEL or q_m != 1 << bits or bits % 2:
        raise InvalidParameterError(f"unsupported square QAM level {q_m}")
    return bits


@functools.lru_cache(maxsize=16)
def _axis(q_m: int) -> tuple[np.ndarray, float]:
    """Amplitude per Gray-coded axis label and the unit-power scale."""
    side = int(math.isqrt(q_m))
    index = np.arange(side)
    gray = index ^ (index >> 1)
    amplitude = np.empty(side)
    amplitude[gray] = 2.0 * index - (side - 1)
    return amplitude, math.sqrt(2.0 * (q_m - 1) / 3.0)


def _labels_from_bits(bits: np.ndarray, width: int) -> np.ndarray:
    weights = 1 << np.arange(width - 1, -1, -1)
    return bits.reshape(-1, width) @ weights


def _bits_from_labels(labels: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    return ((labels[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def qam_modulate(bits: np.ndarray, q_m: int) -> np.ndarray:
    """Map bits (first half of each group on I, second half on Q) to symbols."""
    width = bits_per_symbol(q_m) // 2
    bits = np.asarray(bits, dtype=np.int64).reshape(-1, 2 * width)
    amplitude, scale = _axis(q_m)
    i_labels = _labels_from_bits(bits[:, :width], width)
    q_labels = _labels_from_bits(bits[:, width:], width)
    return (amplitude[i_labels] + 1j * amplitude[q_labels]) / scale


def _axis_labels(values: np.ndarray, q_m: int) -> np.ndarray:
    side = int(math.isqrt(q_m))
    _, scale = _axis(q_m)
    index = np.clip(np.rint((values * scale + (side - 1)) / 2.0), 0, side - 1).astype(np.int64)
    return index ^ (index >> 1)


def qam_demodulate(symbols: np.ndarray, q_m: int) -> np.ndarray:
    """Hard nearest-neighbour decision to bits."""
    width = bits_per_symbol(q_m) // 2
    symbols = np.asarray(symbols).ravel()
    i_bits = _bits_from_labels(_axis_labels(symbols.real, q_m), width)
    q_bits = _bits_from_labels(_axis_labels(symbols.imag, q_m), width)
    return np.hstack([i_bits, q_bits]).ravel()


def qam_decide(symbols: np.ndarray, q_m: int) -> np.ndarray:
    """Nearest constellation point of every symbol, shape preserved."""
    symbols = np.asarray(symbols)
    return qam_modulate(qam_demodulate(symbols, q_m), q_m).reshape(symbols.shape)


def random_qam(n_symbols: int, q_m: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform i.i.d. symbols of one level."""
    bits = rng.integers(0, 2, size=n_symbols * bits_per_symbol(q_m))
    return qam_modulate(bits, q_m)
