"""Additive white Gaussian noise."""

import numpy as np


def snr_to_sigma2(snr_db: float) -> float:
    """Noise variance for unit signal power."""
    return 10.0 ** (-snr_db / 10.0)


def complex_gaussian(shape: tuple[int, ...], sigma2: float, rng: np.random.Generator) -> np.ndarray:
    std = np.sqrt(sigma2 / 2.0)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def add_awgn(signal: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise of total variance sigma2 per entry."""
    if sigma2 == 0.0:
        return signal
    return signal + complex_gaussian(signal.shape, sigma2, rng)
