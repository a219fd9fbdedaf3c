"""Shared fixtures: a small hop that keeps every stage fast."""

import numpy as np
import pytest

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.config import Settings

SMALL = {
    "n_rx": 4,
    "m_tx": 4,
    "l_t": 64,
    "l_p": 16,
    "l_d": 80,
    "n_sf": 3,
    "n_blocks": 2,
    "window_w": 1,
    "memory_d": 1,
    "tau_max_symbols": 1.0,
    "oversampling": 4,
    "span_symbols": 4,
    "mm_max_iters": 300,
    "ao_max_iters": 50,
    "trials": 2,
    "workers": 2,
}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_settings(tmp_path) -> Settings:
    return Settings(**SMALL, out=tmp_path / "results")


def random_taps(
    rng: np.random.Generator, n: int = 4, m: int = 4, window_w: int = 1, decay: float = 0.1
) -> ChannelTaps:
    """Dominant principal tap with weaker neighbours."""
    shape = (2 * window_w + 1, n, m)
    taps = decay * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    taps[window_w] = np.eye(n, m) * 2.0 + 0.2 * (
        rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    )
    return ChannelTaps(taps=taps, window_w=window_w)


@pytest.fixture
def taps(rng) -> ChannelTaps:
    return random_taps(rng)
