"""Received-signal synthesis at sample and symbol level."""

import math
from dataclasses import dataclass

import numpy as np

from los_mimo_backhaul.channel.rummler import TwoPathChannel
from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.errors import InvalidParameterError
from los_mimo_backhaul.impairments.noise import add_awgn, complex_gaussian
from los_mimo_backhaul.models.params import PulseShape


def _link_kernel(
    h_los: complex, h_nlos: complex, delay: float, tau_d: float, pulse: PulseShape, q: int
) -> tuple[int, np.ndarray]:
    """Sampled response of one link as (first sample offset, values)."""
    span = pulse.span_symbols
    start = math.floor((delay - span) * q)
    stop = math.ceil((delay + tau_d + span) * q)
    t = np.arange(start, stop + 1) / q
    values = h_los * pulse.response(t - delay)
    if h_nlos != 0:
        values = values + h_nlos * pulse.response(t - delay - tau_d)
    return start, values


def synthesize_rx(
    tx_symbols: np.ndarray,
    channel: TwoPathChannel,
    pulse: PulseShape,
    q: int,
    tau_tx: np.ndarray,
    tau_rx: np.ndarray,
    theta_tx: np.ndarray | None = None,
    theta_rx: np.ndarray | None = None,
    sigma2: float = 0.0,
    rng: np.random.Generator | None = None,
    n_samples: int | None = None,
) -> np.ndarray:
    """Sample-level received streams.

    y_i(n) = sum_j sum_k e^{j(theta_tx_j(n) + theta_rx_i(n))} h_ij(nT/Q - kT) u_j(k) + v_i(n).

    Args:
        tx_symbols: Symbols u_j(k), shape (M, K), symbol k centred at sample kQ.
        channel: Two-path channel matrices.
        pulse: End-to-end pulse.
        q: Samples per symbol.
        tau_tx: Transmit offsets in symbols, shape (M,).
        tau_rx: Receive offsets in symbols, shape (N,).
        theta_tx: Per-sample transmit phases, shape (n_samples, M), or None.
        theta_rx: Per-sample receive phases, shape (n_samples, N), or None.
        sigma2: Noise variance per sample.
        rng: Noise generator, required when sigma2 > 0.
        n_samples: Output length, K*Q by default.

    Returns:
        Sample streams of shape (N, n_samples).
    """
    m, k = tx_symbols.shape
    n = channel.los.shape[0]
    n_samples = n_samples or k * q
    upsampled = np.zeros((m, k * q), dtype=complex)
    upsampled[:, ::q] = tx_symbols
    rx = np.zeros((n, n_samples), dtype=complex)
    for i in range(n):
        for j in range(m):
            delay = float(tau_rx[i] + tau_tx[j])
            start, kernel = _link_kernel(
                channel.los[i, j], channel.nlos[i, j], delay, channel.delay_symbols, pulse, q
            )
            full = np.convolve(upsampled[j], kernel)
            # y(n) = full[n - start]
            lo = max(0, start)
            hi = min(n_samples, start + full.size)
            if hi <= lo:
                continue
            contribution = full[lo - start : hi - start]
            if theta_tx is not None:
                contribution = contribution * np.exp(1j * theta_tx[lo:hi, j])
            rx[i, lo:hi] += contribution
    if theta_rx is not None:
        rx = rx * np.exp(1j * theta_rx[:n_samples].T)
    if sigma2 > 0.0:
        if rng is None:
            raise InvalidParameterError("a generator is required for noisy synthesis")
        rx = add_awgn(rx, sigma2, rng)
    return rx


def _shifted(x: np.ndarray, w: int) -> np.ndarray:
    """Columns x(k - w), zero outside the observed range."""
    out = np.zeros_like(x)
    k = x.shape[1]
    if abs(w) >= k:
        return out
    if w >= 0:
        out[:, w:] = x[:, : k - w]
    else:
        out[:, : k + w] = x[:, -w:]
    return out


@dataclass(frozen=True)
class SignalComponents:
    """Per-antenna split of the received symbols; the four parts add up to the total."""

    desired: np.ndarray
    mai: np.ndarray
    isi: np.ndarray
    noise: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.desired + self.mai + self.isi + self.noise


def decompose_symbol_level(
    x: np.ndarray,
    taps: ChannelTaps,
    theta_tx: np.ndarray | None = None,
    theta_rx: np.ndarray | None = None,
    sigma2: float = 0.0,
    rng: np.random.Generator | None = None,
) -> SignalComponents:
    """Split y(k) = sum_w diag(e^{j theta_rx(k)}) H[w] diag(e^{j theta_tx(k)}) x(k - w) + v(k).

    The desired part is the co-indexed link (i = j) of the principal tap, MAI the
    other links of the principal tap and ISI every other tap.

    Args:
        x: Transmitted symbols, shape (M, K).
        taps: Channel taps.
        theta_tx: Transmit phases per symbol, shape (K, M), or None.
        theta_rx: Receive phases per symbol, shape (K, N), or None.
        sigma2: Noise variance.
        rng: Noise generator.
    """
    n, m = taps.n_rx, taps.m_tx
    k = x.shape[1]
    tx_rot = np.ones((m, k)) if theta_tx is None else np.exp(1j * theta_tx.T)
    rx_rot = np.ones((n, k)) if theta_rx is None else np.exp(1j * theta_rx.T)
    principal = taps.principal
    co_polar = np.zeros_like(principal)
    diag = np.arange(min(n, m))
    co_polar[diag, diag] = principal[diag, diag]

    desired = rx_rot * (co_polar @ (tx_rot * x))
    mai = rx_rot * ((principal - co_polar) @ (tx_rot * x))
    isi = np.zeros((n, k), dtype=complex)
    for w in range(-taps.window_w, taps.window_w + 1):
        if w == 0:
            continue
        isi += taps.tap(w) @ (tx_rot * _shifted(x, w))
    isi = rx_rot * isi
    noise = np.zeros((n, k), dtype=complex)
    if sigma2 > 0.0:
        if rng is None:
            raise InvalidParameterError("a generator is required for noisy synthesis")
        noise = complex_gaussian((n, k), sigma2, rng)
    return SignalComponents(desired=desired, mai=mai, isi=isi, noise=noise)


def propagate_symbols(
    x: np.ndarray,
    taps: ChannelTaps,
    theta_tx: np.ndarray | None = None,
    theta_rx: np.ndarray | None = None,
    sigma2: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Symbol-level received signal; see decompose_symbol_level for the model."""
    return decompose_symbol_level(x, taps, theta_tx, theta_rx, sigma2, rng).total
