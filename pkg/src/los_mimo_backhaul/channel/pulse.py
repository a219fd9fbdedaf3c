"""Raised-cosine pulse evaluation.

Transmit and receive filters are root-raised-cosine, so the end-to-end pulse
g = g_tx * g_rx is the raised-cosine response, evaluated analytically.
"""

import numpy as np


def raised_cosine(t: np.ndarray | float, rolloff: float, span: int | None = None) -> np.ndarray:
    """Evaluate the raised-cosine pulse at times given in symbol periods.

    Args:
        t: Time instants in units of T.
        rolloff: Excess bandwidth factor in [0, 1].
        span: Truncation half-width in symbols; samples with |t| > span are zero.

    Returns:
        Real pulse values with g(0) = 1.
    """
    t = np.asarray(t, dtype=float)
    sinc = np.sinc(t)
    if rolloff == 0.0:
        g = sinc
    else:
        denom = 1.0 - (2.0 * rolloff * t) ** 2
        singular = np.abs(denom) < 1e-10
        safe = np.where(singular, 1.0, denom)
        g = np.where(
            singular,
            np.pi / 4.0 * np.sinc(1.0 / (2.0 * rolloff)),
            sinc * np.cos(np.pi * rolloff * t) / safe,
        )
    if span is not None:
        g = np.where(np.abs(t) <= span, g, 0.0)
    return g
