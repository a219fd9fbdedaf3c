"""Least-squares estimation of the aggregate multi-tap channel from a preamble."""

from dataclasses import dataclass

import numpy as np
import structlog
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.errors import IllConditionedError, InvalidParameterError
from los_mimo_backhaul.sequences.correlation import SequenceSet

logger = structlog.get_logger()

MAX_GRAM_CONDITION = 1e10


@dataclass(frozen=True)
class StackedPreamble:
    """Columns [a(k+W); ...; a(k); ...; a(k-W)], shape ((2W+1)M, L_t)."""

    matrix: np.ndarray
    window_w: int
    m: int


def stack_preamble(sequences: SequenceSet | np.ndarray, w: int) -> StackedPreamble:
    """Shift copies of the preamble so that Y = H_bar U reproduces the tap convolution."""
    seqs = sequences.sequences if isinstance(sequences, SequenceSet) else np.asarray(sequences)
    m, l_t = seqs.shape
    if w < 0 or l_t <= 2 * w:
        raise InvalidParameterError(f"need 0 <= 2W < L_t, got W={w}, L_t={l_t}")
    blocks = []
    for r in range(2 * w + 1):
        shift = w - r  # block r holds a(k + shift)
        block = np.zeros((m, l_t), dtype=complex)
        if shift >= 0:
            block[:, : l_t - shift] = seqs[:, shift:]
        else:
            block[:, -shift:] = seqs[:, : l_t + shift]
        blocks.append(block)
    return StackedPreamble(matrix=np.vstack(blocks), window_w=w, m=m)


def ls_estimate(
    rx: np.ndarray, stacked: StackedPreamble, reference_symbol: int = 0
) -> ChannelTaps:
    """H_bar = Y U^H (U U^H)^-1, solved through a Cholesky factor of the Gram matrix.

    Raises:
        IllConditionedError: When the Gram matrix condition number exceeds 1e10.
    """
    u = stacked.matrix
    gram = u @ u.conj().T
    condition = float(np.linalg.cond(gram))
    if not np.isfinite(condition) or condition > MAX_GRAM_CONDITION:
        raise IllConditionedError(f"preamble Gram matrix condition {condition:.3g}")
    try:
        factor = cho_factor(gram)
    except LinAlgError as exc:
        raise IllConditionedError("preamble Gram matrix is not positive definite") from exc
    aggregate = cho_solve(factor, u @ np.asarray(rx).conj().T).conj().T
    logger.debug("channel_estimated", condition=condition, window_w=stacked.window_w)
    return ChannelTaps.from_aggregate(aggregate, stacked.window_w, reference_symbol)
