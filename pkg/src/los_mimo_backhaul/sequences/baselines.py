"""Zadoff-Chu and Walsh reference preambles."""

import math

import numpy as np
from scipy.linalg import hadamard

from los_mimo_backhaul.errors import InvalidParameterError
from los_mimo_backhaul.sequences.correlation import SequenceSet


def zc_roots(m: int, l_t: int) -> list[int]:
    """First m integers coprime with l_t."""
    roots = [u for u in range(1, l_t) if math.gcd(u, l_t) == 1][:m]
    if len(roots) < m:
        raise InvalidParameterError(f"length {l_t} admits only {len(roots)} ZC roots")
    return roots


def zc_set(m: int, l_t: int, lag_window: int = 0) -> SequenceSet:
    """Root-indexed Zadoff-Chu sequences (even lengths use the n^2 form)."""
    if l_t < 2:
        raise InvalidParameterError(f"ZC length must be at least 2, got {l_t}")
    n = np.arange(l_t)
    exponent = n * (n + 1) if l_t % 2 else n * n
    rows = [np.exp(-1j * np.pi * np.mod(u * exponent, 2 * l_t) / l_t)
            for u in zc_roots(m, l_t)]
    return SequenceSet(sequences=np.vstack(rows), lag_window=lag_window, family="zc")


def walsh_set(m: int, l_t: int, lag_window: int = 0) -> SequenceSet:
    """Rows 1..m of the Sylvester Hadamard matrix (the all-ones row is skipped)."""
    if l_t < 2 or l_t & (l_t - 1):
        raise InvalidParameterError(f"Walsh length must be a power of two, got {l_t}")
    if m >= l_t:
        raise InvalidParameterError(f"need m < l_t for Walsh rows, got m={m}")
    rows = hadamard(l_t)[1 : m + 1].astype(complex)
    return SequenceSet(sequences=rows, lag_window=lag_window, family="walsh")
