"""Unimodular preamble design by majorization-minimization of the weighted ISL."""

import math

import numpy as np
import structlog
from scipy import fft

from los_mimo_backhaul.errors import InvalidParameterError
from los_mimo_backhaul.impairments.rng import SeedLike, as_generator
from los_mimo_backhaul.sequences.correlation import SequenceSet, cross_correlations

logger = structlog.get_logger()


def lag_window(tau_max: float) -> int:
    """Number of one-sided lags that matter for offsets up to tau_max symbols."""
    return math.ceil(2.0 * tau_max)


def lag_weights(l_t: int, window: int) -> np.ndarray:
    """Weights on the 2L-point lag grid: one for |l| <= window, zero elsewhere."""
    weights = np.zeros(2 * l_t)
    lags = np.arange(-window, window + 1)
    weights[lags % (2 * l_t)] = 1.0
    return weights


def weighted_objective(sequences: np.ndarray, weights: np.ndarray) -> float:
    """Weighted auto/cross correlation energy without the fixed zero-lag auto peaks."""
    r = cross_correlations(sequences)
    m, l_t = sequences.shape
    total = float(np.sum(weights[None, None, :] * np.abs(r) ** 2))
    return max(total - m * weights[0] * float(l_t) ** 2, 0.0)


def evaluate_objective(x: np.ndarray, weights: np.ndarray) -> tuple[float, np.ndarray, float]:
    """Objective, gradient and the largest weighted correlation row sum at x."""
    m, l_t = x.shape
    n_fft = 2 * l_t
    spectra = fft.fft(x, n=n_fft, axis=1)
    r = fft.ifft(spectra[:, None, :] * np.conj(spectra)[None, :, :], axis=2)
    weighted = weights[None, None, :] * r
    objective = max(float(np.sum(weights * np.abs(r) ** 2)) - m * weights[0] * l_t**2, 0.0)
    # g_m(n) = 2 sum_a sum_l w_l r_ma(l) x_a(n - l), minus the constant zero-lag auto term
    conv = fft.ifft(np.einsum("mak,ak->mk", fft.fft(weighted, axis=2), spectra), axis=1)
    gradient = 2.0 * conv[:, :l_t] - 2.0 * weights[0] * l_t * x
    row_sum = float(np.max(np.sum(np.abs(weighted), axis=(0, 2))))
    return objective, gradient, row_sum


def spectral_majorant(row_sum: float, weights: np.ndarray, m: int, l_t: int) -> float:
    """Curvature for which the quadratic surrogate bounds the objective on the whole torus.

    Lifting the set to Z = z z^H makes the objective a quadratic form in Z whose
    largest eigenvalue is max_l w_l (L - |l|); on the torus ||Z|| is fixed, so
    the surrogate is a quadratic form in z. Its matrix is bounded by the largest
    weighted correlation row sum (Gershgorin).
    """
    lags = np.arange(2 * l_t)
    overlap = np.maximum(l_t - np.minimum(lags, 2 * l_t - lags), 0)
    lifted = float(np.max(weights * overlap))
    return 2.0 * row_sum + 2.0 * lifted * m * l_t - 2.0 * float(weights[0]) * l_t


def design_preamble(
    m: int,
    l_t: int,
    tau_max: float,
    max_iters: int = 5000,
    tol: float = 1e-10,
    rng: SeedLike = None,
    adaptive: bool = True,
) -> SequenceSet:
    """Design M unimodular sequences with suppressed correlation inside the offset window.

    Each iteration minimizes the quadratic majorizer
    f(x) + 2 Re(g^H (y - x)) + lam ||y - x||^2 over the unit-modulus torus, which
    is a phase projection. With lam equal to the spectral majorant the surrogate
    bounds f everywhere on the torus, so every step is a plain MM step. In
    adaptive mode lam starts smaller and doubles, capped at the majorant, until
    the surrogate bounds f at the candidate; the objective never increases in
    either mode.

    Args:
        m: Number of sequences (transmit antennas).
        l_t: Sequence length.
        tau_max: Largest timing offset in symbols; the lag window is ceil(2 tau_max).
        max_iters: Iteration cap.
        tol: Relative objective change that stops the iteration.
        rng: Seed or generator for the random initial phases.
        adaptive: Try curvatures below the majorant before falling back to it.

    Returns:
        The designed set with its objective history.

    Raises:
        InvalidParameterError: When l_t <= m * window leaves too few degrees of freedom.
    """
    window = lag_window(tau_max)
    if m < 1 or l_t < 2:
        raise InvalidParameterError(f"need m >= 1 and l_t >= 2, got m={m}, l_t={l_t}")
    if l_t <= m * window:
        raise InvalidParameterError(
            f"l_t={l_t} must exceed m * window = {m * window} for a feasible design"
        )
    generator = as_generator(rng)
    x = np.exp(1j * generator.uniform(0.0, 2.0 * np.pi, size=(m, l_t)))
    weights = lag_weights(l_t, window)
    objective, gradient, row_sum = evaluate_objective(x, weights)
    history = [objective]
    floor = 1e-24 * float(l_t) ** 2
    lam = float(np.linalg.norm(gradient)) / math.sqrt(m * l_t) + 1.0

    iterations = 1
    while iterations < max_iters and objective > floor:
        majorant = spectral_majorant(row_sum, weights, m, l_t)
        lam = min(lam, majorant) if adaptive else majorant
        while True:
            candidate = np.exp(1j * np.angle(lam * x - gradient))
            step = candidate - x
            bound = objective + 2.0 * float(np.real(np.vdot(gradient, step)))
            bound += lam * float(np.vdot(step, step).real)
            cand_objective, cand_gradient, cand_row_sum = evaluate_objective(candidate, weights)
            # at the majorant the bound holds up to rounding
            if cand_objective <= bound or lam >= majorant:
                break
            lam = min(2.0 * lam, majorant)
        if cand_objective > objective:
            break
        iterations += 1
        change = (objective - cand_objective) / max(objective, floor)
        x, objective, gradient, row_sum = candidate, cand_objective, cand_gradient, cand_row_sum
        history.append(objective)
        lam *= 0.5
        if change < tol:
            break

    logger.info(
        "preamble_designed",
        m=m,
        l_t=l_t,
        window=window,
        iterations=iterations,
        objective=objective,
        adaptive=adaptive,
    )
    return SequenceSet(
        sequences=x,
        lag_window=window,
        family="designed",
        objective_history=np.asarray(history),
    )
