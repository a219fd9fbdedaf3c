"""Alternating optimization of the precoder and memory decorrelator.

The capped sum-rate problem is solved through its weighted-MMSE form: for a
fixed precoder the decorrelator is the MMSE filter, the weights are the capped
inverse stream MSEs, and for fixed decorrelator and weights the precoder solves
a power-constrained quadratic program in closed form.
"""

from dataclasses import dataclass, field

import numpy as np
import structlog
from scipy.linalg import LinAlgError, eigh, solve
from scipy.optimize import brentq

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.errors import NumericalDegeneracyError, SingularityError
from los_mimo_backhaul.precoding.stacking import StackedTapChannel, stack_channel

logger = structlog.get_logger()

SINGULAR_CONDITION = 1e12


@dataclass(frozen=True)
class TransceiverDesign:
    """Memoryless precoder F (M x Ns), decorrelator W (N(2D+1) x Ns) and MSE weights."""

    precoder: np.ndarray
    decorrelator: np.ndarray
    gamma: np.ndarray
    memory_d: int
    power_p: float
    cap_bits: float
    objective_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    # objective after the W, Gamma and F step of each iteration, shape (iterations, 3)
    step_history: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    @property
    def n_streams(self) -> int:
        return self.precoder.shape[1]


def _covariance(stacked: StackedTapChannel, f: np.ndarray, include_principal: bool) -> np.ndarray:
    blocks = stacked.blocks if include_principal else stacked.interference()
    hf = blocks @ f  # (V, N(2D+1), Ns)
    return np.einsum("vis,vjs->ij", hf, hf.conj())


def mse_matrix(
    w: np.ndarray, f: np.ndarray, stacked: StackedTapChannel, sigma2: float
) -> np.ndarray:
    """E = (W^H H0 F - I)(.)^H + W^H (sum_{v != 0} Hv F F^H Hv^H + sigma2 I) W."""
    bias = w.conj().T @ stacked.principal @ f - np.eye(f.shape[1])
    interference = _covariance(stacked, f, include_principal=False)
    interference = interference + sigma2 * np.eye(interference.shape[0])
    e = bias @ bias.conj().T + w.conj().T @ interference @ w
    return 0.5 * (e + e.conj().T)


def update_decorrelator(f: np.ndarray, stacked: StackedTapChannel, sigma2: float) -> np.ndarray:
    """MMSE decorrelator W = B^-1 H0 F.

    Raises:
        SingularityError: When B cannot be inverted (only possible for sigma2 = 0).
    """
    b = _covariance(stacked, f, include_principal=True)
    b = b + sigma2 * np.eye(b.shape[0])
    if sigma2 == 0.0 and np.linalg.cond(b) > SINGULAR_CONDITION:
        raise SingularityError("noiseless receive covariance is rank deficient")
    try:
        return solve(b, stacked.principal @ f, assume_a="pos")
    except LinAlgError as exc:
        raise SingularityError("receive covariance is singular") from exc


def update_gamma(e: np.ndarray, cap_bits: float) -> np.ndarray:
    """Gamma_mm = min(1 / E_mm, 2^cap), returned as a vector.

    Raises:
        NumericalDegeneracyError: When a diagonal MSE entry is not positive.
    """
    diag = np.real(np.diag(e))
    if np.any(diag <= 0.0):
        raise NumericalDegeneracyError(f"nonpositive stream MSE {diag.min():.3g}")
    return np.minimum(1.0 / diag, 2.0**cap_bits)


def update_precoder(
    w: np.ndarray, gamma: np.ndarray, stacked: StackedTapChannel, power_p: float
) -> np.ndarray:
    """Minimize Tr(Gamma E) over F subject to Tr(F^H F) <= P.

    The stationarity condition gives F(mu) = (A + mu I)^-1 H0^H W Gamma with
    A = sum_v Hv^H W Gamma W^H Hv. The multiplier is zero when that point is
    feasible, otherwise the root of Tr(F^H F) = P, which is decreasing in mu.
    """
    wg = w * gamma[None, :]
    hw = np.conj(np.transpose(stacked.blocks, (0, 2, 1))) @ w  # (V, M, Ns)
    a = np.einsum("vms,s,vns->mn", hw, gamma, hw.conj())
    a = 0.5 * (a + a.conj().T)
    b = stacked.principal.conj().T @ wg
    eigvals, eigvecs = eigh(a)
    eigvals = np.maximum(eigvals, 0.0)
    c2 = np.sum(np.abs(eigvecs.conj().T @ b) ** 2, axis=1)
    scale = max(float(eigvals.max()), 1.0)

    def power(mu: float) -> float:
        return float(np.sum(c2 / (eigvals + mu) ** 2))

    singular = eigvals <= 1e-14 * scale
    if not np.any(singular & (c2 > 0.0)) and power(0.0) <= power_p:
        mu = 0.0
    else:
        hi = np.sqrt(float(np.sum(c2)) / power_p)
        lo = 0.0 if not np.any(singular) else 1e-300
        if power(hi) > power_p:
            raise NumericalDegeneracyError("power multiplier bracket does not close")
        mu = brentq(lambda x: power(x) - power_p, lo, hi, xtol=1e-15 * hi, rtol=1e-13)
    denom = (eigvals + mu)[:, None]
    proj = eigvecs.conj().T @ b
    coeffs = np.divide(proj, denom, out=np.zeros_like(proj), where=denom > 0.0)
    f = eigvecs @ coeffs
    used = float(np.real(np.vdot(f, f)))
    if used > power_p:
        f = f * np.sqrt(power_p / used)
    return f


def ao_objective(
    w: np.ndarray,
    f: np.ndarray,
    gamma: np.ndarray,
    stacked: StackedTapChannel,
    sigma2: float,
) -> float:
    """Tr(Gamma E) - ln det Gamma."""
    e = mse_matrix(w, f, stacked, sigma2)
    return float(np.sum(gamma * np.real(np.diag(e))) - np.sum(np.log(gamma)))


def initial_precoder(m: int, n_streams: int, power_p: float) -> np.ndarray:
    return np.sqrt(power_p / n_streams) * np.eye(m, n_streams, dtype=complex)


def optimize(
    taps: ChannelTaps | StackedTapChannel,
    sigma2: float,
    power_p: float,
    cap_bits: float,
    d: int,
    max_iters: int = 200,
    tol: float = 1e-6,
    n_streams: int | None = None,
) -> TransceiverDesign:
    """Alternate decorrelator, weight and precoder updates until the objective settles.

    Args:
        taps: Estimated channel taps, or an already stacked channel.
        sigma2: Noise variance.
        power_p: Transmit power budget.
        cap_bits: Per-stream rate cap in bits.
        d: Decorrelator memory D.
        max_iters: Iteration cap.
        tol: Relative objective change that stops the iteration.
        n_streams: Number of streams, defaults to min(N, M).

    Returns:
        The final design with the per-iteration and per-step objective histories.
    """
    stacked = taps if isinstance(taps, StackedTapChannel) else stack_channel(taps, d)
    m = stacked.blocks.shape[2]
    n = stacked.blocks.shape[1] // (2 * stacked.memory_d + 1)
    n_streams = n_streams or min(n, m)
    f = initial_precoder(m, n_streams, power_p)
    # weights start at the cap; they enter the objective of the first W step
    gamma = np.full(n_streams, 2.0**cap_bits)
    history: list[float] = []
    steps: list[tuple[float, float, float]] = []

    for iteration in range(max_iters):
        w = update_decorrelator(f, stacked, sigma2)
        after_w = ao_objective(w, f, gamma, stacked, sigma2)
        gamma = update_gamma(mse_matrix(w, f, stacked, sigma2), cap_bits)
        after_gamma = ao_objective(w, f, gamma, stacked, sigma2)
        f = update_precoder(w, gamma, stacked, power_p)
        history.append(ao_objective(w, f, gamma, stacked, sigma2))
        steps.append((after_w, after_gamma, history[-1]))
        if iteration > 0:
            previous = history[-2]
            if abs(previous - history[-1]) <= tol * max(abs(previous), 1e-300):
                break

    # final decorrelator and weights match the returned precoder
    w = update_decorrelator(f, stacked, sigma2)
    gamma = update_gamma(mse_matrix(w, f, stacked, sigma2), cap_bits)

    logger.debug(
        "transceiver_optimized",
        iterations=len(history),
        objective=history[-1] if history else None,
        n_streams=n_streams,
    )
    return TransceiverDesign(
        precoder=f,
        decorrelator=w,
        gamma=gamma,
        memory_d=stacked.memory_d,
        power_p=power_p,
        cap_bits=cap_bits,
        objective_history=np.asarray(history),
        step_history=np.asarray(steps).reshape(-1, 3),
    )
