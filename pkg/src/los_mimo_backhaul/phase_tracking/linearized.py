"""First-order phase-noise observation model on precoded pilots."""

from dataclasses import dataclass

import numpy as np
import structlog
from scipy.linalg import cho_factor, cho_solve

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.precoding.stacking import StackedTapChannel, stack_channel
from los_mimo_backhaul.precoding.wmmse import TransceiverDesign

logger = structlog.get_logger()

MAX_NORMAL_CONDITION = 1e10
TIKHONOV = 1e-8


@dataclass(frozen=True)
class LinearizedSystem:
    """vec(R) ~ zeta + Xi dphi around the operating phases ``phases``.

    ``coupling[m, i, j]`` is the principal-tap gain from transmit antenna j
    through receive antenna i into stream m; rows of ``xi`` and ``zeta`` follow
    vec(R) (symbol-major, stream-minor).
    """

    coupling: np.ndarray  # (Ns, N, M)
    pilots: np.ndarray  # (M, K) precoded
    phases: np.ndarray  # (N + M,)
    xi: np.ndarray  # (Ns K, N + M)
    zeta: np.ndarray  # (Ns K,)

    @property
    def n_rx(self) -> int:
        return self.coupling.shape[1]

    @property
    def m_tx(self) -> int:
        return self.coupling.shape[2]

    def relinearized(self, phases: np.ndarray) -> "LinearizedSystem":
        """The same observation model expanded around other per-antenna phases."""
        return _linearize(self.coupling, self.pilots, np.asarray(phases, dtype=float))


def _linearize(coupling: np.ndarray, pilots: np.ndarray, phases: np.ndarray) -> LinearizedSystem:
    n = coupling.shape[1]
    rotation = np.exp(1j * (phases[:n, None] + phases[None, n:]))
    rotated = coupling * rotation[None]
    per_rx = rotated @ pilots  # (Ns, N, K)
    per_tx = rotated.sum(axis=1)[:, :, None] * pilots[None]  # (Ns, M, K)
    zeta = per_rx.sum(axis=1)  # (Ns, K)
    columns = 1j * np.concatenate([per_rx, per_tx], axis=1)  # (Ns, N+M, K)
    n_obs = zeta.size
    xi = columns.transpose(2, 0, 1).reshape(n_obs, -1)
    return LinearizedSystem(
        coupling=coupling,
        pilots=pilots,
        phases=phases,
        xi=xi,
        zeta=zeta.T.reshape(n_obs),
    )


def stream_coupling(design: TransceiverDesign, stacked: StackedTapChannel) -> np.ndarray:
    """C[m, i, j] = sum_r conj(W_r[i, m]) H0_r[i, j] over the decorrelator memory."""
    n_blocks = 2 * design.memory_d + 1
    n = stacked.principal.shape[0] // n_blocks
    w = design.decorrelator.reshape(n_blocks, n, -1)  # (R, N, Ns)
    h0 = stacked.principal.reshape(n_blocks, n, -1)  # (R, N, M)
    return np.einsum("rim,rij->mij", np.conj(w), h0)


def build_system(
    design: TransceiverDesign,
    taps: ChannelTaps | StackedTapChannel,
    pilots: np.ndarray,
    phases: np.ndarray | None = None,
) -> LinearizedSystem:
    """Linearize the stream outputs in the per-antenna phase increments.

    Args:
        design: Precoder and decorrelator in use.
        taps: Channel estimate the design was computed on.
        pilots: Precoded transmit symbols X = F U_P, shape (M, K).
        phases: Operating point [rx; tx], zero by default.
    """
    stacked = taps if isinstance(taps, StackedTapChannel) else stack_channel(taps, design.memory_d)
    coupling = stream_coupling(design, stacked)
    pilots = np.atleast_2d(np.asarray(pilots, dtype=complex))
    n, m = coupling.shape[1], coupling.shape[2]
    if phases is None:
        phases = np.zeros(n + m)
    return _linearize(coupling, pilots, np.asarray(phases, dtype=float))


def solve_increment(system: LinearizedSystem, rx: np.ndarray) -> np.ndarray:
    """Real least-squares increment with the first receive antenna held at zero."""
    target = np.asarray(rx).T.reshape(-1) - system.zeta
    a = np.vstack([system.xi.real, system.xi.imag])[:, 1:]
    b = np.concatenate([target.real, target.imag])
    normal = a.T @ a
    condition = float(np.linalg.cond(normal))
    if not np.isfinite(condition) or condition > MAX_NORMAL_CONDITION:
        logger.warning("phase_system_ill_conditioned", condition=condition, tikhonov=TIKHONOV)
        normal = normal + TIKHONOV * np.eye(normal.shape[0])
    delta = np.zeros(system.xi.shape[1])
    delta[1:] = cho_solve(cho_factor(normal), a.T @ b)
    return delta


def estimate_increment_pilot(
    system: LinearizedSystem, rx_pilot: np.ndarray, refine_steps: int = 0
) -> np.ndarray:
    """Per-antenna increment relative to the system's operating phases.

    ``refine_steps`` extra Gauss-Newton passes relinearize at the running
    estimate, which removes the first-order truncation error.

    Args:
        system: Linearized model of the pilot observation.
        rx_pilot: Decorrelator outputs over the pilot, shape (Ns, K).
        refine_steps: Additional relinearization passes.

    Returns:
        [dphi_rx; dphi_tx] with dphi_rx[0] = 0.
    """
    delta = solve_increment(system, rx_pilot)
    for _ in range(refine_steps):
        current = system.relinearized(system.phases + delta)
        delta = delta + solve_increment(current, rx_pilot)
    return delta
