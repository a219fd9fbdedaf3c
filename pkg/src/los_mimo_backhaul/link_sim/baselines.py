"""Reference methods: MMSE-FIR per stream, combined-channel MMSE and SVD."""

import numpy as np
from scipy.linalg import solve

from los_mimo_backhaul.channel.taps import ChannelTaps
from los_mimo_backhaul.channel_est.least_squares import ls_estimate, stack_preamble
from los_mimo_backhaul.link_sim.methods import (
    DirectionState,
    LinkMethod,
    MethodName,
    MethodParams,
)
from los_mimo_backhaul.link_sim.metrics import extract_sum_phases
from los_mimo_backhaul.phase_tracking.tracker import accumulate
from los_mimo_backhaul.precoding.stacking import stack_channel
from los_mimo_backhaul.precoding.svd import svd_baseline
from los_mimo_backhaul.precoding.wmmse import (
    TransceiverDesign,
    initial_precoder,
    update_decorrelator,
)
from los_mimo_backhaul.timing_sync.offsets import incidence_matrix


def per_antenna_from_sum_phases(sum_phases: np.ndarray, n: int, m: int) -> np.ndarray:
    """Minimum-norm per-antenna phases through pinv(I_NM), moved to the rx[0] = 0 gauge."""
    phases = np.linalg.pinv(incidence_matrix(n, m)) @ np.asarray(sum_phases, dtype=float)
    reference = phases[0]
    phases[:n] -= reference
    phases[n:] += reference
    return phases


def principal_ls(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Memoryless LS channel H0 = Y X^H (X X^H)^-1."""
    gram = x @ x.conj().T
    return solve(gram, x @ y.conj().T, assume_a="pos").conj().T


def multitap_ls(y: np.ndarray, x: np.ndarray, window_w: int) -> ChannelTaps:
    """Multi-tap LS channel from a pilot of transmitted symbols x."""
    return ls_estimate(y, stack_preamble(x, window_w))


def mmse_fir_design(
    taps: ChannelTaps, power_p: float, sigma2: float, memory_d: int, cap_bits: float = 12.0
) -> TransceiverDesign:
    """Uniform-power precoder, spatial MMSE on H0 and a per-stream Wiener FIR of length 2D+1.

    Stream m's decorrelator is kron(I, g_m) c_m with g_m the spatial MMSE column
    and c_m the Wiener taps applied to the spatially equalized stream.
    """
    n, m = taps.n_rx, taps.m_tx
    n_streams = min(n, m)
    f = initial_precoder(m, n_streams, power_p)
    h0 = taps.principal
    spatial = solve(
        h0 @ f @ f.conj().T @ h0.conj().T + sigma2 * np.eye(n), h0 @ f, assume_a="pos"
    )
    stacked = stack_channel(taps, memory_d)
    hf = stacked.blocks @ f
    covariance = np.einsum("vis,vjs->ij", hf, hf.conj()) + sigma2 * np.eye(hf.shape[1])
    n_taps = 2 * memory_d + 1
    w = np.zeros((n * n_taps, n_streams), dtype=complex)
    for s in range(n_streams):
        t = np.kron(np.eye(n_taps), spatial[:, s : s + 1])
        lhs = t.conj().T @ covariance @ t
        c = solve(lhs, t.conj().T @ stacked.principal @ f[:, s], assume_a="pos")
        w[:, s] = t @ c
    return TransceiverDesign(
        precoder=f,
        decorrelator=w,
        gamma=np.ones(n_streams),
        memory_d=memory_d,
        power_p=power_p,
        cap_bits=cap_bits,
    )


def combined_mmse_design(
    taps: ChannelTaps, power_p: float, sigma2: float, cap_bits: float = 12.0
) -> TransceiverDesign:
    """Memoryless MMSE receiver built on all taps of the combined channel."""
    n_streams = min(taps.n_rx, taps.m_tx)
    f = initial_precoder(taps.m_tx, n_streams, power_p)
    w = update_decorrelator(f, stack_channel(taps, 0), sigma2)
    return TransceiverDesign(
        precoder=f,
        decorrelator=w,
        gamma=np.ones(n_streams),
        memory_d=0,
        power_p=power_p,
        cap_bits=cap_bits,
    )


class _SumPhaseTracking(LinkMethod):
    """Per-antenna PHN from principal-tap sum phases of each pilot, no decision feedback."""

    def on_pilot(
        self,
        state: DirectionState,
        params: MethodParams,
        pilots: np.ndarray,
        y: np.ndarray,
        z: np.ndarray,
    ) -> bool:
        reference = state.stacked.block(0)[
            state.design.memory_d * y.shape[0] : (state.design.memory_d + 1) * y.shape[0]
        ]
        current = principal_ls(y, state.design.precoder @ pilots)
        sum_phases = extract_sum_phases(current, reference)
        n, m = reference.shape
        state.estimate = accumulate(state.estimate, per_antenna_from_sum_phases(sum_phases, n, m))
        return False


class MmseFirBaseline(_SumPhaseTracking):
    name = MethodName.BASELINE1

    def initial_design(self, est_taps: ChannelTaps, params: MethodParams) -> TransceiverDesign:
        return mmse_fir_design(
            est_taps, params.power_p, params.sigma2, params.memory_d, params.cap_bits
        )


class SvdBaseline(_SumPhaseTracking):
    name = MethodName.BASELINE3

    def initial_design(self, est_taps: ChannelTaps, params: MethodParams) -> TransceiverDesign:
        return svd_baseline(est_taps, params.power_p, params.memory_d, params.cap_bits)


class CombinedChannelBaseline(LinkMethod):
    """Re-estimates all taps on every pilot and rebuilds a memoryless MMSE receiver."""

    name = MethodName.BASELINE2
    tracks_phase = False

    def initial_design(self, est_taps: ChannelTaps, params: MethodParams) -> TransceiverDesign:
        return combined_mmse_design(est_taps, params.power_p, params.sigma2, params.cap_bits)

    def on_pilot(
        self,
        state: DirectionState,
        params: MethodParams,
        pilots: np.ndarray,
        y: np.ndarray,
        z: np.ndarray,
    ) -> bool:
        taps = multitap_ls(y, state.design.precoder @ pilots, params.window_w)
        state.design = combined_mmse_design(
            taps, params.power_p, params.sigma2, params.cap_bits
        )
        state.stacked = stack_channel(taps, 0)
        return True
