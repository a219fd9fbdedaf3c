"""End-to-end FDD frame simulation of one trial."""

import functools
import math
from dataclasses import dataclass

import numpy as np
import structlog

from los_mimo_backhaul.channel.los import apply_polarization, build_los_channel
from los_mimo_backhaul.channel.rummler import TwoPathChannel, extend_rummler
from los_mimo_backhaul.channel.taps import ChannelTaps, discretize_taps
from los_mimo_backhaul.channel_est.least_squares import ls_estimate, stack_preamble
from los_mimo_backhaul.config import Settings
from los_mimo_backhaul.impairments.fdd import (
    Direction,
    FddImpairments,
    SiteImpairments,
    draw_fdd_impairments,
)
from los_mimo_backhaul.impairments.rng import TrialStreams
from los_mimo_backhaul.link_sim.baselines import (
    CombinedChannelBaseline,
    MmseFirBaseline,
    SvdBaseline,
)
from los_mimo_backhaul.link_sim.methods import (
    DirectionState,
    LinkMethod,
    MethodName,
    MethodParams,
    ProposedMethod,
)
from los_mimo_backhaul.link_sim.metrics import SinrAccumulator, count_bit_errors, wrap_phase
from los_mimo_backhaul.link_sim.modulation import (
    adaptive_modulation,
    build_modulation_table,
    level_bits,
)
from los_mimo_backhaul.link_sim.qam import random_qam
from los_mimo_backhaul.link_sim.receiver import decorrelate, detect, effective_gains
from los_mimo_backhaul.link_sim.waveform import propagate_symbols, synthesize_rx
from los_mimo_backhaul.models.frame import FrameConfig
from los_mimo_backhaul.models.report import StageDiagnostics, TrialFailure, TrialReport
from los_mimo_backhaul.phase_tracking.fdd import SitePhaseCorrections, plan_fdd_compensation
from los_mimo_backhaul.precoding.metrics import stream_sinrs
from los_mimo_backhaul.precoding.stacking import stack_channel
from los_mimo_backhaul.precoding.wmmse import TransceiverDesign
from los_mimo_backhaul.sequences.correlation import SequenceSet
from los_mimo_backhaul.sequences.design import design_preamble
from los_mimo_backhaul.timing_sync.compensation import (
    LinkSide,
    plan_compensation,
    residual_offsets,
)
from los_mimo_backhaul.timing_sync.offsets import (
    estimate_sum_offsets,
    reconstruct_sum_offsets,
    solve_per_antenna,
    sum_offset_rmse,
)

logger = structlog.get_logger()

DIRECTIONS = (Direction.UPLINK, Direction.DOWNLINK)
_DIRECTION_KEY = {Direction.UPLINK: 0, Direction.DOWNLINK: 1}

# noise sub-streams per direction
_SYNC, _PREAMBLE, _PILOT, _DATA = 0, 1, 2, 3

METHODS: dict[MethodName, type[LinkMethod]] = {
    MethodName.PROPOSED: ProposedMethod,
    MethodName.BASELINE1: MmseFirBaseline,
    MethodName.BASELINE2: CombinedChannelBaseline,
    MethodName.BASELINE3: SvdBaseline,
}


def build_method(name: str) -> LinkMethod:
    return METHODS[MethodName(name)]()


def method_params(settings: Settings) -> MethodParams:
    return MethodParams(
        sigma2=settings.sigma2,
        power_p=settings.power_p,
        cap_bits=settings.cap_bits,
        memory_d=settings.memory_d,
        window_w=settings.window_w,
        alpha=settings.alpha,
        refine_steps=settings.phase_refine_steps,
        ao_max_iters=settings.ao_max_iters,
        ao_tol=settings.ao_tol,
    )


@functools.lru_cache(maxsize=8)
def cached_preamble(
    m: int, l_t: int, tau_max: float, seed: int, max_iters: int, tol: float
) -> SequenceSet:
    """Designed preamble, computed once per parameter set and process."""
    return design_preamble(m, l_t, tau_max, max_iters=max_iters, tol=tol, rng=seed)


def preamble_for(settings: Settings) -> SequenceSet:
    return cached_preamble(
        settings.m_tx,
        settings.l_t,
        settings.tau_max_symbols,
        settings.seed,
        settings.mm_max_iters,
        settings.mm_tol,
    )


@dataclass(frozen=True)
class HopRealization:
    """Channels of both directions and the impairments both share."""

    channels: dict[Direction, TwoPathChannel]
    impairments: FddImpairments


@dataclass(frozen=True)
class LinkContext:
    """One direction after timing compensation and preamble channel estimation."""

    direction: Direction
    true_taps: ChannelTaps
    est_taps: ChannelTaps
    tx_site: SiteImpairments
    rx_site: SiteImpairments
    to_rmse: float
    channel_est_error: float

    def true_taps_at(self, k: int) -> ChannelTaps:
        """True taps with the oscillator phases of symbol k absorbed."""
        return self.true_taps.rotated(self.rx_site.theta[k], self.tx_site.theta[k])


def draw_hop(settings: Settings, streams: TrialStreams) -> HopRealization:
    """LoS plus Rummler channels for both directions and site impairments."""
    h_up = apply_polarization(build_los_channel(settings.geometry()), settings.xpd_db)
    rummler = settings.rummler()
    channels = {
        direction: extend_rummler(
            h_up if direction is Direction.UPLINK else h_up.T.copy(),
            rummler,
            streams.generator("channel", _DIRECTION_KEY[direction]),
        )
        for direction in DIRECTIONS
    }
    impairments = draw_fdd_impairments(
        settings.m_tx,
        settings.n_rx,
        settings.tau_max_symbols,
        settings.sigma_delta2,
        settings.frame().total_symbols,
        streams.generator("timing"),
        streams.generator("phase_noise"),
    )
    return HopRealization(channels=channels, impairments=impairments)


def sync_samples(settings: Settings) -> int:
    q = settings.oversampling
    return settings.l_t * q + math.ceil(2.0 * q * settings.tau_max_symbols) + 1


def receive_preamble_samples(
    settings: Settings,
    channel: TwoPathChannel,
    preamble: np.ndarray,
    tau_tx: np.ndarray,
    tau_rx: np.ndarray,
    tx_site: SiteImpairments | None,
    rx_site: SiteImpairments | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """Oversampled preamble reception used by timing synchronization."""
    q = settings.oversampling
    n_samples = sync_samples(settings)
    n_symbols = math.ceil(n_samples / q)
    theta_tx = None if tx_site is None else np.repeat(tx_site.theta[:n_symbols], q, axis=0)
    theta_rx = None if rx_site is None else np.repeat(rx_site.theta[:n_symbols], q, axis=0)
    return synthesize_rx(
        preamble,
        channel,
        settings.pulse(),
        q,
        tau_tx,
        tau_rx,
        theta_tx=theta_tx,
        theta_rx=theta_rx,
        sigma2=settings.sigma2,
        rng=rng,
        n_samples=n_samples,
    )


def prepare_links(
    settings: Settings, hop: HopRealization, preamble: SequenceSet, streams: TrialStreams
) -> dict[Direction, LinkContext]:
    """Synchronize both directions, compensate and estimate the channel from the preamble."""
    frame = settings.frame()
    k_ref = frame.reference_symbol
    estimates: dict[Direction, np.ndarray] = {}
    rmse: dict[Direction, float] = {}
    for direction in DIRECTIONS:
        tx_site, rx_site = hop.impairments.sites(direction)
        timing = hop.impairments.timing(direction)
        samples = receive_preamble_samples(
            settings,
            hop.channels[direction],
            preamble.sequences,
            timing.tau_tx,
            timing.tau_rx,
            tx_site,
            rx_site,
            streams.generator("noise", _DIRECTION_KEY[direction], _SYNC),
        )
        gamma_hat = estimate_sum_offsets(
            samples, preamble, settings.tau_max_symbols, settings.oversampling
        )
        estimates[direction] = solve_per_antenna(gamma_hat)
        rmse[direction] = sum_offset_rmse(
            reconstruct_sum_offsets(estimates[direction], rx_site.n_antennas, tx_site.n_antennas),
            timing.sum_offsets,
            rx_site.n_antennas,
        )

    # each site keeps the estimate from the direction it receives
    own_estimate = {
        hop.impairments.site_b.name: estimates[Direction.UPLINK],
        hop.impairments.site_a.name: estimates[Direction.DOWNLINK],
    }
    links = {}
    stacked_preamble = stack_preamble(preamble, settings.window_w)
    for direction in DIRECTIONS:
        tx_site, rx_site = hop.impairments.sites(direction)
        tx_plan = plan_compensation(own_estimate[tx_site.name], tx_site.n_antennas, LinkSide.TX)
        rx_plan = plan_compensation(own_estimate[rx_site.name], rx_site.n_antennas, LinkSide.RX)
        residual_tx, residual_rx = residual_offsets(
            hop.impairments.timing(direction), tx_plan, rx_plan
        )
        true_taps = discretize_taps(
            hop.channels[direction],
            settings.pulse(),
            residual_tx,
            residual_rx,
            settings.window_w,
            k_ref,
        )
        received = propagate_symbols(
            preamble.sequences,
            true_taps,
            tx_site.theta[: settings.l_t],
            rx_site.theta[: settings.l_t],
            settings.sigma2,
            streams.generator("noise", _DIRECTION_KEY[direction], _PREAMBLE),
        )
        est_taps = ls_estimate(received, stacked_preamble, k_ref)
        reference = true_taps.rotated(rx_site.theta[k_ref], tx_site.theta[k_ref]).taps
        error = float(np.linalg.norm(est_taps.taps - reference) / np.linalg.norm(reference))
        links[direction] = LinkContext(
            direction=direction,
            true_taps=true_taps,
            est_taps=est_taps,
            tx_site=tx_site,
            rx_site=rx_site,
            to_rmse=rmse[direction],
            channel_est_error=error,
        )
        logger.debug(
            "link_prepared",
            direction=str(direction),
            to_rmse=rmse[direction],
            channel_est_error=error,
        )
    return links


def frame_symbols(
    frame: FrameConfig, qam_levels: list[int], pilots: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Stream symbols over the whole frame: zeros on the preamble, pilots, then data."""
    n_streams = len(qam_levels)
    symbols = np.zeros((n_streams, frame.total_symbols), dtype=complex)
    for q in range(frame.n_sf):
        pilot_start = frame.pilot_start(q)
        if pilot_start is not None:
            symbols[:, pilot_start : pilot_start + frame.l_p] = pilots[:n_streams]
        start = frame.data_start(q)
        for m, level in enumerate(qam_levels):
            if level:
                symbols[m, start : start + frame.l_d] = random_qam(frame.l_d, level, rng)
    return symbols


def design_sinr_db(design: TransceiverDesign, taps: ChannelTaps, sigma2: float) -> np.ndarray:
    """Per-stream SINR (dB) the transmitter predicts from the estimated channel."""
    sinr = stream_sinrs(design, stack_channel(taps, design.memory_d), sigma2)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(sinr)


class _DirectionRun:
    """Mutable bookkeeping of one method in one direction."""

    def __init__(
        self,
        link: LinkContext,
        state: DirectionState,
        qam_levels: list[int],
        symbols: np.ndarray,
        k_ref: int,
    ) -> None:
        self.link = link
        self.state = state
        self.qam_levels = qam_levels
        self.symbols = symbols
        self.transmitted = state.design.precoder @ symbols
        self.sinr = SinrAccumulator(len(qam_levels))
        self.bit_errors = 0
        self.bits = 0
        self.phase_errors: list[float] = []
        self.set_reference(k_ref)

    def set_reference(self, k: int) -> None:
        true_stacked = stack_channel(self.link.true_taps_at(k), self.state.design.memory_d)
        self.reference_gains = effective_gains(self.state.design, true_stacked)


class EndToEndSimulator:
    """Runs the frame for one method over both directions in lockstep."""

    def __init__(
        self,
        settings: Settings,
        links: dict[Direction, LinkContext],
        preamble: SequenceSet,
        streams: TrialStreams,
    ) -> None:
        self.settings = settings
        self.links = links
        self.frame = settings.frame()
        self.params = method_params(settings)
        self.pilots = preamble.truncated(settings.l_p)
        self.streams = streams
        self.table = build_modulation_table(cap_bits=settings.cap_bits)

    def _corrections(
        self, runs: dict[Direction, _DirectionRun]
    ) -> dict[Direction, tuple[np.ndarray, np.ndarray]]:
        """(tx correction, rx correction) per direction from the estimates at each site."""
        apply_cm = self.settings.apply_common_phase
        uplink = runs[Direction.UPLINK].state.estimate
        downlink = runs[Direction.DOWNLINK].state.estimate
        # site B receives the uplink, site A the downlink
        site_b: SitePhaseCorrections = plan_fdd_compensation(uplink, downlink, apply_cm)
        site_a: SitePhaseCorrections = plan_fdd_compensation(downlink, uplink, apply_cm)
        return {
            Direction.UPLINK: (site_a.tx, site_b.rx),
            Direction.DOWNLINK: (site_b.tx, site_a.rx),
        }

    def _receive(
        self,
        run: _DirectionRun,
        corrections: tuple[np.ndarray, np.ndarray],
        start: int,
        stop: int,
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Antenna outputs and stream outputs for symbols [start, stop)."""
        total = self.frame.total_symbols
        d, w = run.state.design.memory_d, self.settings.window_w
        a, b = max(0, start - d), min(total, stop + d)
        xa, xb = max(0, a - w), min(total, b + w)
        tx_corr, rx_corr = corrections
        x = run.transmitted[:, xa:xb] * np.exp(-1j * tx_corr)[:, None]
        y = propagate_symbols(
            x,
            run.link.true_taps,
            run.link.tx_site.theta[xa:xb],
            run.link.rx_site.theta[xa:xb],
            self.settings.sigma2,
            rng,
        )
        y = y * np.exp(-1j * rx_corr)[:, None]
        z = decorrelate(y[:, a - xa : b - xa], run.state.design)
        return y[:, start - xa : stop - xa], z[:, start - a : stop - a]

    def _phase_error(
        self, run: _DirectionRun, corrections: tuple[np.ndarray, np.ndarray], k: int
    ) -> float:
        k_ref = self.frame.reference_symbol
        drift_rx = run.link.rx_site.theta[k] - run.link.rx_site.theta[k_ref]
        drift_tx = run.link.tx_site.theta[k] - run.link.tx_site.theta[k_ref]
        tx_corr, rx_corr = corrections
        residual = (drift_rx - rx_corr)[:, None] + (drift_tx - tx_corr)[None, :]
        return float(np.mean(wrap_phase(residual) ** 2))

    def run(self, method: LinkMethod, trial: int, method_index: int) -> TrialReport:
        frame, params = self.frame, self.params
        runs: dict[Direction, _DirectionRun] = {}
        for direction in DIRECTIONS:
            link = self.links[direction]
            state = method.start(link.est_taps, params)
            levels = adaptive_modulation(
                design_sinr_db(state.design, link.est_taps, params.sigma2), self.table
            )
            rng = self.streams.generator("data", _DIRECTION_KEY[direction], method_index)
            symbols = frame_symbols(frame, levels, self.pilots, rng)
            runs[direction] = _DirectionRun(link, state, levels, symbols, frame.reference_symbol)

        genie = self.settings.genie_feedback
        block = frame.block_length
        for q in range(frame.n_sf):
            pilot_start = frame.pilot_start(q)
            if pilot_start is not None:
                for direction in DIRECTIONS:
                    run = runs[direction]
                    rng = self.streams.generator("noise", _DIRECTION_KEY[direction], _PILOT, q)
                    corrections = self._corrections(runs)[direction]
                    stop = pilot_start + frame.l_p
                    y, z = self._receive(run, corrections, pilot_start, stop, rng)
                    pilots = run.symbols[:, pilot_start : pilot_start + frame.l_p]
                    if method.on_pilot(run.state, params, pilots, y, z):
                        run.set_reference(pilot_start + frame.l_p // 2)
            data_start = frame.data_start(q)
            for p in range(frame.n_blocks):
                start = data_start + p * block
                for direction in DIRECTIONS:
                    run = runs[direction]
                    corrections = self._corrections(runs)[direction]
                    rng = self.streams.generator(
                        "noise", _DIRECTION_KEY[direction], _DATA, q, p
                    )
                    _, z = self._receive(run, corrections, start, start + block, rng)
                    sent = run.symbols[:, start : start + block]
                    decided = detect(z, run.state.gains, run.qam_levels)
                    run.sinr.add(z, sent, run.reference_gains)
                    errors, bits = count_bit_errors(decided, sent, run.qam_levels)
                    run.bit_errors += errors
                    run.bits += bits
                    if method.tracks_phase:
                        run.phase_errors.append(
                            self._phase_error(run, corrections, start + block // 2)
                        )
                    method.on_block(run.state, params, sent if genie else decided, z)

        return self._report(method, trial, runs)

    def _report(
        self, method: LinkMethod, trial: int, runs: dict[Direction, _DirectionRun]
    ) -> TrialReport:
        sinr_db: list[float] = []
        levels: list[int] = []
        for direction in DIRECTIONS:
            sinr_db.extend(float(v) for v in runs[direction].sinr.sinr_db())
            levels.extend(runs[direction].qam_levels)
        bits = sum(run.bits for run in runs.values())
        errors = sum(run.bit_errors for run in runs.values())
        se = float(
            np.mean([sum(level_bits(lv) for lv in run.qam_levels) for run in runs.values()])
        )
        phase_errors = [e for run in runs.values() for e in run.phase_errors]
        diagnostics = StageDiagnostics(
            to_rmse=float(np.mean([link.to_rmse for link in self.links.values()])),
            channel_est_error=float(
                np.mean([link.channel_est_error for link in self.links.values()])
            ),
            phn_rmse=float(np.sqrt(np.mean(phase_errors))) if phase_errors else None,
        )
        return TrialReport(
            trial=trial,
            method=str(method.name),
            per_stream_sinr_db=sinr_db,
            qam_levels=levels,
            ber=errors / bits if bits else 0.0,
            spectral_efficiency=se,
            diagnostics=diagnostics,
        )


def run_trial(
    settings: Settings,
    trial: int,
    streams: TrialStreams,
    methods: list[str],
    preamble: SequenceSet | None = None,
) -> tuple[list[TrialReport], list[TrialFailure]]:
    """Simulate every method on the same impairment realization.

    Stage failures are recorded and the remaining methods still run.
    """
    preamble = preamble or preamble_for(settings)
    try:
        hop = draw_hop(settings, streams)
        links = prepare_links(settings, hop, preamble, streams)
    except Exception as exc:
        logger.warning("trial_stage_failed", trial=trial, stage="link_setup", error=str(exc))
        return [], [
            TrialFailure(
                trial=trial, stage="link_setup", error_type=type(exc).__name__, message=str(exc)
            )
        ]

    simulator = EndToEndSimulator(settings, links, preamble, streams)
    reports: list[TrialReport] = []
    failures: list[TrialFailure] = []
    for index, name in enumerate(methods):
        try:
            reports.append(simulator.run(build_method(name), trial, index))
        except Exception as exc:
            logger.warning("trial_stage_failed", trial=trial, stage=name, error=str(exc))
            failures.append(
                TrialFailure(
                    trial=trial, stage=name, error_type=type(exc).__name__, message=str(exc)
                )
            )
    return reports, failures
