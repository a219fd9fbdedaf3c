"""Sum-rate of the AO transceiver and the SVD baseline over residual TO and PHN strength."""

from enum import StrEnum

import numpy as np
import structlog

from los_mimo_backhaul.channel.taps import ChannelTaps, discretize_taps
from los_mimo_backhaul.channel_est.least_squares import ls_estimate, stack_preamble
from los_mimo_backhaul.config import Settings
from los_mimo_backhaul.experiments.runner import ExperimentOutcome, finish, run_trials
from los_mimo_backhaul.experiments.timing_sweep import link_channel
from los_mimo_backhaul.impairments.phase_noise import initial_phase_noise, phase_noise_trajectory
from los_mimo_backhaul.impairments.rng import TrialStreams
from los_mimo_backhaul.link_sim.pipeline import preamble_for
from los_mimo_backhaul.link_sim.waveform import propagate_symbols
from los_mimo_backhaul.models.experiment import ExperimentConfig
from los_mimo_backhaul.precoding.metrics import sum_rate
from los_mimo_backhaul.precoding.stacking import stack_channel
from los_mimo_backhaul.precoding.svd import svd_baseline
from los_mimo_backhaul.precoding.wmmse import TransceiverDesign, optimize
from los_mimo_backhaul.sequences.correlation import SequenceSet
from los_mimo_backhaul.storage.artifacts import write_csv, write_json

logger = structlog.get_logger()

DEFAULT_GRID = (0.001, 0.00316, 0.01, 0.0316, 0.1)


class PrecoderMethod(StrEnum):
    PROPOSED = "proposed"
    SVD = "svd"


def design_for(
    method: PrecoderMethod, est_taps: ChannelTaps, settings: Settings
) -> TransceiverDesign:
    if method is PrecoderMethod.PROPOSED:
        return optimize(
            est_taps,
            settings.sigma2,
            settings.power_p,
            settings.cap_bits,
            settings.memory_d,
            max_iters=settings.ao_max_iters,
            tol=settings.ao_tol,
        )
    return svd_baseline(est_taps, settings.power_p, settings.memory_d, settings.cap_bits)


def grid_rates(
    settings: Settings,
    streams: TrialStreams,
    preamble: SequenceSet,
    tau_grid: list[float],
    sigma_grid: list[float],
    methods: list[PrecoderMethod],
) -> np.ndarray:
    """Sum-rates of one trial, shape (len(tau_grid), len(sigma_grid), len(methods)).

    Designs use the preamble LS estimate; rates are evaluated on the true taps
    carrying the oscillator phases of the reference symbol.
    """
    n, m = settings.n_rx, settings.m_tx
    stacked_preamble = stack_preamble(preamble, settings.window_w)
    k_ref = settings.frame().reference_symbol
    channel = link_channel(settings, streams.generator("channel", 0))
    unit_tx = streams.generator("timing").uniform(0.0, 1.0, size=m)
    unit_rx = streams.generator("timing", 1).uniform(0.0, 1.0, size=n)
    rates = np.zeros((len(tau_grid), len(sigma_grid), len(methods)))
    for t, tau_res in enumerate(tau_grid):
        true_taps = discretize_taps(
            channel,
            settings.pulse(),
            tau_res * unit_tx,
            tau_res * unit_rx,
            settings.window_w,
            k_ref,
        )
        for s, sigma_delta in enumerate(sigma_grid):
            start = initial_phase_noise(n, m, sigma_delta**2, streams.generator("phase_noise", s))
            trajectory, _ = phase_noise_trajectory(
                start, settings.l_t - 1, streams.generator("phase_noise", s, 1)
            )
            received = propagate_symbols(
                preamble.sequences,
                true_taps,
                trajectory.theta_tx,
                trajectory.theta_rx,
                settings.sigma2,
                streams.generator("noise", t, s),
            )
            est_taps = ls_estimate(received, stacked_preamble, k_ref)
            reference = true_taps.rotated(trajectory.theta_rx[k_ref], trajectory.theta_tx[k_ref])
            for c, method in enumerate(methods):
                design = design_for(method, est_taps, settings)
                rates[t, s, c] = sum_rate(
                    design, stack_channel(reference, design.memory_d), settings.sigma2
                )
    return rates


def run(settings: Settings, experiment: ExperimentConfig) -> ExperimentOutcome:
    options = experiment.preset_options
    tau_grid = [float(v) for v in options.get("tau_res_grid", DEFAULT_GRID)]
    sigma_grid = [float(v) for v in options.get("sigma_delta_grid", DEFAULT_GRID)]
    methods = [PrecoderMethod(v) for v in options.get("methods", list(PrecoderMethod))]

    # designed once before the trials fan out to worker threads
    preamble = preamble_for(settings)
    results = run_trials(
        lambda trial, streams: grid_rates(
            settings, streams, preamble, tau_grid, sigma_grid, methods
        ),
        experiment.trials,
        experiment.seed,
        experiment.workers,
    )
    rows = []
    summary = []
    if results.values:
        mean = np.mean(np.stack(results.values), axis=0)
        for t, tau_res in enumerate(tau_grid):
            for s, sigma_delta in enumerate(sigma_grid):
                for c, method in enumerate(methods):
                    rate = float(mean[t, s, c])
                    rows.append([tau_res, sigma_delta, str(method), rate])
                    summary.append(
                        {
                            "tau_res": tau_res,
                            "sigma_delta": sigma_delta,
                            "method": str(method),
                            "sum_rate": rate,
                        }
                    )
    echo = experiment.echo()
    out = experiment.out
    artifacts = [
        write_csv(
            out / "precoder_grid.csv", ["tau_res", "sigma_delta", "method", "sum_rate"], rows, echo
        ),
        write_json(out / "precoder_grid_summary.json", {"config": echo, "results": summary}),
    ]
    logger.info("precoder_grid_written", points=len(rows), trials=len(results.results))
    return finish(out, artifacts, summary, results.failures)
