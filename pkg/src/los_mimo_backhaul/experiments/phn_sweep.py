"""Accumulated sum-PHN RMSE versus XPD for pilot-based estimators."""

from enum import StrEnum

import numpy as np
import structlog

from los_mimo_backhaul.channel.taps import discretize_taps
from los_mimo_backhaul.channel_est.least_squares import ls_estimate, stack_preamble
from los_mimo_backhaul.config import Settings
from los_mimo_backhaul.experiments.runner import ExperimentOutcome, finish, run_trials
from los_mimo_backhaul.experiments.timing_sweep import DEFAULT_XPD_GRID_DB, link_channel
from los_mimo_backhaul.impairments.phase_noise import initial_phase_noise, phase_noise_trajectory
from los_mimo_backhaul.impairments.rng import TrialStreams
from los_mimo_backhaul.link_sim.baselines import multitap_ls, principal_ls
from los_mimo_backhaul.link_sim.metrics import extract_sum_phases, wrap_phase
from los_mimo_backhaul.link_sim.pipeline import preamble_for
from los_mimo_backhaul.link_sim.receiver import decorrelate
from los_mimo_backhaul.link_sim.waveform import propagate_symbols
from los_mimo_backhaul.models.experiment import ExperimentConfig
from los_mimo_backhaul.phase_tracking.linearized import build_system, estimate_increment_pilot
from los_mimo_backhaul.phase_tracking.tracker import PhaseEstimate, accumulate
from los_mimo_backhaul.precoding.stacking import stack_channel
from los_mimo_backhaul.precoding.wmmse import optimize
from los_mimo_backhaul.sequences.correlation import SequenceSet
from los_mimo_backhaul.storage.artifacts import write_csv, write_json

logger = structlog.get_logger()

DEFAULT_N_PILOTS = 20


class PhnMethod(StrEnum):
    PROPOSED = "proposed"
    PRINCIPAL_LS = "principal_ls"
    MULTITAP_LS = "multitap_ls"


def squared_phase_errors(
    settings: Settings,
    streams: TrialStreams,
    preamble: SequenceSet,
    xpd_grid: list[float],
    methods: list[PhnMethod],
    n_pilots: int,
) -> np.ndarray:
    """Mean squared sum-phase error over the pilots of one trial.

    Every method sees the same precoded pilots. The proposed estimator
    relinearizes at its running estimate; the baselines compare the pilot
    channel phases with the preamble estimate.

    Returns:
        Array of shape (len(xpd_grid), len(methods)).
    """
    n, m = settings.n_rx, settings.m_tx
    frame = settings.frame()
    k_ref = frame.reference_symbol
    stacked_preamble = stack_preamble(preamble, settings.window_w)
    pilots = preamble.truncated(settings.l_p)
    n_symbols = frame.pilot_start(n_pilots) + frame.l_p
    start = initial_phase_noise(n, m, settings.sigma_delta2, streams.generator("phase_noise"))
    trajectory, _ = phase_noise_trajectory(
        start, n_symbols - 1, streams.generator("phase_noise", 1)
    )
    theta_tx, theta_rx = trajectory.theta_tx, trajectory.theta_rx
    no_offset_tx, no_offset_rx = np.zeros(m), np.zeros(n)

    errors = np.zeros((len(xpd_grid), len(methods)))
    for x, xpd_db in enumerate(xpd_grid):
        channel = link_channel(settings, streams.generator("channel", 0), xpd_db)
        true_taps = discretize_taps(
            channel, settings.pulse(), no_offset_tx, no_offset_rx, settings.window_w, k_ref
        )
        received = propagate_symbols(
            preamble.sequences,
            true_taps,
            theta_tx[: settings.l_t],
            theta_rx[: settings.l_t],
            settings.sigma2,
            streams.generator("noise", x, 0),
        )
        est_taps = ls_estimate(received, stacked_preamble, k_ref)
        design = optimize(
            est_taps,
            settings.sigma2,
            settings.power_p,
            settings.cap_bits,
            settings.memory_d,
            max_iters=settings.ao_max_iters,
            tol=settings.ao_tol,
        )
        stacked = stack_channel(est_taps, design.memory_d)
        x_pilot = design.precoder @ pilots[: design.n_streams]
        estimate = PhaseEstimate.initial(n, m)
        squared = np.zeros(len(methods))
        for q in range(1, n_pilots + 1):
            first = frame.pilot_start(q)
            window = slice(first, first + frame.l_p)
            y = propagate_symbols(
                x_pilot,
                true_taps,
                theta_tx[window],
                theta_rx[window],
                settings.sigma2,
                streams.generator("noise", x, q),
            )
            middle = first + frame.l_p // 2
            drift_rx = theta_rx[middle] - theta_rx[k_ref]
            drift_tx = theta_tx[middle] - theta_tx[k_ref]
            truth = (drift_rx[:, None] + drift_tx[None, :]).ravel()
            for c, method in enumerate(methods):
                if method is PhnMethod.PROPOSED:
                    system = build_system(design, stacked, x_pilot, phases=estimate.phi)
                    delta = estimate_increment_pilot(
                        system, decorrelate(y, design), settings.phase_refine_steps
                    )
                    estimate = accumulate(estimate, delta)
                    sum_phases = estimate.sum_phases()
                elif method is PhnMethod.PRINCIPAL_LS:
                    sum_phases = extract_sum_phases(principal_ls(y, x_pilot), est_taps.principal)
                else:
                    current = multitap_ls(y, x_pilot, settings.window_w)
                    sum_phases = extract_sum_phases(current.principal, est_taps.principal)
                squared[c] += float(np.mean(wrap_phase(sum_phases - truth) ** 2))
        errors[x] = squared / n_pilots
    return errors


def run(settings: Settings, experiment: ExperimentConfig) -> ExperimentOutcome:
    options = experiment.preset_options
    xpd_grid = [float(v) for v in options.get("xpd_grid_db", DEFAULT_XPD_GRID_DB)]
    methods = [PhnMethod(v) for v in options.get("methods", list(PhnMethod))]
    n_pilots = int(options.get("n_pilots", DEFAULT_N_PILOTS))

    # designed once before the trials fan out to worker threads
    preamble = preamble_for(settings)
    results = run_trials(
        lambda trial, streams: squared_phase_errors(
            settings, streams, preamble, xpd_grid, methods, n_pilots
        ),
        experiment.trials,
        experiment.seed,
        experiment.workers,
    )
    rows = []
    summary = []
    if results.values:
        rmse = np.sqrt(np.mean(np.stack(results.values), axis=0))
        for x, xpd_db in enumerate(xpd_grid):
            for c, method in enumerate(methods):
                rows.append([xpd_db, str(method), float(rmse[x, c])])
                summary.append(
                    {"xpd_db": xpd_db, "method": str(method), "rmse_rad": float(rmse[x, c])}
                )
    echo = experiment.echo()
    out = experiment.out
    artifacts = [
        write_csv(out / "phn_sweep.csv", ["xpd_db", "method", "rmse_rad"], rows, echo),
        write_json(out / "phn_sweep_summary.json", {"config": echo, "results": summary}),
    ]
    logger.info("phn_sweep_written", points=len(rows), trials=len(results.results))
    return finish(out, artifacts, summary, results.failures)
