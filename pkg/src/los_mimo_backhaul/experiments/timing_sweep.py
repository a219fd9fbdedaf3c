"""Sum-offset RMSE versus XPD for designed, ZC and Walsh preambles."""

from enum import StrEnum

import numpy as np
import structlog

from los_mimo_backhaul.channel.los import apply_polarization, build_los_channel
from los_mimo_backhaul.channel.rummler import TwoPathChannel, extend_rummler
from los_mimo_backhaul.config import Settings
from los_mimo_backhaul.experiments.runner import ExperimentOutcome, finish, run_trials
from los_mimo_backhaul.impairments.rng import TrialStreams
from los_mimo_backhaul.impairments.timing import draw_timing_offsets
from los_mimo_backhaul.link_sim.pipeline import preamble_for, receive_preamble_samples
from los_mimo_backhaul.models.experiment import ExperimentConfig
from los_mimo_backhaul.sequences.baselines import walsh_set, zc_set
from los_mimo_backhaul.sequences.correlation import SequenceSet
from los_mimo_backhaul.sequences.design import lag_window
from los_mimo_backhaul.storage.artifacts import write_csv, write_json
from los_mimo_backhaul.timing_sync.offsets import (
    SumOffsetMatrix,
    estimate_sum_offsets,
    reconstruct_sum_offsets,
    solve_per_antenna,
)

logger = structlog.get_logger()

DEFAULT_XPD_GRID_DB = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)


class TimingMethod(StrEnum):
    PROPOSED_LS = "proposed_ls"
    PROPOSED = "proposed"
    ZC = "zc"
    WALSH = "walsh"


def preamble_families(settings: Settings) -> dict[str, SequenceSet]:
    window = lag_window(settings.tau_max_symbols)
    return {
        "designed": preamble_for(settings),
        "zc": zc_set(settings.m_tx, settings.l_t, window),
        "walsh": walsh_set(settings.m_tx, settings.l_t, window),
    }


_FAMILY = {
    TimingMethod.PROPOSED_LS: "designed",
    TimingMethod.PROPOSED: "designed",
    TimingMethod.ZC: "zc",
    TimingMethod.WALSH: "walsh",
}


def link_channel(
    settings: Settings, rng: np.random.Generator, xpd_db: float | None = None
) -> TwoPathChannel:
    """Uplink LoS plus Rummler channel, optionally at another XPD."""
    xpd_db = settings.xpd_db if xpd_db is None else xpd_db
    h_up = apply_polarization(build_los_channel(settings.geometry()), xpd_db)
    return extend_rummler(h_up, settings.rummler(), rng)


def squared_errors(
    settings: Settings,
    streams: TrialStreams,
    xpd_grid: list[float],
    methods: list[TimingMethod],
    families: dict[str, SequenceSet],
) -> np.ndarray:
    """||gamma_hat - gamma||^2 / N^2 for one trial, shape (len(xpd_grid), len(methods))."""
    n, m = settings.n_rx, settings.m_tx
    timing = draw_timing_offsets(n, m, settings.tau_max_symbols, streams.generator("timing"))
    errors = np.zeros((len(xpd_grid), len(methods)))
    for x, xpd_db in enumerate(xpd_grid):
        # same small-scale draw at every XPD point
        channel = link_channel(settings, streams.generator("channel", 0), xpd_db)
        estimates: dict[str, SumOffsetMatrix] = {}
        for f, (family, seq_set) in enumerate(families.items()):
            samples = receive_preamble_samples(
                settings,
                channel,
                seq_set.sequences,
                timing.tau_tx,
                timing.tau_rx,
                None,
                None,
                streams.generator("noise", x, f),
            )
            estimates[family] = estimate_sum_offsets(
                samples, seq_set, settings.tau_max_symbols, settings.oversampling
            )
        for c, method in enumerate(methods):
            gamma_hat = estimates[_FAMILY[method]].gamma
            if method is TimingMethod.PROPOSED_LS:
                tau_hat = solve_per_antenna(estimates["designed"])
                gamma_hat = reconstruct_sum_offsets(tau_hat, n, m)
            errors[x, c] = float(np.sum((gamma_hat - timing.sum_offsets) ** 2)) / n**2
    return errors


def run(settings: Settings, experiment: ExperimentConfig) -> ExperimentOutcome:
    options = experiment.preset_options
    xpd_grid = [float(v) for v in options.get("xpd_grid_db", DEFAULT_XPD_GRID_DB)]
    methods = [TimingMethod(v) for v in options.get("methods", list(TimingMethod))]
    families = preamble_families(settings)

    results = run_trials(
        lambda trial, streams: squared_errors(settings, streams, xpd_grid, methods, families),
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
                summary.append({"xpd_db": xpd_db, "method": str(method), "rmse": float(rmse[x, c])})
    echo = experiment.echo()
    out = experiment.out
    artifacts = [
        write_csv(out / "timing_sweep.csv", ["xpd_db", "method", "rmse"], rows, echo),
        write_json(out / "timing_sweep_summary.json", {"config": echo, "results": summary}),
    ]
    logger.info("timing_sweep_written", points=len(rows), trials=len(results.results))
    return finish(out, artifacts, summary, results.failures)
