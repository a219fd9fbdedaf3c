"""Full-frame spectral efficiency and BER of every transceiver method."""

import numpy as np
import structlog

from los_mimo_backhaul.config import Settings
from los_mimo_backhaul.experiments.runner import ExperimentOutcome, finish, run_trials
from los_mimo_backhaul.impairments.rng import TrialStreams
from los_mimo_backhaul.link_sim.methods import MethodName
from los_mimo_backhaul.link_sim.pipeline import preamble_for, run_trial
from los_mimo_backhaul.models.experiment import ExperimentConfig
from los_mimo_backhaul.models.report import TrialFailure, TrialReport
from los_mimo_backhaul.storage.artifacts import write_csv, write_json

logger = structlog.get_logger()

RESULT_COLUMNS = ["trial", "method", "stream", "sinr_db", "qam", "ber", "se"]


def result_rows(reports: list[TrialReport]) -> list[list[object]]:
    """One row per (trial, method, stream); streams run uplink first, then downlink."""
    rows: list[list[object]] = []
    for report in reports:
        for stream, (sinr_db, qam) in enumerate(
            zip(report.per_stream_sinr_db, report.qam_levels, strict=True)
        ):
            rows.append(
                [
                    report.trial,
                    report.method,
                    stream,
                    sinr_db,
                    qam,
                    report.ber,
                    report.spectral_efficiency,
                ]
            )
    return rows


def _mean_present(values: list[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def summarize(reports: list[TrialReport], methods: list[str]) -> list[dict[str, object]]:
    """Per-method averages over trials, BER weighted equally per trial."""
    summary = []
    for method in methods:
        chosen = [r for r in reports if r.method == method]
        if not chosen:
            continue
        summary.append(
            {
                "method": method,
                "trials": len(chosen),
                "spectral_efficiency": float(np.mean([r.spectral_efficiency for r in chosen])),
                "ber": float(np.mean([r.ber for r in chosen])),
                "mean_sinr_db": float(np.mean([np.mean(r.per_stream_sinr_db) for r in chosen])),
                "to_rmse": _mean_present([r.diagnostics.to_rmse for r in chosen]),
                "channel_est_error": _mean_present(
                    [r.diagnostics.channel_est_error for r in chosen]
                ),
                "phn_rmse": _mean_present([r.diagnostics.phn_rmse for r in chosen]),
            }
        )
    return summary


def run(settings: Settings, experiment: ExperimentConfig) -> ExperimentOutcome:
    requested = experiment.preset_options.get("methods", list(MethodName))
    methods = [str(MethodName(v)) for v in requested]
    preamble = preamble_for(settings)

    def trial_fn(trial: int, streams: TrialStreams) -> tuple[list[TrialReport], list[TrialFailure]]:
        return run_trial(settings, trial, streams, methods, preamble)

    results = run_trials(trial_fn, experiment.trials, experiment.seed, experiment.workers)
    reports = [report for trial_reports, _ in results.values for report in trial_reports]
    failures = [
        *results.failures,
        *(failure for _, trial_failures in results.values for failure in trial_failures),
    ]
    failures.sort(key=lambda failure: failure.trial)
    summary = summarize(reports, methods)
    echo = experiment.echo()
    out = experiment.out
    artifacts = [
        write_csv(out / "end_to_end.csv", RESULT_COLUMNS, result_rows(reports), echo),
        write_json(
            out / "end_to_end_summary.json",
            {"config": echo, "overhead": settings.frame().overhead, "methods": summary},
        ),
    ]
    logger.info("end_to_end_written", reports=len(reports), failures=len(failures))
    return finish(out, artifacts, summary, failures)
