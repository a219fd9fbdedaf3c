"""Designed preamble export with correlation profiles and isolation figures."""

import numpy as np
import structlog

from los_mimo_backhaul.config import Settings
from los_mimo_backhaul.experiments.runner import ExperimentOutcome, finish
from los_mimo_backhaul.experiments.timing_sweep import preamble_families
from los_mimo_backhaul.models.experiment import ExperimentConfig
from los_mimo_backhaul.sequences.correlation import (
    ISOLATION_FLOOR_DB,
    SequenceSet,
    correlation_profile,
    isolation_report,
)
from los_mimo_backhaul.storage.artifacts import write_csv, write_json
from los_mimo_backhaul.storage.fixtures import save_sequences

logger = structlog.get_logger()


def profile_rows(seq_set: SequenceSet) -> list[list[object]]:
    """Auto-correlation of sequence 0 and its cross-correlation with every other sequence, in dB."""
    rows: list[list[object]] = []
    first = seq_set.sequences[0]
    for other in range(seq_set.m):
        lags, values = correlation_profile(first, seq_set.sequences[other])
        with np.errstate(divide="ignore"):
            level = np.maximum(
                20.0 * np.log10(np.abs(values) / seq_set.length), ISOLATION_FLOOR_DB
            )
        rows.extend(
            [seq_set.family, 0, other, int(lag), float(db)]
            for lag, db in zip(lags, level, strict=True)
        )
    return rows


def run(settings: Settings, experiment: ExperimentConfig) -> ExperimentOutcome:
    families = preamble_families(settings)
    designed = families["designed"]
    echo = experiment.echo()
    out = experiment.out

    reports = {name: isolation_report(seq_set) for name, seq_set in families.items()}
    profiles = [row for seq_set in families.values() for row in profile_rows(seq_set)]
    summary = [
        {
            "family": name,
            "lag_window": report.lag_window,
            "worst_auto_db": report.worst_auto_db,
            "worst_cross_db": report.worst_cross_db,
        }
        for name, report in reports.items()
    ]
    artifacts = [
        save_sequences(out / "preamble.csv", designed, echo),
        write_csv(
            out / "correlation_profiles.csv", ["family", "a", "b", "lag", "db"], profiles, echo
        ),
        write_json(
            out / "isolation.json",
            {
                "config": echo,
                "iterations": int(designed.objective_history.size),
                "reports": {name: report.model_dump() for name, report in reports.items()},
            },
        ),
    ]
    logger.info(
        "seq_design_written",
        worst_designed_db=reports["designed"].worst_db,
        worst_zc_db=reports["zc"].worst_db,
        worst_walsh_db=reports["walsh"].worst_db,
    )
    return finish(out, artifacts, summary, [])
