"""Concurrent execution of independent Monte-Carlo trials."""

import asyncio
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Generic, TypeVar

import structlog

from los_mimo_backhaul.impairments.rng import TrialStreams, trial_seed
from los_mimo_backhaul.models.report import TrialFailure
from los_mimo_backhaul.storage.artifacts import write_errors

logger = structlog.get_logger()

T = TypeVar("T")

TrialFn = Callable[[int, TrialStreams], T]


@dataclass
class TrialResults(Generic[T]):
    """Per-trial results ordered by trial index, plus the trials that raised."""

    results: list[tuple[int, T]] = field(default_factory=list)
    failures: list[TrialFailure] = field(default_factory=list)

    @property
    def values(self) -> list[T]:
        return [value for _, value in self.results]


async def _run_one(
    trial_fn: TrialFn[T], trial: int, seed: int, semaphore: asyncio.Semaphore
) -> tuple[int, T | TrialFailure]:
    async with semaphore:
        with structlog.contextvars.bound_contextvars(trial=trial):
            streams = TrialStreams(trial_seed(seed, trial))
            try:
                return trial, await asyncio.to_thread(trial_fn, trial, streams)
            except Exception as exc:
                logger.warning("trial_failed", error_type=type(exc).__name__, error=str(exc))
                return trial, TrialFailure(
                    trial=trial, stage="trial", error_type=type(exc).__name__, message=str(exc)
                )


async def run_trials_async(
    trial_fn: TrialFn[T], n_trials: int, seed: int, workers: int
) -> TrialResults[T]:
    semaphore = asyncio.Semaphore(max(1, workers))
    outcomes = await asyncio.gather(
        *(_run_one(trial_fn, trial, seed, semaphore) for trial in range(n_trials))
    )
    collected: TrialResults[T] = TrialResults()
    for trial, outcome in sorted(outcomes, key=lambda item: item[0]):
        if isinstance(outcome, TrialFailure):
            collected.failures.append(outcome)
        else:
            collected.results.append((trial, outcome))
    logger.info(
        "trials_finished",
        n_trials=n_trials,
        succeeded=len(collected.results),
        failed=len(collected.failures),
    )
    return collected


def run_trials(trial_fn: TrialFn[T], n_trials: int, seed: int, workers: int) -> TrialResults[T]:
    """Run trial_fn(trial, streams) for every trial index on up to ``workers`` threads.

    Each trial receives generators derived from (seed, trial) only, so results do not
    depend on scheduling. A trial that raises is recorded as a TrialFailure.
    """
    return asyncio.run(run_trials_async(trial_fn, n_trials, seed, workers))


@dataclass
class ExperimentOutcome:
    """Artifacts written by one preset, its printable summary rows and any failed trials."""

    artifacts: list[Path]
    summary: list[dict[str, Any]]
    failures: list[TrialFailure] = field(default_factory=list)


def finish(
    outcome_dir: Path,
    artifacts: list[Path],
    summary: list[dict[str, Any]],
    failures: list[TrialFailure],
) -> ExperimentOutcome:
    """Write errors.json when needed and bundle the outcome."""
    errors = write_errors(outcome_dir, [failure.model_dump() for failure in failures])
    if errors is not None:
        artifacts = [*artifacts, errors]
    return ExperimentOutcome(artifacts=artifacts, summary=summary, failures=failures)
