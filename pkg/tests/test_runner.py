"""Tests for the concurrent trial runner."""

import numpy as np

from los_mimo_backhaul.experiments.runner import finish, run_trials, run_trials_async
from los_mimo_backhaul.impairments.rng import TrialStreams
from los_mimo_backhaul.models.report import TrialFailure
from los_mimo_backhaul.storage.artifacts import ERRORS_FILENAME


def draw(trial: int, streams: TrialStreams) -> float:
    return float(streams.generator("noise").standard_normal())


class TestRunTrials:
    def test_results_ordered_by_trial(self):
        results = run_trials(lambda trial, streams: trial * 10, 6, seed=0, workers=3)
        assert results.results == [(t, t * 10) for t in range(6)]
        assert results.failures == []

    def test_results_independent_of_workers(self):
        single = run_trials(draw, 5, seed=7, workers=1).values
        many = run_trials(draw, 5, seed=7, workers=4).values
        assert single == many
        assert len(set(single)) == 5

    def test_seed_changes_draws(self):
        assert run_trials(draw, 3, seed=1, workers=2).values != run_trials(
            draw, 3, seed=2, workers=2
        ).values

    def test_raising_trial_is_recorded(self):
        def flaky(trial: int, streams: TrialStreams) -> int:
            if trial == 1:
                raise np.linalg.LinAlgError("singular")
            return trial

        results = run_trials(flaky, 3, seed=0, workers=2)
        assert results.values == [0, 2]
        assert len(results.failures) == 1
        failure = results.failures[0]
        assert failure.trial == 1
        assert failure.error_type == "LinAlgError"
        assert failure.message == "singular"

    async def test_async_variant(self):
        results = await run_trials_async(draw, 4, seed=3, workers=2)
        assert [trial for trial, _ in results.results] == [0, 1, 2, 3]


class TestFinish:
    def test_failures_add_errors_artifact(self, tmp_path):
        failure = TrialFailure(trial=0, stage="trial", error_type="ValueError", message="x")
        outcome = finish(tmp_path, [], [{"row": 1}], [failure])
        assert outcome.artifacts == [tmp_path / ERRORS_FILENAME]
        assert outcome.failures == [failure]

    def test_clean_run_writes_nothing_extra(self, tmp_path):
        outcome = finish(tmp_path, [], [], [])
        assert outcome.artifacts == []
        assert not (tmp_path / ERRORS_FILENAME).exists()
