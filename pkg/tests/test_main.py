"""Command-line behaviour: exit codes, overrides and reproducible artifacts."""

import pytest

from los_mimo_backhaul import main as cli
from los_mimo_backhaul.config import get_settings
from los_mimo_backhaul.main import EXIT_OK, EXIT_USAGE, build_parser, main, resolve

SMALL_FLAGS = ["--M", "2", "--Lt", "32", "--Q", "2", "--tau-max-symbols", "1", "--trials", "2"]


@pytest.fixture(autouse=True)
def short_design(monkeypatch):
    monkeypatch.setenv("LOSMIMO_MM_MAX_ITERS", "200")
    # keep the global structlog configuration of the test session
    monkeypatch.setattr(cli, "configure_logging", lambda: None)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


class TestResolve:
    def test_m_also_sets_n(self, tmp_path):
        args = build_parser().parse_args(["seq-design", "--M", "4", "--out", str(tmp_path)])
        settings, experiment = resolve(args)
        assert (settings.m_tx, settings.n_rx) == (4, 4)
        assert experiment.trials == 1
        assert experiment.parameters["m_tx"] == 4

    def test_explicit_n_wins(self):
        settings, _ = resolve(build_parser().parse_args(["seq-design", "--M", "4", "--N", "6"]))
        assert settings.n_rx == 6

    def test_trials_flag_beats_preset(self):
        args = build_parser().parse_args(["--preset", "phn-sweep", "--trials", "3"])
        _, experiment = resolve(args)
        assert experiment.trials == 3
        assert experiment.preset_options["n_pilots"] == 20
        assert "trials" not in experiment.preset_options

    def test_plain_run_uses_cached_settings(self):
        settings, _ = resolve(build_parser().parse_args(["seq-design"]))
        assert settings is get_settings()
        assert settings.mm_max_iters == 200

    def test_flags_bypass_cached_settings(self):
        settings, _ = resolve(build_parser().parse_args(["seq-design", "--M", "4"]))
        assert settings is not get_settings()
        assert get_settings().m_tx == 8


class TestExitCodes:
    def test_missing_preset(self, capsys):
        assert main([]) == EXIT_USAGE
        assert "preset is required" in capsys.readouterr().err

    def test_unknown_preset_name(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["figure-12"])
        assert excinfo.value.code == 2

    def test_conflicting_presets(self):
        assert main(["seq-design", "--preset", "phn-sweep"]) == EXIT_USAGE

    def test_rejected_value(self, tmp_path):
        assert main(["seq-design", "--alpha", "2", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_bad_config_file(self, tmp_path):
        config = tmp_path / "bad.yaml"
        config.write_text("array:\n  antennas: 4\n")
        assert main(["seq-design", "--config", str(config)]) == EXIT_USAGE


class TestRuns:
    def test_seq_design_writes_artifacts(self, tmp_path, capsys):
        assert main(["seq-design", *SMALL_FLAGS, "--out", str(tmp_path)]) == EXIT_OK
        assert (tmp_path / "preamble.csv").exists()
        assert (tmp_path / "isolation.json").exists()
        assert not (tmp_path / "errors.json").exists()
        assert "seq-design" in capsys.readouterr().out

    def test_artifacts_do_not_depend_on_workers(self, tmp_path):
        one, four = tmp_path / "one", tmp_path / "four"
        assert main(["timing-sweep", *SMALL_FLAGS, "--workers", "1", "--out", str(one)]) == EXIT_OK
        assert main(["timing-sweep", *SMALL_FLAGS, "--workers", "4", "--out", str(four)]) == EXIT_OK
        for name in ("timing_sweep.csv", "timing_sweep_summary.json"):
            assert (one / name).read_bytes() == (four / name).read_bytes()
