"""Command-line entry point for the preset experiments."""

import argparse
import logging
import os
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import structlog
from pydantic import ValidationError

from los_mimo_backhaul.config import Settings, get_settings, load_preset, load_settings
from los_mimo_backhaul.errors import ConfigError
from los_mimo_backhaul.experiments import (
    end_to_end,
    phn_sweep,
    precoder_grid,
    seq_design,
    timing_sweep,
)
from los_mimo_backhaul.experiments.runner import ExperimentOutcome
from los_mimo_backhaul.models.experiment import ExperimentConfig, Preset

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2

PRESETS: dict[Preset, Callable[[Settings, ExperimentConfig], ExperimentOutcome]] = {
    Preset.TIMING_SWEEP: timing_sweep.run,
    Preset.PRECODER_GRID: precoder_grid.run,
    Preset.PHN_SWEEP: phn_sweep.run,
    Preset.END_TO_END: end_to_end.run,
    Preset.SEQ_DESIGN: seq_design.run,
}

# flag destination -> Settings field
OVERRIDES: dict[str, str] = {
    "xpd_db": "xpd_db",
    "rho_db": "rho_db",
    "snr_db": "snr_db",
    "tau_max_symbols": "tau_max_symbols",
    "sigma_delta2": "sigma_delta2",
    "alpha": "alpha",
    "Lt": "l_t",
    "Lp": "l_p",
    "Ld": "l_d",
    "Nsf": "n_sf",
    "W": "window_w",
    "D": "memory_d",
    "Q": "oversampling",
    "M": "m_tx",
    "N": "n_rx",
    "seed": "seed",
    "workers": "workers",
    "out": "out",
}

logger = structlog.get_logger()


def configure_logging() -> None:
    """JSON logs when ENV=production, console rendering otherwise."""
    is_production = os.getenv("ENV", "development").lower() == "production"
    renderer = (
        structlog.processors.JSONRenderer()
        if is_production
        else structlog.dev.ConsoleRenderer()
    )
    level = logging.INFO if is_production else logging.DEBUG
    if os.getenv("LOG_LEVEL"):
        level = logging.getLevelNamesMapping().get(os.environ["LOG_LEVEL"].upper(), level)
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="los-mimo-backhaul",
        description="Regenerate LoS MIMO backhaul experiments as CSV/JSON artifacts.",
    )
    presets = [str(p) for p in Preset]
    parser.add_argument("preset_name", nargs="?", choices=presets, metavar="PRESET")
    parser.add_argument("--preset", dest="preset_flag", choices=presets)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", type=Path)
    parser.add_argument("--config", type=Path, help="YAML file overlaid on config/settings.yaml")
    parser.add_argument("--xpd-db", dest="xpd_db", type=float)
    parser.add_argument("--rho-db", dest="rho_db", type=float)
    parser.add_argument("--snr-db", dest="snr_db", type=float)
    parser.add_argument("--tau-max-symbols", dest="tau_max_symbols", type=float)
    parser.add_argument("--sigma-delta2", dest="sigma_delta2", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--Lt", type=int)
    parser.add_argument("--Lp", type=int)
    parser.add_argument("--Ld", type=int)
    parser.add_argument("--Nsf", type=int)
    parser.add_argument("--W", type=int)
    parser.add_argument("--D", type=int)
    parser.add_argument("--Q", type=int)
    parser.add_argument("--M", type=int, help="transmit antennas (also sets N unless --N)")
    parser.add_argument("--N", type=int)
    return parser


def resolve(args: argparse.Namespace) -> tuple[Settings, ExperimentConfig]:
    """Combine flags, the optional config file, the preset and project defaults.

    Raises:
        ConfigError: When the preset is missing or a value is rejected.
    """
    if args.preset_name and args.preset_flag and args.preset_name != args.preset_flag:
        raise ConfigError("positional preset and --preset disagree")
    name = args.preset_name or args.preset_flag
    if name is None:
        raise ConfigError("a preset is required")
    preset = Preset(name)

    overrides: dict[str, Any] = {
        field: getattr(args, dest) for dest, field in OVERRIDES.items()
    }
    if args.M is not None and args.N is None:
        overrides["n_rx"] = args.M
    try:
        options = load_preset(str(preset))
        if args.config is None and all(v is None for v in overrides.values()):
            settings = get_settings()
        else:
            settings = load_settings(args.config, **overrides)
    except (FileNotFoundError, ValidationError) as exc:
        raise ConfigError(str(exc)) from exc

    trials = args.trials or options.get("trials") or settings.trials
    parameters = settings.model_dump(mode="json", exclude={"out", "workers", "trials", "seed"})
    try:
        experiment = ExperimentConfig(
            preset=preset,
            trials=trials,
            seed=settings.seed,
            workers=settings.resolved_workers,
            out=settings.out,
            parameters=parameters,
            preset_options={k: v for k, v in options.items() if k != "trials"},
        )
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    return settings, experiment


def print_summary(preset: Preset, outcome: ExperimentOutcome) -> None:
    print(f"{preset}: {len(outcome.summary)} result rows")
    for row in outcome.summary:
        cells = []
        for key, value in row.items():
            if isinstance(value, float):
                cells.append(f"{key}={value:.4g}")
            else:
                cells.append(f"{key}={value}")
        print("  " + "  ".join(cells))
    for path in outcome.artifacts:
        print(f"  wrote {path}")


def main(argv: list[str] | None = None) -> int:
    """Run one preset; exit 2 on configuration errors and 1 when any trial failed."""
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings, experiment = resolve(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logger.info(
        "experiment_started",
        preset=str(experiment.preset),
        trials=experiment.trials,
        seed=experiment.seed,
        workers=experiment.workers,
    )
    outcome = PRESETS[experiment.preset](settings, experiment)
    print_summary(experiment.preset, outcome)
    if outcome.failures:
        logger.error("experiment_had_failures", failures=len(outcome.failures))
        return EXIT_FAILURES
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
