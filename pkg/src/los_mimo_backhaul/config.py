"""Simulation configuration using pydantic-settings."""

import functools
import math
import os
from pathlib import Path
from typing import Any

import yaml
from pydantic import Field
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from los_mimo_backhaul.errors import ConfigError
from los_mimo_backhaul.impairments.noise import snr_to_sigma2
from los_mimo_backhaul.models.frame import FrameConfig
from los_mimo_backhaul.models.params import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    PulseShape,
    RummlerParams,
    grid_side,
)

# Section -> keys accepted in YAML config files.
CONFIG_SECTIONS: dict[str, tuple[str, ...]] = {
    "scenario": (
        "carrier_frequency_hz",
        "link_distance_m",
        "xpd_db",
        "rho_db",
        "interpath_delay_s",
        "snr_db",
        "tau_max_symbols",
        "sigma_delta2",
    ),
    "array": ("n_rx", "m_tx", "element_spacing_m"),
    "pulse": ("rolloff", "span_symbols", "oversampling"),
    "frame": ("symbol_time_s", "l_t", "l_p", "l_d", "n_sf", "n_blocks"),
    "receiver": (
        "window_w",
        "memory_d",
        "power_p",
        "cap_bits",
        "alpha",
        "ao_max_iters",
        "ao_tol",
        "mm_max_iters",
        "mm_tol",
        "phase_refine_steps",
        "genie_feedback",
        "apply_common_phase",
    ),
    "experiment": ("trials", "seed", "workers", "out"),
}


def _find_project_root() -> Path:
    """Find project root by locating pyproject.toml."""
    current = Path(__file__).resolve()
    for parent in [current] + list(current.parents):
        if (parent / "pyproject.toml").exists():
            return parent
    return Path.cwd()


def flatten_config(data: dict[str, Any], source: str = "config") -> dict[str, Any]:
    """Flatten a sectioned config mapping into Settings field names.

    Raises:
        ConfigError: On unknown sections or keys.
    """
    flattened: dict[str, Any] = {}
    for section, values in (data or {}).items():
        if section not in CONFIG_SECTIONS:
            raise ConfigError(f"{source}: unknown section '{section}'")
        if not isinstance(values, dict):
            raise ConfigError(f"{source}: section '{section}' must be a mapping")
        for key, value in values.items():
            if key not in CONFIG_SECTIONS[section]:
                raise ConfigError(f"{source}: unknown key '{section}.{key}'")
            flattened[key] = value
    return flattened


def read_config_file(path: Path) -> dict[str, Any]:
    """Load and flatten one YAML config file."""
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return flatten_config(data, source=str(path))


class YamlSettingsSource(PydanticBaseSettingsSource):
    """Settings source that loads project defaults from config/settings.yaml."""

    def get_field_value(self, field_name: str) -> tuple[Any, str, bool]:
        """Not used - we implement __call__ instead."""
        return None, "", False

    def __call__(self) -> dict[str, Any]:
        yaml_path = _find_project_root() / "config" / "settings.yaml"
        if not yaml_path.exists():
            return {}
        # null entries fall back to field defaults
        return {k: v for k, v in read_config_file(yaml_path).items() if v is not None}


class Settings(BaseSettings):
    """Simulation parameters loaded from flags, environment and config files."""

    model_config = SettingsConfigDict(
        env_prefix="LOSMIMO_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="forbid",
    )

    # Scenario
    carrier_frequency_hz: float = Field(default=23e9, gt=0)
    link_distance_m: float = Field(default=3000.0, gt=0)
    xpd_db: float = Field(default=20.0, ge=0)
    rho_db: float = Field(default=10.0, ge=0)
    interpath_delay_s: float = Field(default=6.3e-9, ge=0)
    snr_db: float = Field(default=47.0)
    tau_max_symbols: float = Field(default=5.0, ge=0)
    sigma_delta2: float = Field(default=1e-6, ge=0, description="PHN increment variance per symbol")

    # Array
    n_rx: int = Field(default=8, ge=2)
    m_tx: int = Field(default=8, ge=2)
    element_spacing_m: float | None = Field(default=None, gt=0)

    # Pulse
    rolloff: float = Field(default=0.25, ge=0, le=1)
    span_symbols: int = Field(default=8, ge=1)
    oversampling: int = Field(default=8, ge=1)

    # Frame
    symbol_time_s: float = Field(default=40e-9, gt=0)
    l_t: int = Field(default=256, ge=2)
    l_p: int = Field(default=64, ge=1)
    l_d: int = Field(default=1280, ge=1)
    n_sf: int = Field(default=100, ge=1)
    n_blocks: int = Field(default=10, ge=1)

    # Receiver and optimization
    window_w: int = Field(default=3, ge=0)
    memory_d: int = Field(default=3, ge=0)
    power_p: float = Field(default=1.0, gt=0)
    cap_bits: int = Field(default=12, ge=1)
    alpha: float = Field(default=0.1, ge=0, le=1)
    ao_max_iters: int = Field(default=200, ge=1)
    ao_tol: float = Field(default=1e-6, gt=0)
    mm_max_iters: int = Field(default=5000, ge=1)
    mm_tol: float = Field(default=1e-10, gt=0)
    phase_refine_steps: int = Field(default=1, ge=0)
    genie_feedback: bool = True
    apply_common_phase: bool = True

    # Experiment
    trials: int = Field(default=20, ge=1)
    seed: int = Field(default=0, ge=0)
    workers: int | None = Field(default=None, ge=1)
    out: Path = Field(default=Path("results"))

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    @property
    def sigma2(self) -> float:
        """Noise variance for unit transmit power."""
        return snr_to_sigma2(self.snr_db)

    @property
    def resolved_spacing_m(self) -> float:
        """Element spacing; defaults to the orthogonal-response spacing."""
        if self.element_spacing_m is not None:
            return self.element_spacing_m
        return rayleigh_spacing(self.wavelength_m, self.link_distance_m, grid_side(self.n_rx))

    @property
    def resolved_workers(self) -> int:
        return self.workers or os.cpu_count() or 1

    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(
            n_rx=self.n_rx,
            m_tx=self.m_tx,
            element_spacing_m=self.resolved_spacing_m,
            link_distance_m=self.link_distance_m,
            wavelength_m=self.wavelength_m,
        )

    def rummler(self) -> RummlerParams:
        return RummlerParams(
            notch_depth_db=self.rho_db,
            interpath_delay_s=self.interpath_delay_s,
            symbol_time_s=self.symbol_time_s,
        )

    def pulse(self) -> PulseShape:
        return PulseShape(
            rolloff=self.rolloff, span_symbols=self.span_symbols, oversampling=self.oversampling
        )

    def frame(self) -> FrameConfig:
        return FrameConfig(
            l_t=self.l_t,
            l_p=self.l_p,
            l_d=self.l_d,
            n_sf=self.n_sf,
            n_blocks=self.n_blocks,
            symbol_time_s=self.symbol_time_s,
            snr_db=self.snr_db,
        )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        """Priority: init kwargs > environment > .env > settings.yaml > secrets."""
        return (
            init_settings,
            env_settings,
            dotenv_settings,
            YamlSettingsSource(settings_cls),
            file_secret_settings,
        )


def rayleigh_spacing(wavelength_m: float, link_distance_m: float, n_side: int) -> float:
    """Element pitch that makes an n_side-element LoS array response orthogonal."""
    return math.sqrt(wavelength_m * link_distance_m / max(n_side, 1))


def load_settings(config_file: Path | None = None, **overrides: Any) -> Settings:
    """Resolve settings with an optional user config file and flag overrides.

    Flag overrides win over the user file, which wins over environment and
    project defaults.
    """
    values: dict[str, Any] = {}
    if config_file is not None:
        values.update(read_config_file(config_file))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)


@functools.lru_cache
def get_settings() -> Settings:
    """Get default settings singleton."""
    return Settings()


def load_preset(preset_name: str) -> dict[str, Any]:
    """Load experiment preset options from config/presets."""
    preset_path = _find_project_root() / "config" / "presets" / f"{preset_name}.yaml"
    if not preset_path.exists():
        raise FileNotFoundError(f"Preset file not found: {preset_path}")
    with open(preset_path, encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    return data.get("preset", {})
