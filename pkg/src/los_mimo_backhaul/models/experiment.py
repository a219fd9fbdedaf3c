"""Experiment selection models."""

from enum import StrEnum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field


class Preset(StrEnum):
    """Experiments the runner can regenerate."""

    TIMING_SWEEP = "timing-sweep"
    PRECODER_GRID = "precoder-grid"
    PHN_SWEEP = "phn-sweep"
    END_TO_END = "end-to-end"
    SEQ_DESIGN = "seq-design"


class ExperimentConfig(BaseModel):
    """Resolved description of one experiment run."""

    model_config = ConfigDict(extra="forbid")

    preset: Preset
    trials: int = Field(ge=1)
    seed: int = Field(ge=0)
    workers: int = Field(ge=1)
    out: Path
    parameters: dict[str, Any] = Field(default_factory=dict)
    preset_options: dict[str, Any] = Field(default_factory=dict)

    def echo(self) -> dict[str, Any]:
        """JSON-safe copy embedded in every artifact."""
        return self.model_dump(mode="json", exclude={"out", "workers"})
