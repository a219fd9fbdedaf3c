"""Adaptive modulation table models."""

from pydantic import BaseModel, Field, model_validator


class ModulationEntry(BaseModel):
    """One square-QAM level and the SINR it needs."""

    qam_level: int
    min_sinr_db: float
    bits: int


class ModulationTable(BaseModel):
    """Modulation levels sorted by increasing SINR requirement."""

    target_ser: float = 1e-3
    entries: list[ModulationEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def _monotone(self) -> "ModulationTable":
        thresholds = [e.min_sinr_db for e in self.entries]
        levels = [e.qam_level for e in self.entries]
        if thresholds != sorted(thresholds) or levels != sorted(levels):
            raise ValueError("modulation table must be monotone in level and threshold")
        return self

    @property
    def cap_bits(self) -> int:
        return self.entries[-1].bits if self.entries else 0
