"""Per-trial report and diagnostics models."""

from pydantic import BaseModel, Field


class IsolationReport(BaseModel):
    """Worst in-window correlation per sequence pair, in dB relative to L_t."""

    family: str
    lag_window: int
    pair_db: list[list[float]]
    worst_auto_db: float
    worst_cross_db: float

    @property
    def worst_db(self) -> float:
        return max(self.worst_auto_db, self.worst_cross_db)


class StageDiagnostics(BaseModel):
    """Per-stage error figures of one trial."""

    to_rmse: float | None = None
    channel_est_error: float | None = None
    phn_rmse: float | None = None


class TrialReport(BaseModel):
    """Outcome of one end-to-end trial for one method."""

    trial: int
    method: str
    per_stream_sinr_db: list[float] = Field(default_factory=list)
    qam_levels: list[int] = Field(default_factory=list)
    ber: float = Field(default=0.0, ge=0.0, le=1.0)
    spectral_efficiency: float = Field(default=0.0, ge=0.0)
    diagnostics: StageDiagnostics = Field(default_factory=StageDiagnostics)


class TrialFailure(BaseModel):
    """A trial stage that raised; recorded instead of aborting the sweep."""

    trial: int
    stage: str
    error_type: str
    message: str
