"""Frame structure model."""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class FrameConfig(BaseModel):
    """Preamble, pilot and data layout of one frame.

    Symbol timeline: the preamble occupies [0, l_t); subframe 0 carries data
    only, every later subframe starts with a pilot of l_p symbols.
    """

    model_config = ConfigDict(frozen=True)

    l_t: int = Field(default=256, ge=1)
    l_p: int = Field(default=64, ge=1)
    l_d: int = Field(default=1280, ge=1)
    n_sf: int = Field(default=100, ge=1)
    n_blocks: int = Field(default=10, ge=1)
    symbol_time_s: float = Field(default=40e-9, gt=0.0)
    snr_db: float = 47.0

    @model_validator(mode="after")
    def _blocks_divide_data(self) -> "FrameConfig":
        if self.l_d % self.n_blocks:
            raise ValueError("l_d must be a multiple of n_blocks")
        return self

    @property
    def overhead(self) -> float:
        """Preamble plus pilot symbols per data symbol."""
        return (self.l_t + (self.n_sf - 1) * self.l_p) / (self.n_sf * self.l_d)

    @property
    def block_length(self) -> int:
        return self.l_d // self.n_blocks

    @property
    def total_symbols(self) -> int:
        return self.l_t + self.n_sf * self.l_d + (self.n_sf - 1) * self.l_p

    @property
    def reference_symbol(self) -> int:
        """Middle preamble symbol, where the channel estimate is anchored."""
        return self.l_t // 2

    def pilot_start(self, q: int) -> int | None:
        """First pilot symbol of subframe q, or None for subframe 0."""
        if q == 0:
            return None
        return self.l_t + self.l_d + (q - 1) * (self.l_p + self.l_d)

    def data_start(self, q: int) -> int:
        if q == 0:
            return self.l_t
        return self.pilot_start(q) + self.l_p
