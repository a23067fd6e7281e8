from typing import Annotated

from pydantic import BaseModel, Field, PositiveInt, field_validator, model_validator


IntRange = Annotated[tuple[int, int], Field(description="inclusive (low, high)")]


def parse_range(text: str) -> tuple[int, int]:
    """``"2..8"`` -> (2, 8); a bare ``"5"`` -> (5, 5)."""
    lo, sep, hi = text.partition("..")
    try:
        low = int(lo)
        high = int(hi) if sep else low
    except ValueError:
        raise ValueError(f"expected an integer or a range like 2..8, got {text!r}")
    return low, high


class GenConfig(BaseModel):
    rows_range: IntRange = (2, 8)
    cols_range: IntRange = (2, 8)
    span_prob: float = Field(default=0.1, ge=0.0, lt=1.0, description="chance a slot starts a merge attempt")
    max_span: PositiveInt = Field(default=3, description="largest rowspan / colspan")
    jitter_sigma: float = Field(default=0.0, ge=0.0, description="gaussian corner noise in pixels")
    image_size: tuple[PositiveInt, PositiveInt] = Field(default=(1024, 768), description="(width, height)")
    cell_pad: float = Field(default=2.0, ge=0.0, description="inset of each quad from its grid slot")
    words_per_cell_range: IntRange = (1, 3)
    empty_text_prob: float = Field(default=0.0, ge=0.0, le=1.0, description="chance a cell carries no text")
    seed: int = Field(description="64-bit master seed")

    @field_validator("rows_range", "cols_range", "words_per_cell_range", mode="before")
    @classmethod
    def _range(cls, v):
        if isinstance(v, str):
            return parse_range(v)
        return v

    @model_validator(mode="after")
    def _ranges_non_empty(self) -> "GenConfig":
        for name in ("rows_range", "cols_range", "words_per_cell_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {lo}..{hi}")
            if lo < 1:
                raise ValueError(f"{name} must start at >= 1, got {lo}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        return self
