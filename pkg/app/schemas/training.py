from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class ModelName(str, Enum):
    DEEPWALK = "deepwalk"
    WALKLETS = "walklets"
    LINE = "line"
    HPE = "hpe"


class LineOrder(str, Enum):
    FIRST = "1"
    SECOND = "2"
    BOTH = "both"


class WalkStart(str, Enum):
    SHUFFLE = "shuffle"
    WEIGHTED = "weighted"


class NegativeWeighting(str, Enum):
    LOG = "log"
    LINEAR = "linear"


class TrainConfig(BaseModel):
    model: ModelName = ModelName.DEEPWALK
    dimensions: int = Field(64, ge=1)
    walk_times: int = Field(10, ge=1)
    walk_length: int = Field(40, ge=1)
    window: int = Field(5, ge=1)
    negatives: int = Field(5, ge=0)
    sample_times: float = Field(10.0, gt=0)  # millions of positive pairs (line/hpe)
    alpha: float = Field(0.025, gt=0)
    workers: int = Field(1, ge=1)
    seed: int = 1
    line_order: LineOrder = LineOrder.BOTH
    walk_start: WalkStart = WalkStart.SHUFFLE
    walklets_offsets: Optional[List[int]] = None
    negative_weighting: NegativeWeighting = NegativeWeighting.LOG

    class Config:
        frozen = True

    @field_validator("walklets_offsets")
    @classmethod
    def _offsets_positive(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is None:
            return value
        if not value:
            raise ValueError("walklets_offsets must not be empty")
        if any(k < 1 for k in value):
            raise ValueError("walklets offsets must be >= 1")
        return sorted(set(value))

    @model_validator(mode="after")
    def _window_within_walk(self) -> "TrainConfig":
        if self.window > self.walk_length:
            raise ValueError("window must not exceed walk_length")
        if self.walklets_offsets and max(self.walklets_offsets) > self.window:
            raise ValueError("walklets offsets must lie in 1..window")
        return self

    @property
    def offsets(self) -> List[int]:
        return self.walklets_offsets or list(range(1, self.window + 1))

    @property
    def update_budget(self) -> int:
        """Positive pairs to emit for the line/hpe trainers."""
        return max(1, int(round(self.sample_times * 1_000_000)))
