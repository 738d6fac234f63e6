from enum import Enum
from typing import Dict

from pydantic import BaseModel, Field


class Scorer(str, Enum):
    DOT = "dot"
    COSINE = "cosine"


class SimilarityResult(BaseModel):
    rho: float = Field(..., ge=-1.0, le=1.0)
    covered_pairs: int
    skipped_pairs: int


class CutoffMetrics(BaseModel):
    recall: float = Field(..., ge=0.0, le=1.0)
    hit_ratio: float = Field(..., ge=0.0, le=1.0)
    map: float = Field(..., ge=0.0, le=1.0)


class MetricReport(BaseModel):
    cutoffs: Dict[int, CutoffMetrics]
    users_evaluated: int
    users_skipped: int
    runs: int

    def rows(self):
        """Flat (metric, k, value) triples in cutoff order."""
        for k in sorted(self.cutoffs):
            m = self.cutoffs[k]
            yield "recall", k, m.recall
            yield "hit_ratio", k, m.hit_ratio
            yield "map", k, m.map
