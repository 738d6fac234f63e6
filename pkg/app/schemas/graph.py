from enum import Enum

from pydantic import BaseModel


class WeightScheme(str, Enum):
    BINARY = "binary"
    TF = "tf"
    TFIDF = "tfidf"
    RATING = "rating"
    RATING_IRF = "rating_irf"

    @classmethod
    def parse(cls, value: str) -> "WeightScheme":
        return cls(value.strip().lower().replace("-", "_"))


class SizeReport(BaseModel):
    source_cells: int
    context_cells: int
    context_refs: int
    negative_cells: int


class GraphSummary(BaseModel):
    vertex_count: int
    edge_count: int
    total_weight: float
    dangling_vertices: int
    typed: bool
