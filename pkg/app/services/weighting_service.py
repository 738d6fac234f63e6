import logging
import math
from collections import defaultdict
from typing import Dict, List, Set

from app.exceptions import WeightingError
from app.schemas.graph import WeightScheme
from app.services.graph_service import SOURCE_TYPE, Edge, aggregate_edges

logger = logging.getLogger(__name__)


class WeightingService:

    @staticmethod
    def reweight(edges: List[Edge], scheme: WeightScheme) -> List[Edge]:
        """Re-weight an edge list; duplicates are summed first.

        tfidf: ``w * ln(|V| / df(j))``, df = distinct sources pointing at j.
        rating_irf: ``r * ln(|U| / raters(i))``, |U| = source-partition size.
        Edges whose new weight is 0 are dropped.
        """
        scheme = WeightScheme(scheme)
        edges = aggregate_edges(edges)

        if scheme is WeightScheme.BINARY:
            return [edge._replace(weight=1.0) for edge in edges]
        if scheme in (WeightScheme.TF, WeightScheme.RATING):
            return edges
        if scheme is WeightScheme.TFIDF:
            return WeightingService._scale_by_target(edges, WeightingService._vertex_count(edges))
        if scheme is WeightScheme.RATING_IRF:
            if not edges or edges[0].source_type is None:
                raise WeightingError("rating_irf needs a typed (user -> item) edge list.")
            users = {edge.source for edge in edges if edge.source_type == SOURCE_TYPE}
            return WeightingService._scale_by_target(edges, len(users))
        raise WeightingError(f"Unsupported weighting scheme: {scheme}")

    @staticmethod
    def _vertex_count(edges: List[Edge]) -> int:
        vertices: Set[str] = set()
        for edge in edges:
            vertices.add(edge.source)
            vertices.add(edge.target)
        return len(vertices)

    @staticmethod
    def _scale_by_target(edges: List[Edge], population: int) -> List[Edge]:
        referrers: Dict[str, Set[str]] = defaultdict(set)
        for edge in edges:
            referrers[edge.target].add(edge.source)
        factor = {target: math.log(population / len(sources)) for target, sources in referrers.items()}

        result = []
        dropped = 0
        for edge in edges:
            weight = edge.weight * factor[edge.target]
            if weight <= 0:
                dropped += 1
                continue
            result.append(edge._replace(weight=weight))
        if dropped:
            logger.warning(f"Dropped {dropped} edges whose re-weighted value is zero")
        return result
