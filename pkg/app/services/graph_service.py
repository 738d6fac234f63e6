"""Weighted edge-list ingestion and the sequential vertex-context store.

The graph keeps every vertex's out-edges as one contiguous block of
``(target id, weight)`` pairs, sorted by target id, in CSR form: ``offsets``
delimits the blocks, ``targets`` and ``weights`` hold their contents.
Concatenating all blocks gives the edge distribution; the per-vertex sums
give the out- and in-degree distributions the samplers are built on.
"""
import logging
import math
from pathlib import Path
from typing import Callable, Dict, Iterable, Iterator, List, NamedTuple, Optional, TextIO, Tuple

import numpy as np

from app.exceptions import EdgeListParseError, EmptyGraphError, TypeConflictError, VertexNotFoundError
from app.schemas.graph import GraphSummary

logger = logging.getLogger(__name__)

SOURCE_TYPE = 0
TARGET_TYPE = 1


class Edge(NamedTuple):
    source: str
    target: str
    weight: float
    source_type: Optional[int] = None
    target_type: Optional[int] = None


def _claim_column(columns: Dict[str, int], name: str, column: int, line_number: int) -> None:
    seen = columns.setdefault(name, column)
    if seen != column:
        raise TypeConflictError(
            f"line {line_number}: vertex {name!r} appears in both the source and target columns"
        )


def parse_edge_list(stream: Iterable[str], undirected: bool = False, typed: bool = False) -> List[Edge]:
    """Parse ``<source> <target> <weight>`` lines into edges, in file order.

    With ``undirected`` every line also yields the reversed edge. With
    ``typed`` the source column is vertex type 0 and the target column type 1.
    """
    edges: List[Edge] = []
    columns: Dict[str, int] = {}
    for line_number, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise EdgeListParseError(line_number, f"expected 3 fields, got {len(fields)}")
        source, target, raw_weight = fields
        try:
            weight = float(raw_weight)
        except ValueError:
            raise EdgeListParseError(line_number, f"weight is not a number: {raw_weight!r}") from None
        if not math.isfinite(weight) or weight <= 0:
            raise EdgeListParseError(line_number, f"weight must be positive and finite: {raw_weight!r}")

        if typed:
            _claim_column(columns, source, SOURCE_TYPE, line_number)
            _claim_column(columns, target, TARGET_TYPE, line_number)
            edge = Edge(source, target, weight, SOURCE_TYPE, TARGET_TYPE)
        else:
            edge = Edge(source, target, weight)
        edges.append(edge)
        if undirected:
            edges.append(Edge(target, source, weight, edge.target_type, edge.source_type))
    return edges


def utf8_lines(path, error: Callable[[int, str], Exception]) -> Iterator[str]:
    """Decoded lines of a text file; undecodable bytes raise ``error(line_number, detail)``."""
    with open(path, "rb") as handle:
        for line_number, raw in enumerate(handle, start=1):
            try:
                yield raw.decode("utf-8")
            except UnicodeDecodeError:
                raise error(line_number, "not valid UTF-8 text") from None


def read_edge_list(path, undirected: bool = False, typed: bool = False) -> List[Edge]:
    return parse_edge_list(utf8_lines(path, EdgeListParseError), undirected=undirected, typed=typed)


def format_weight(weight: float) -> str:
    if float(weight).is_integer():
        return str(int(weight))
    if weight < 1e-6:
        return f"{weight:.6e}"
    return f"{weight:.6f}"


def write_edge_list(edges: Iterable[Edge], out: TextIO) -> int:
    count = 0
    for edge in edges:
        out.write(f"{edge.source} {edge.target} {format_weight(edge.weight)}\n")
        count += 1
    return count


def aggregate_edges(edges: Iterable[Edge]) -> List[Edge]:
    """Sum the weights of duplicate (source, target) pairs, keeping first-appearance order."""
    merged: Dict[Tuple[str, str], Edge] = {}
    for edge in edges:
        key = (edge.source, edge.target)
        seen = merged.get(key)
        if seen is None:
            merged[key] = edge
        else:
            merged[key] = seen._replace(weight=seen.weight + edge.weight)
    return list(merged.values())


class Graph:
    """Immutable weighted directed graph in sequential vertex-context layout."""

    def __init__(
        self,
        vertex_names: List[str],
        offsets: np.ndarray,
        targets: np.ndarray,
        weights: np.ndarray,
        vertex_types: np.ndarray,
        typed: bool = False,
    ):
        self.vertex_names = tuple(vertex_names)
        self._index = {name: i for i, name in enumerate(self.vertex_names)}
        self.offsets = offsets
        self.targets = targets
        self.weights = weights
        self.vertex_types = vertex_types
        self.typed = typed

        n = len(self.vertex_names)
        sources = np.repeat(np.arange(n, dtype=np.int64), np.diff(offsets))
        self.out_weight_sum = np.bincount(sources, weights=weights, minlength=n).astype(np.float64)
        self.in_weight_sum = np.bincount(targets, weights=weights, minlength=n).astype(np.float64)

        for array in (self.offsets, self.targets, self.weights, self.vertex_types,
                      self.out_weight_sum, self.in_weight_sum):
            array.flags.writeable = False

    @property
    def vertex_count(self) -> int:
        return len(self.vertex_names)

    @property
    def edge_count(self) -> int:
        return int(self.targets.shape[0])

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def vertex_id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise VertexNotFoundError(name) from None

    def vertex_name(self, vertex: int) -> str:
        return self.vertex_names[vertex]

    def out_degree(self, vertex: int) -> int:
        return int(self.offsets[vertex + 1] - self.offsets[vertex])

    def context_block(self, vertex: int) -> Tuple[np.ndarray, np.ndarray]:
        start, end = self.offsets[vertex], self.offsets[vertex + 1]
        return self.targets[start:end], self.weights[start:end]

    def iter_edges(self) -> Iterator[Tuple[int, int, float]]:
        for source in range(self.vertex_count):
            block_targets, block_weights = self.context_block(source)
            for target, weight in zip(block_targets.tolist(), block_weights.tolist()):
                yield source, target, weight

    def to_edges(self) -> List[Edge]:
        edges = []
        for source, target, weight in self.iter_edges():
            if self.typed:
                edges.append(Edge(self.vertex_names[source], self.vertex_names[target], weight,
                                  int(self.vertex_types[source]), int(self.vertex_types[target])))
            else:
                edges.append(Edge(self.vertex_names[source], self.vertex_names[target], weight))
        return edges

    def vertices_of_type(self, vertex_type: int) -> np.ndarray:
        return np.flatnonzero(self.vertex_types == vertex_type)

    def summary(self) -> GraphSummary:
        return GraphSummary(
            vertex_count=self.vertex_count,
            edge_count=self.edge_count,
            total_weight=self.total_weight,
            dangling_vertices=int(np.count_nonzero(np.diff(self.offsets) == 0)),
            typed=self.typed,
        )


def build_graph(edges: List[Edge]) -> Graph:
    """Assign ids in first-appearance order, merge duplicates and lay out the context blocks."""
    if not edges:
        raise EmptyGraphError("Cannot build a graph from an empty edge list.")

    typed = edges[0].source_type is not None
    index: Dict[str, int] = {}
    names: List[str] = []
    types: List[int] = []

    def intern(name: str, vertex_type: Optional[int]) -> int:
        vertex_type = vertex_type or 0
        vertex = index.get(name)
        if vertex is None:
            vertex = index[name] = len(names)
            names.append(name)
            types.append(vertex_type)
        elif typed and types[vertex] != vertex_type:
            raise TypeConflictError(f"vertex {name!r} carries conflicting types")
        return vertex

    aggregated: Dict[Tuple[int, int], float] = {}
    for edge in edges:
        key = (intern(edge.source, edge.source_type), intern(edge.target, edge.target_type))
        aggregated[key] = aggregated.get(key, 0.0) + edge.weight

    pairs = np.array(list(aggregated.keys()), dtype=np.int64).reshape(-1, 2)
    weights = np.fromiter(aggregated.values(), dtype=np.float64, count=len(aggregated))
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    sources, targets, weights = pairs[order, 0], pairs[order, 1], weights[order]

    offsets = np.zeros(len(names) + 1, dtype=np.int64)
    np.cumsum(np.bincount(sources, minlength=len(names)), out=offsets[1:])

    graph = Graph(
        names,
        offsets,
        np.ascontiguousarray(targets),
        np.ascontiguousarray(weights),
        np.asarray(types, dtype=np.int8),
        typed=typed,
    )
    if len(edges) != graph.edge_count:
        logger.info(f"Aggregated {len(edges) - graph.edge_count} duplicate edges")
    return graph


def load_graph(path, undirected: bool = False, typed: bool = False) -> Graph:
    graph = build_graph(read_edge_list(path, undirected=undirected, typed=typed))
    logger.info(f"Loaded graph {Path(path).name}: |V|={graph.vertex_count} |E|={graph.edge_count}")
    return graph
