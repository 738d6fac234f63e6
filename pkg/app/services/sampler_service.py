"""Alias-method sampling over the sequential vertex-context store.

Three distributions are served in constant time per draw:

* ``vertex_sampling``: sources, proportional to out-weight. One cell per
  vertex, and the cell index is the vertex id.
* ``context_sampling``: one alias sub-table per context block, laid out
  contiguously so the whole structure holds ``|E|`` cells plus the ``|E|``
  target references already stored by the graph.
* ``negative_sampling``: proportional to ``ln(1 + in_weight)`` (or the raw
  in-weight), one cell per vertex.

``CdfSampler`` is the binary-search reference used to cross-check the
alias tables.
"""
import logging
from collections import deque
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from app.exceptions import SamplerError
from app.schemas.graph import SizeReport
from app.schemas.training import NegativeWeighting
from app.services.graph_service import Graph

logger = logging.getLogger(__name__)

NO_CONTEXT = -1


class Rng:
    """Seeded uniform stream for the sampling hot loops.

    Scalars are served from blocks drawn off a PCG64 generator; bulk draws
    go through ``generator`` directly.
    """

    BLOCK_SIZE = 4096

    def __init__(self, seed: int):
        self.seed = seed
        self.generator = np.random.default_rng(seed)
        self._buffer: List[float] = []
        self._cursor = 0

    def uniform(self) -> float:
        if self._cursor >= len(self._buffer):
            self._buffer = self.generator.random(self.BLOCK_SIZE).tolist()
            self._cursor = 0
        value = self._buffer[self._cursor]
        self._cursor += 1
        return value

    def integer(self, n: int) -> int:
        return min(int(self.uniform() * n), n - 1)

    def shuffle(self, items: list) -> list:
        """Fisher-Yates, in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.integer(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


def _validated_weights(weights, allow_zero: bool = False) -> np.ndarray:
    array = np.asarray(weights, dtype=np.float64)
    if array.ndim != 1 or array.size == 0:
        raise SamplerError("Weights must be a non-empty one-dimensional sequence.")
    if not np.all(np.isfinite(array)):
        raise SamplerError("Weights must be finite.")
    if allow_zero:
        if np.any(array < 0):
            raise SamplerError("Weights must not be negative.")
        if array.sum() <= 0:
            raise SamplerError("Weights sum to zero.")
    elif np.any(array <= 0):
        raise SamplerError("Weights must be positive.")
    return array


def _alias_arrays(weights: np.ndarray) -> Tuple[List[float], List[int]]:
    """Two-worklist construction, worklists consumed in ascending index order.

    Items whose scaled weight is exactly the mean go to the small list.
    Zero-weight items end with probability 0 and are never drawn.
    """
    n = len(weights)
    if n == 1:
        return [1.0], [0]
    scaled = (weights * (n / weights.sum())).tolist()
    probabilities = [1.0] * n
    aliases = list(range(n))
    small = deque(i for i, p in enumerate(scaled) if p <= 1.0)
    large = deque(i for i, p in enumerate(scaled) if p > 1.0)

    while small and large:
        s = small.popleft()
        donor = large[0]
        probabilities[s] = scaled[s]
        aliases[s] = donor
        scaled[donor] -= 1.0 - scaled[s]
        if scaled[donor] <= 1.0:
            large.popleft()
            small.append(donor)
    return probabilities, aliases


class AliasTable:
    """``n`` binary cells: cell ``i`` keeps item ``i`` with ``probabilities[i]``, else ``aliases[i]``."""

    def __init__(self, probabilities: np.ndarray, aliases: np.ndarray):
        self.probabilities = probabilities
        self.aliases = aliases
        self.size = len(probabilities)
        self._prob = probabilities.tolist()
        self._alias = aliases.tolist()

    @classmethod
    def from_weights(cls, weights, allow_zero: bool = False) -> "AliasTable":
        array = _validated_weights(weights, allow_zero=allow_zero)
        probabilities, aliases = _alias_arrays(array)
        return cls(np.asarray(probabilities, dtype=np.float64), np.asarray(aliases, dtype=np.int64))

    def __len__(self) -> int:
        return self.size

    def draw(self, rng: Rng) -> int:
        x = rng.uniform() * self.size
        cell = int(x)
        if cell >= self.size:
            cell = self.size - 1
        if x - cell < self._prob[cell]:
            return cell
        return self._alias[cell]

    def draw_many(self, generator: np.random.Generator, size: int) -> np.ndarray:
        x = generator.random(size) * self.size
        cells = np.minimum(x.astype(np.int64), self.size - 1)
        keep = (x - cells) < self.probabilities[cells]
        return np.where(keep, cells, self.aliases[cells])

    def reconstructed_probabilities(self) -> np.ndarray:
        donated = np.bincount(self.aliases, weights=1.0 - self.probabilities, minlength=self.size)
        return (self.probabilities + donated) / self.size


class CdfSampler:
    """Cumulative sums plus binary search; O(log n) per draw."""

    def __init__(self, weights):
        array = _validated_weights(weights)
        self.cumulative = np.cumsum(array)
        self.total = float(self.cumulative[-1])
        self.size = len(array)

    def lookup(self, x: float) -> int:
        """Item whose range ``[cum[i-1], cum[i])`` contains ``x``."""
        return min(int(np.searchsorted(self.cumulative, x, side="right")), self.size - 1)

    def draw(self, rng: Rng) -> int:
        return self.lookup(rng.uniform() * self.total)

    def draw_many(self, generator: np.random.Generator, size: int) -> np.ndarray:
        x = generator.random(size) * self.total
        return np.minimum(np.searchsorted(self.cumulative, x, side="right"), self.size - 1)


def build_alias_table(weights) -> AliasTable:
    return AliasTable.from_weights(weights)


def build_cdf_sampler(weights) -> CdfSampler:
    return CdfSampler(weights)


def _block_tables(offsets: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Alias sub-tables for every block, concatenated; aliases are block-local."""
    probabilities = np.ones(len(weights), dtype=np.float64)
    aliases = np.zeros(len(weights), dtype=np.int64)
    bounds = offsets.tolist()
    for start, end in zip(bounds[:-1], bounds[1:]):
        if end - start < 2:
            continue
        block_prob, block_alias = _alias_arrays(weights[start:end])
        probabilities[start:end] = block_prob
        aliases[start:end] = block_alias
    return probabilities, aliases


class _ContextLayout(NamedTuple):
    offsets: List[int]
    refs: List[int]
    probabilities: List[float]
    aliases: List[int]


def _context_draw(layout: _ContextLayout, vertex: int, rng: Rng) -> int:
    start = layout.offsets[vertex]
    n = layout.offsets[vertex + 1] - start
    if n == 0:
        return NO_CONTEXT
    x = rng.uniform() * n
    cell = int(x)
    if cell >= n:
        cell = n - 1
    slot = start + cell
    if x - cell >= layout.probabilities[slot]:
        slot = start + layout.aliases[slot]
    return layout.refs[slot]


class GraphSampler:
    """The source, context and negative distributions of one graph."""

    def __init__(self, graph: Graph, negative_weighting: NegativeWeighting = NegativeWeighting.LOG):
        if graph.total_weight <= 0:
            raise SamplerError("Graph has zero total weight.")
        self.graph = graph
        self.negative_weighting = NegativeWeighting(negative_weighting)

        self.source_table = AliasTable.from_weights(graph.out_weight_sum, allow_zero=True)

        self.context_probabilities, self.context_aliases = _block_tables(graph.offsets, graph.weights)
        self._contexts = _ContextLayout(
            graph.offsets.tolist(),
            graph.targets.tolist(),
            self.context_probabilities.tolist(),
            self.context_aliases.tolist(),
        )

        if self.negative_weighting is NegativeWeighting.LOG:
            self.negative_weights = np.log1p(graph.in_weight_sum)
        else:
            self.negative_weights = graph.in_weight_sum.copy()
        self.negative_table = AliasTable.from_weights(self.negative_weights, allow_zero=True)

        # built on first use, per vertex type
        self._typed_sources: Dict[int, Optional[Tuple[List[int], AliasTable]]] = {}
        self._typed_contexts: Dict[int, _ContextLayout] = {}

    def vertex_sampling(self, rng: Rng) -> int:
        return self.source_table.draw(rng)

    def context_sampling(self, vertex: int, rng: Rng) -> int:
        """A target of ``vertex`` drawn by edge weight, or ``NO_CONTEXT`` for a dangling vertex."""
        return _context_draw(self._contexts, vertex, rng)

    def negative_sampling(self, rng: Rng) -> int:
        return self.negative_table.draw(rng)

    def typed_vertex_sampling(self, vertex_type: int, rng: Rng) -> int:
        if vertex_type not in self._typed_sources:
            self._typed_sources[vertex_type] = self._build_typed_sources(vertex_type)
        entry = self._typed_sources[vertex_type]
        if entry is None:
            return NO_CONTEXT
        members, table = entry
        return members[table.draw(rng)]

    def typed_context_sampling(self, vertex: int, vertex_type: int, rng: Rng) -> int:
        layout = self._typed_contexts.get(vertex_type)
        if layout is None:
            layout = self._typed_contexts[vertex_type] = self._build_typed_contexts(vertex_type)
        return _context_draw(layout, vertex, rng)

    def _build_typed_sources(self, vertex_type: int) -> Optional[Tuple[List[int], AliasTable]]:
        """Members drawn by out-weight; a partition with no out-edges (items of a
        directed user->item list) falls back to its in-weight."""
        graph = self.graph
        members = np.flatnonzero(graph.vertex_types == vertex_type)
        weights = graph.out_weight_sum[members]
        if weights.sum() <= 0:
            weights = graph.in_weight_sum[members]
        if members.size == 0 or weights.sum() <= 0:
            logger.warning(f"No weighted vertices of type {vertex_type}")
            return None
        return members.tolist(), AliasTable.from_weights(weights, allow_zero=True)

    def _build_typed_contexts(self, vertex_type: int) -> _ContextLayout:
        graph = self.graph
        n = graph.vertex_count
        sources = np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.offsets))
        mask = graph.vertex_types[graph.targets] == vertex_type
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(sources[mask], minlength=n), out=offsets[1:])
        weights = graph.weights[mask]
        probabilities, aliases = _block_tables(offsets, weights)
        return _ContextLayout(offsets.tolist(), graph.targets[mask].tolist(),
                              probabilities.tolist(), aliases.tolist())

    def size_report(self) -> SizeReport:
        return SizeReport(
            source_cells=len(self.source_table),
            context_cells=int(self.context_probabilities.shape[0]),
            context_refs=int(self.graph.targets.shape[0]),
            negative_cells=len(self.negative_table),
        )


def build_graph_sampler(graph: Graph, negative_weighting: NegativeWeighting = NegativeWeighting.LOG) -> GraphSampler:
    sampler = GraphSampler(graph, negative_weighting=negative_weighting)
    logger.info(f"Built sampler: {sampler.size_report().model_dump()}")
    return sampler
