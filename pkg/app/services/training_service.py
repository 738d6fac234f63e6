"""DeepWalk, Walklets, LINE and HPE trainers on sampled vertex-context pairs.

Every trainer is a stream of positive ``(slot, vertex, context)`` pairs
drawn through the graph sampler; the shared worker loop adds ``e`` negatives
per pair and applies the SGD step to the model in ``slot``. With more than
one worker the loop runs in forked processes over shared matrices.
"""
import logging
import multiprocessing
import time
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np

from app.config import get_settings
from app.exceptions import ConfigError, TrainingError
from app.schemas.training import LineOrder, ModelName, TrainConfig, WalkStart
from app.services.graph_service import Graph
from app.services.optimizer_service import EmbeddingModel, TrainProgress, init_model
from app.services.sampler_service import NO_CONTEXT, GraphSampler, Rng, build_graph_sampler

logger = logging.getLogger(__name__)

PairStream = Iterator[Tuple[int, int, int]]

INIT_STREAM = 1
SHUFFLE_STREAM = 2


def _stream_seed(seed: int, key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(key,))


def generate_walk(sampler: GraphSampler, start: int, length: int, rng: Rng) -> List[int]:
    """Weighted walk of up to ``length`` steps; stops early at a dangling vertex."""
    walk = [start]
    current = start
    for _ in range(length):
        current = sampler.context_sampling(current, rng)
        if current == NO_CONTEXT:
            break
        walk.append(current)
    return walk


def window_pairs(walk: List[int], window: int) -> Iterator[Tuple[int, int]]:
    n = len(walk)
    for i, center in enumerate(walk):
        for j in range(max(0, i - window), min(n, i + window + 1)):
            if j != i:
                yield center, walk[j]


def offset_pairs(walk: List[int], offset: int) -> Iterator[Tuple[int, int]]:
    n = len(walk)
    for i, center in enumerate(walk):
        if i - offset >= 0:
            yield center, walk[i - offset]
        if i + offset < n:
            yield center, walk[i + offset]


def _worker_share(total: int, worker: int, workers: int) -> int:
    return total // workers + (1 if worker < total % workers else 0)


@dataclass
class TrainResult:
    embeddings: np.ndarray
    context: Optional[np.ndarray]
    models: List[EmbeddingModel] = field(default_factory=list)
    updates: int = 0
    duration_seconds: float = 0.0


class Trainer:
    model_name: ModelName

    def __init__(self, graph: Graph, cfg: TrainConfig, sampler: Optional[GraphSampler] = None):
        self.graph = graph
        self.cfg = cfg
        self.sampler = sampler or build_graph_sampler(graph, cfg.negative_weighting)
        self.models: List[EmbeddingModel] = []
        self.settings = get_settings()

    # -- per-model hooks -------------------------------------------------

    def init_models(self, generator: np.random.Generator) -> List[EmbeddingModel]:
        return [init_model(self.graph.vertex_count, self.cfg.dimensions, generator)]

    def total_updates(self) -> int:
        raise NotImplementedError

    def positive_pairs(self, worker: int, rng: Rng) -> PairStream:
        raise NotImplementedError

    def apply(self, slot: int, vertex: int, context: int, negatives: List[int], alpha: float) -> None:
        self.models[slot].update_pair(vertex, context, negatives, alpha)

    def embeddings(self) -> np.ndarray:
        return np.array(self.models[0].phi)

    def context_embeddings(self) -> Optional[np.ndarray]:
        return np.array(self.models[0].phi_ctx)

    # -- driver ----------------------------------------------------------

    def _run_worker(self, worker: int, progress: TrainProgress) -> None:
        rng = Rng(self.cfg.seed + worker)
        negative_sampling = self.sampler.negative_sampling
        negatives_count = self.cfg.negatives
        sync_interval = self.settings.PROGRESS_SYNC_INTERVAL
        alpha = progress.decay_alpha()
        pending = 0
        for slot, vertex, context in self.positive_pairs(worker, rng):
            negatives = [negative_sampling(rng) for _ in range(negatives_count)]
            self.apply(slot, vertex, context, negatives, alpha)
            pending += 1
            if pending >= sync_interval:
                progress.advance(pending)
                pending = 0
                alpha = progress.decay_alpha()
        progress.advance(pending)

    def _run_parallel(self, total: int) -> int:
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:
            raise ConfigError("Multi-worker training needs the 'fork' start method.") from None

        for model in self.models:
            model.share_memory(ctx)
        counter = ctx.Value("q", 0)
        progress = TrainProgress(total, self.cfg.alpha, counter=counter)
        processes = [
            ctx.Process(target=self._run_worker, args=(rank, progress), name=f"vcs-worker-{rank}")
            for rank in range(self.cfg.workers)
        ]
        for process in processes:
            process.start()
        for process in processes:
            process.join()
        for model in self.models:
            model.detach()

        failed = [p.name for p in processes if p.exitcode != 0]
        if failed:
            logger.error(f"Training workers failed: {failed}")
            raise TrainingError(f"{len(failed)} training worker(s) exited abnormally.")
        return progress.completed_updates

    def train(self) -> TrainResult:
        started = time.time()
        generator = np.random.default_rng(_stream_seed(self.cfg.seed, INIT_STREAM))
        self.models = self.init_models(generator)
        total = self.total_updates()
        logger.info(
            f"Training {self.model_name.value}: |V|={self.graph.vertex_count} d={self.cfg.dimensions} "
            f"budget={total} workers={self.cfg.workers}"
        )

        if self.cfg.workers == 1:
            progress = TrainProgress(total, self.cfg.alpha)
            self._run_worker(0, progress)
            updates = progress.completed_updates
        else:
            updates = self._run_parallel(total)

        duration = time.time() - started
        logger.info(f"Finished {self.model_name.value}: {updates} updates in {duration:.2f}s")
        return TrainResult(
            embeddings=self.embeddings(),
            context=self.context_embeddings(),
            models=self.models,
            updates=updates,
            duration_seconds=duration,
        )


class DeepWalkTrainer(Trainer):
    model_name = ModelName.DEEPWALK

    def walk_pairs(self, walk: List[int]) -> PairStream:
        for vertex, context in window_pairs(walk, self.cfg.window):
            yield 0, vertex, context

    def pairs_per_walk(self, nodes: int) -> int:
        w = self.cfg.window
        return sum(min(i, w) + min(nodes - 1 - i, w) for i in range(nodes))

    def total_updates(self) -> int:
        return self.cfg.walk_times * self.graph.vertex_count * self.pairs_per_walk(self.cfg.walk_length + 1)

    def walk_starts(self, worker: int, rng: Rng) -> Iterator[int]:
        """Per epoch: a slice of one seeded shuffle of V (same order in every worker), or weighted draws."""
        workers = self.cfg.workers
        n = self.graph.vertex_count
        order = list(range(n))
        shuffler = Rng(_stream_seed(self.cfg.seed, SHUFFLE_STREAM))
        for _ in range(self.cfg.walk_times):
            if self.cfg.walk_start is WalkStart.SHUFFLE:
                shuffler.shuffle(order)
                yield from order[worker::workers]
            else:
                for _ in range(_worker_share(n, worker, workers)):
                    yield self.sampler.vertex_sampling(rng)

    def positive_pairs(self, worker: int, rng: Rng) -> PairStream:
        for start in self.walk_starts(worker, rng):
            walk = generate_walk(self.sampler, start, self.cfg.walk_length, rng)
            yield from self.walk_pairs(walk)


class WalkletsTrainer(DeepWalkTrainer):
    """One model per step offset, fed from the same walks; output is their concatenation."""

    model_name = ModelName.WALKLETS

    def init_models(self, generator: np.random.Generator) -> List[EmbeddingModel]:
        return [init_model(self.graph.vertex_count, self.cfg.dimensions, generator) for _ in self.cfg.offsets]

    def pairs_per_walk(self, nodes: int) -> int:
        return sum(2 * max(0, nodes - k) for k in self.cfg.offsets)

    def walk_pairs(self, walk: List[int]) -> PairStream:
        for slot, offset in enumerate(self.cfg.offsets):
            for vertex, context in offset_pairs(walk, offset):
                yield slot, vertex, context

    def embeddings(self) -> np.ndarray:
        return np.hstack([np.array(model.phi) for model in self.models])

    def context_embeddings(self) -> Optional[np.ndarray]:
        return None


class LineTrainer(Trainer):
    """First order: one tied matrix for both roles. Second order: phi/phi_ctx pair."""

    model_name = ModelName.LINE

    def init_models(self, generator: np.random.Generator) -> List[EmbeddingModel]:
        n, d = self.graph.vertex_count, self.cfg.dimensions
        models = []
        if self.cfg.line_order in (LineOrder.FIRST, LineOrder.BOTH):
            models.append(init_model(n, d, generator, tied=True))
        if self.cfg.line_order in (LineOrder.SECOND, LineOrder.BOTH):
            models.append(init_model(n, d, generator))
        return models

    def total_updates(self) -> int:
        return self.cfg.update_budget

    def positive_pairs(self, worker: int, rng: Rng) -> PairStream:
        sampler = self.sampler
        for _ in range(_worker_share(self.cfg.update_budget, worker, self.cfg.workers)):
            source = sampler.vertex_sampling(rng)
            context = sampler.context_sampling(source, rng)
            if context != NO_CONTEXT:
                yield 0, source, context

    def apply(self, slot: int, vertex: int, context: int, negatives: List[int], alpha: float) -> None:
        # both orders learn from the same sampled pair and negatives
        for model in self.models:
            model.update_pair(vertex, context, negatives, alpha)

    def embeddings(self) -> np.ndarray:
        return np.hstack([np.array(model.phi) for model in self.models])

    def context_embeddings(self) -> Optional[np.ndarray]:
        second = [model for model in self.models if not model.tied]
        return np.array(second[0].phi_ctx) if second else None


class HpeTrainer(Trainer):
    """Short walks from a weighted start; every pair is (start, walk vertex), so only the start's phi moves."""

    model_name = ModelName.HPE

    def total_updates(self) -> int:
        return self.cfg.update_budget

    def positive_pairs(self, worker: int, rng: Rng) -> PairStream:
        sampler = self.sampler
        share = _worker_share(self.cfg.update_budget, worker, self.cfg.workers)
        emitted = 0
        while emitted < share:
            start = sampler.vertex_sampling(rng)
            current = start
            for _ in range(self.cfg.walk_length):
                current = sampler.context_sampling(current, rng)
                if current == NO_CONTEXT:
                    break
                yield 0, start, current
                emitted += 1


TRAINERS = {
    ModelName.DEEPWALK: DeepWalkTrainer,
    ModelName.WALKLETS: WalkletsTrainer,
    ModelName.LINE: LineTrainer,
    ModelName.HPE: HpeTrainer,
}


def create_trainer(graph: Graph, cfg: TrainConfig, sampler: Optional[GraphSampler] = None) -> Trainer:
    return TRAINERS[cfg.model](graph, cfg, sampler)


def train(graph: Graph, cfg: TrainConfig, sampler: Optional[GraphSampler] = None) -> TrainResult:
    return create_trainer(graph, cfg, sampler).train()


def train_deepwalk(graph: Graph, cfg: TrainConfig) -> EmbeddingModel:
    return DeepWalkTrainer(graph, cfg).train().models[0]


def train_walklets(graph: Graph, cfg: TrainConfig) -> np.ndarray:
    return WalkletsTrainer(graph, cfg).train().embeddings


def train_line(graph: Graph, cfg: TrainConfig) -> np.ndarray:
    return LineTrainer(graph, cfg).train().embeddings


def train_hpe(graph: Graph, cfg: TrainConfig) -> EmbeddingModel:
    return HpeTrainer(graph, cfg).train().models[0]
