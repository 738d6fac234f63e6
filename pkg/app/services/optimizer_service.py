"""Embedding matrices and the negative-sampling SGD step.

Workers share ``phi`` (vertex role) and ``phi_ctx`` (context role) and
update rows without locks. The coefficient of a pair is ``label - sigma(x)``:
``1 - sigma`` for the positive context, ``-sigma`` for each negative.
"""
import ctypes
import logging
import math
import multiprocessing
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from app.config import get_settings
from app.exceptions import TrainingError

logger = logging.getLogger(__name__)


class SigmoidTable:
    """Linear interpolation over a precomputed grid on ``[-bound, bound]``; saturates to 0/1 outside."""

    def __init__(self, size: Optional[int] = None, bound: Optional[float] = None):
        settings = get_settings()
        self.size = size or settings.SIGMOID_TABLE_SIZE
        self.bound = bound or settings.SIGMOID_BOUND
        grid = np.linspace(-self.bound, self.bound, self.size)
        self._values = (1.0 / (1.0 + np.exp(-grid))).tolist()
        self._scale = (self.size - 1) / (2.0 * self.bound)

    def __call__(self, x: float) -> float:
        if x > self.bound:
            return 1.0
        if x < -self.bound:
            return 0.0
        position = (x + self.bound) * self._scale
        i = int(position)
        if i >= self.size - 1:
            return self._values[-1]
        low = self._values[i]
        return low + (position - i) * (self._values[i + 1] - low)


_SIGMOID: Optional[SigmoidTable] = None


def sigmoid_table() -> SigmoidTable:
    global _SIGMOID
    if _SIGMOID is None:
        _SIGMOID = SigmoidTable()
    return _SIGMOID


def _shared_matrix(ctx, source: np.ndarray) -> np.ndarray:
    buffer = ctx.RawArray(ctypes.c_double, source.size)
    matrix = np.frombuffer(buffer, dtype=np.float64).reshape(source.shape)
    matrix[:] = source
    return matrix


class EmbeddingModel:
    """``phi`` and ``phi_ctx``, both ``|V| x d``.

    With ``tied=True`` both roles are the same matrix (first-order LINE).
    """

    def __init__(self, phi: np.ndarray, phi_ctx: Optional[np.ndarray] = None, check_finite: Optional[bool] = None):
        self.phi = phi
        self.tied = phi_ctx is None
        self.phi_ctx = phi if phi_ctx is None else phi_ctx
        if phi.shape != self.phi_ctx.shape:
            raise TrainingError("phi and phi_ctx must have the same shape")
        self.check_finite = get_settings().DEBUG if check_finite is None else check_finite
        self.sigmoid = sigmoid_table()

    @property
    def vertex_count(self) -> int:
        return self.phi.shape[0]

    @property
    def dimensions(self) -> int:
        return self.phi.shape[1]

    def share_memory(self, ctx=None) -> "EmbeddingModel":
        """Move both matrices into process-shared buffers (fork workers see the same rows)."""
        ctx = ctx or multiprocessing.get_context("fork")
        self.phi = _shared_matrix(ctx, self.phi)
        self.phi_ctx = self.phi if self.tied else _shared_matrix(ctx, self.phi_ctx)
        return self

    def detach(self) -> "EmbeddingModel":
        """Copy shared buffers back into private arrays."""
        self.phi = np.array(self.phi)
        self.phi_ctx = self.phi if self.tied else np.array(self.phi_ctx)
        return self

    def score(self, vertex: int, context: int) -> float:
        return self.sigmoid(float(self.phi[vertex] @ self.phi_ctx[context]))

    def update_pair(
        self,
        vertex: int,
        context: int,
        negatives: Sequence[int],
        alpha: float,
        update_vertex: bool = True,
    ) -> None:
        """One SGD step for ``(vertex, context)`` against ``negatives``.

        Context rows move as they are visited; the gradient on ``phi[vertex]``
        is accumulated against the pre-update context rows and applied once.
        """
        phi_v = self.phi[vertex]
        gradient = np.zeros(phi_v.shape[0])
        sigmoid = self.sigmoid
        phi_ctx = self.phi_ctx

        row = phi_ctx[context]
        g = (1.0 - sigmoid(float(phi_v @ row))) * alpha
        gradient += g * row
        row += g * phi_v
        for negative in negatives:
            row = phi_ctx[negative]
            g = -sigmoid(float(phi_v @ row)) * alpha
            gradient += g * row
            row += g * phi_v

        if update_vertex:
            phi_v += gradient
        touched = [context, *negatives]
        if self.check_finite and not (np.all(np.isfinite(phi_v)) and np.all(np.isfinite(phi_ctx[touched]))):
            raise TrainingError(f"Non-finite parameters after updating pair ({vertex}, {context})")


def init_model(vertex_count: int, dimensions: int, generator: np.random.Generator, tied: bool = False) -> EmbeddingModel:
    """``phi`` uniform in ``[-0.5/d, 0.5/d]``; ``phi_ctx`` zeros unless tied."""
    phi = (generator.random((vertex_count, dimensions)) - 0.5) / dimensions
    if tied:
        return EmbeddingModel(phi)
    return EmbeddingModel(phi, np.zeros((vertex_count, dimensions)))


def _neg_log_sigmoid(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, -x)


def objective_value(
    model: EmbeddingModel,
    positive_pairs: Iterable[Tuple[int, int]],
    negative_pairs: Iterable[Tuple[int, int]],
) -> float:
    """``-sum log sigma(phi_i . phi'_j) - sum log sigma(-phi_i . phi'_k)``, computed exactly."""
    total = 0.0
    for vertex, context in positive_pairs:
        total += float(_neg_log_sigmoid(model.phi[vertex] @ model.phi_ctx[context]))
    for vertex, negative in negative_pairs:
        total += float(_neg_log_sigmoid(-(model.phi[vertex] @ model.phi_ctx[negative])))
    return total


class TrainProgress:
    """Linear learning-rate decay against an update budget.

    ``completed`` may live in a shared ``multiprocessing.Value``; workers add
    to it in batches, so reads are approximate.
    """

    def __init__(self, total_updates: int, alpha0: float, counter=None, floor_ratio: Optional[float] = None):
        self.total_updates = max(1, int(total_updates))
        self.alpha0 = alpha0
        ratio = get_settings().ALPHA_FLOOR_RATIO if floor_ratio is None else floor_ratio
        self.alpha_min = alpha0 * ratio
        self._counter = counter
        self._local = 0

    @property
    def completed_updates(self) -> int:
        if self._counter is not None:
            return self._counter.value
        return self._local

    def advance(self, count: int) -> None:
        if self._counter is None:
            self._local += count
            return
        with self._counter.get_lock():
            self._counter.value += count

    def decay_alpha(self) -> float:
        completed = self.completed_updates
        return max(self.alpha_min, self.alpha0 * (1.0 - completed / self.total_updates))


def decay_alpha(progress: TrainProgress) -> float:
    return progress.decay_alpha()


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    denominator = float(np.linalg.norm(a) * np.linalg.norm(b))
    if denominator == 0.0 or math.isnan(denominator):
        return 0.0
    return float(a @ b) / denominator
