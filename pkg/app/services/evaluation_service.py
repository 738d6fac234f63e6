"""Word-similarity and item-item recommendation metrics."""
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.stats import spearmanr

from app.config import get_settings
from app.exceptions import EvaluationError
from app.schemas.evaluation import CutoffMetrics, MetricReport, Scorer, SimilarityResult
from app.services.embedding_service import KeyedEmbeddings
from app.services.graph_service import Edge, utf8_lines
from app.services.optimizer_service import cosine

logger = logging.getLogger(__name__)

BenchmarkRow = Tuple[str, str, float]


def recall_at_k(ranked: Sequence[str], relevant: Set[str], k: int) -> float:
    return sum(1 for item in ranked[:k] if item in relevant) / len(relevant)


def hit_ratio_at_k(ranked: Sequence[str], relevant: Set[str], k: int) -> float:
    return 1.0 if any(item in relevant for item in ranked[:k]) else 0.0


def average_precision_at_k(ranked: Sequence[str], relevant: Set[str], k: int) -> float:
    score = 0.0
    hits = 0
    for rank, item in enumerate(ranked[:k], start=1):
        if item in relevant:
            hits += 1
            score += hits / rank
    return score / min(len(relevant), k)


@dataclass
class RecEvalSplit:
    """Per-user training items and held-out test items (test never repeats a training item)."""

    train: Dict[str, List[str]]
    test: Dict[str, Set[str]]
    queries: int = 5
    cutoffs: List[int] = field(default_factory=lambda: [10, 20, 30])

    @classmethod
    def from_edges(cls, train_edges: Iterable[Edge], test_edges: Iterable[Edge],
                   queries: int = 5, cutoffs: Optional[List[int]] = None) -> "RecEvalSplit":
        train: Dict[str, List[str]] = OrderedDict()
        for edge in train_edges:
            items = train.setdefault(edge.source, [])
            if edge.target not in items:
                items.append(edge.target)
        test: Dict[str, Set[str]] = OrderedDict()
        for edge in test_edges:
            if edge.target in train.get(edge.source, ()):
                continue
            test.setdefault(edge.source, set()).add(edge.target)
        return cls(train, test, queries, sorted(cutoffs or [10, 20, 30]))


class Recommender:
    """Scores candidates by the mean of their dot (or cosine) scores against the query vectors."""

    def __init__(self, embeddings: KeyedEmbeddings, candidates: Optional[Iterable[int]] = None,
                 scorer: Scorer = Scorer.DOT):
        matrix = embeddings.vectors
        if Scorer(scorer) is Scorer.COSINE:
            norms = np.linalg.norm(matrix, axis=1, keepdims=True)
            norms[norms == 0] = 1.0
            matrix = matrix / norms
        self.matrix = matrix
        if candidates is None:
            self.candidates = np.arange(matrix.shape[0])
        else:
            self.candidates = np.array(sorted(set(candidates)), dtype=np.int64)
        self._candidate_matrix = matrix[self.candidates]

    def recommend(self, queries: Sequence[int], k: int, exclusions: Iterable[int] = ()) -> List[int]:
        """Top-k candidate ids, ties broken by ascending id; queries and exclusions never returned."""
        if len(queries) == 0 or self.candidates.size == 0:
            return []
        profile = self.matrix[list(queries)].mean(axis=0)
        scores = self._candidate_matrix @ profile
        excluded = set(exclusions)
        excluded.update(int(q) for q in queries)
        keep = ~np.isin(self.candidates, list(excluded))
        ids, scores = self.candidates[keep], scores[keep]
        order = np.lexsort((ids, -scores))[:k]
        return ids[order].tolist()


class EvaluationService:

    @staticmethod
    def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
        """Pearson correlation of average-tie ranks."""
        x = np.asarray(xs, dtype=np.float64)
        y = np.asarray(ys, dtype=np.float64)
        if x.ndim != 1 or x.shape != y.shape:
            raise EvaluationError("spearman needs two sequences of equal length")
        if x.size < 2:
            raise EvaluationError("spearman needs at least 2 observations")
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            raise EvaluationError("spearman is undefined for a constant sequence")
        rho, _ = spearmanr(x, y)
        return max(-1.0, min(1.0, float(rho)))

    @staticmethod
    def read_benchmark(path) -> List[BenchmarkRow]:
        rows: List[BenchmarkRow] = []
        seen: Set[frozenset] = set()
        lines = utf8_lines(path, lambda n, detail: EvaluationError(f"{path}: line {n}: {detail}"))
        for line_number, line in enumerate(lines, start=1):
            fields = line.split()
            if not fields or fields[0].startswith("#"):
                continue
            if len(fields) != 3:
                raise EvaluationError(f"{path}: line {line_number}: expected '<word1> <word2> <score>'")
            try:
                score = float(fields[2])
            except ValueError:
                raise EvaluationError(f"{path}: line {line_number}: score is not a number") from None
            if not math.isfinite(score):
                raise EvaluationError(f"{path}: line {line_number}: score must be finite")
            key = frozenset((fields[0], fields[1]))
            if key in seen:
                logger.warning(f"{path}: line {line_number}: duplicate pair ignored")
                continue
            seen.add(key)
            rows.append((fields[0], fields[1], score))
        return rows

    @staticmethod
    def eval_word_similarity(embeddings: KeyedEmbeddings, benchmark: Sequence[BenchmarkRow]) -> SimilarityResult:
        human, model = [], []
        skipped = 0
        for first, second, score in benchmark:
            if first not in embeddings or second not in embeddings:
                skipped += 1
                continue
            human.append(score)
            model.append(cosine(embeddings.vector(first), embeddings.vector(second)))
        if skipped:
            logger.warning(f"Skipped {skipped} benchmark pairs with out-of-vocabulary words")
        if len(human) < 2:
            raise EvaluationError(f"Only {len(human)} benchmark pairs are covered ({skipped} skipped)")
        rho = EvaluationService.spearman(model, human)
        return SimilarityResult(rho=rho, covered_pairs=len(human), skipped_pairs=skipped)

    @staticmethod
    def recommend(embeddings: KeyedEmbeddings, queries: Sequence[int], k: int,
                  exclusions: Iterable[int] = (), scorer: Scorer = Scorer.DOT) -> List[int]:
        return Recommender(embeddings, scorer=scorer).recommend(queries, k, exclusions)

    @staticmethod
    def eval_recommendation(embeddings: KeyedEmbeddings, split: RecEvalSplit, runs: Optional[int] = None,
                            seed: int = 1, scorer: Scorer = Scorer.DOT) -> MetricReport:
        """Recall@k, HR@k and mAP@k over users with test items, averaged over seeded query draws."""
        runs = runs or get_settings().EVAL_RUNS
        items = {item for user_items in split.train.values() for item in user_items}
        for user_items in split.test.values():
            items.update(user_items)
        candidates = [embeddings.index[item] for item in items if item in embeddings]
        recommender = Recommender(embeddings, candidates, scorer)
        k_max = max(split.cutoffs)

        evaluable = []
        for user, relevant in split.test.items():
            train_ids = [embeddings.index[item] for item in split.train.get(user, ()) if item in embeddings]
            if relevant and train_ids:
                evaluable.append((user, relevant, train_ids))
        skipped = len(split.test) - len(evaluable)
        if skipped:
            logger.warning(f"{skipped} users have no embedded training items to query with")
        if not evaluable:
            raise EvaluationError("No users with both test items and embedded training items")

        totals = {k: np.zeros(3) for k in split.cutoffs}
        for run in range(runs):
            generator = np.random.default_rng(seed + run)
            run_totals = {k: np.zeros(3) for k in split.cutoffs}
            for user, relevant, train_ids in evaluable:
                count = min(split.queries, len(train_ids))
                queries = generator.choice(train_ids, size=count, replace=False).tolist()
                ranked_ids = recommender.recommend(queries, k_max, exclusions=train_ids)
                ranked = [embeddings.names[i] for i in ranked_ids]
                for k in split.cutoffs:
                    run_totals[k] += (
                        recall_at_k(ranked, relevant, k),
                        hit_ratio_at_k(ranked, relevant, k),
                        average_precision_at_k(ranked, relevant, k),
                    )
            for k in split.cutoffs:
                totals[k] += run_totals[k] / len(evaluable)

        cutoffs = {}
        for k in split.cutoffs:
            recall, hit_ratio, ap = (totals[k] / runs).tolist()
            cutoffs[k] = CutoffMetrics(recall=recall, hit_ratio=hit_ratio, map=ap)
        logger.info(f"Evaluated {len(evaluable)} users over {runs} runs")
        return MetricReport(cutoffs=cutoffs, users_evaluated=len(evaluable), users_skipped=skipped, runs=runs)

    @staticmethod
    def split_ratings(edges: Sequence[Edge], train_fraction: float = 0.8, seed: int = 1) -> Tuple[List[Edge], List[Edge]]:
        """Keep a random ``train_fraction`` of every user's records for training; users keep at least one."""
        if not 0.0 < train_fraction <= 1.0:
            raise EvaluationError("train_fraction must lie in (0, 1]")
        by_user: Dict[str, List[Edge]] = OrderedDict()
        for edge in edges:
            by_user.setdefault(edge.source, []).append(edge)
        generator = np.random.default_rng(seed)
        train: List[Edge] = []
        test: List[Edge] = []
        for records in by_user.values():
            order = generator.permutation(len(records))
            keep = max(1, int(round(train_fraction * len(records))))
            train.extend(records[i] for i in order[:keep])
            test.extend(records[i] for i in order[keep:])
        return train, test
