import math

import pytest

from app.exceptions import WeightingError
from app.schemas.graph import WeightScheme
from app.schemas.training import ModelName, TrainConfig
from app.services.embedding_service import KeyedEmbeddings
from app.services.evaluation_service import EvaluationService, RecEvalSplit
from app.services.graph_service import Edge, build_graph
from app.services.training_service import train_hpe
from app.services.weighting_service import WeightingService
from tests.helpers import parse


def weights_by_pair(edges):
    return {(e.source, e.target): e.weight for e in edges}


def test_binary():
    edges = parse("a b 3\na c 0.5\nb c 7\n")
    assert [e.weight for e in WeightingService.reweight(edges, WeightScheme.BINARY)] == [1.0, 1.0, 1.0]


def test_binary_idempotent():
    edges = parse("a b 3\nb c 7\n")
    once = WeightingService.reweight(edges, WeightScheme.BINARY)
    assert WeightingService.reweight(once, WeightScheme.BINARY) == once


@pytest.mark.parametrize("scheme", [WeightScheme.TF, WeightScheme.RATING])
def test_identity_schemes_aggregate_duplicates(scheme):
    edges = parse("a b 1\na b 2\nb c 4\n")
    assert weights_by_pair(WeightingService.reweight(edges, scheme)) == {("a", "b"): 3.0, ("b", "c"): 4.0}


def test_tfidf():
    edges = parse("a j 3\nb j 1\nc a 1\n")
    result = weights_by_pair(WeightingService.reweight(edges, WeightScheme.TFIDF))
    assert result[("a", "j")] == pytest.approx(2.079442, abs=1e-6)
    assert result[("c", "a")] == pytest.approx(math.log(4), abs=1e-12)
    assert set(result) == {("a", "j"), ("b", "j"), ("c", "a")}


def test_tfidf_drops_targets_reached_by_every_vertex():
    edges = parse("a b 2\nb b 1\n")
    assert WeightingService.reweight(edges, WeightScheme.TFIDF) == []


def test_rating_irf():
    lines = [f"u{i} hit 4\n" for i in range(10)] + [f"u{i} common 2\n" for i in range(10, 100)]
    edges = parse("".join(lines), typed=True)
    result = weights_by_pair(WeightingService.reweight(edges, WeightScheme.RATING_IRF))
    assert result[("u0", "hit")] == pytest.approx(9.210340, abs=1e-6)
    assert result[("u50", "common")] == pytest.approx(2 * math.log(100 / 90), abs=1e-12)


def test_rating_irf_keeps_types():
    edges = parse("u1 i1 4\nu2 i2 3\n", typed=True)
    result = WeightingService.reweight(edges, WeightScheme.RATING_IRF)
    assert all(e.source_type == 0 and e.target_type == 1 for e in result)


def test_rating_irf_needs_typed_edges():
    with pytest.raises(WeightingError):
        WeightingService.reweight([Edge("u1", "i1", 4.0)], WeightScheme.RATING_IRF)


def test_scheme_names():
    assert WeightScheme.parse("rating-irf") is WeightScheme.RATING_IRF
    assert WeightScheme.parse("TFIDF") is WeightScheme.TFIDF
    with pytest.raises(ValueError):
        WeightScheme.parse("bm25")


def _both_directions(edges):
    return edges + [Edge(e.target, e.source, e.weight, e.target_type, e.source_type) for e in edges]


@pytest.mark.slow
def test_rating_irf_recommends_better_than_binary():
    """Two user clusters share five items everyone rates; only the cluster items separate them."""
    train_lines, test_lines = [], []
    for cluster in ("a", "b"):
        for u in range(10):
            user = f"user_{cluster}{u}"
            train_lines += [f"{user} popular{p} 5\n" for p in range(5)]
            for i in range(4):
                line = f"{user} item_{cluster}{i} 3\n"
                (test_lines if i == u % 4 else train_lines).append(line)
    train_edges = parse("".join(train_lines), typed=True)
    split = RecEvalSplit.from_edges(train_edges, parse("".join(test_lines)), queries=5, cutoffs=[10])

    irf_wins = 0
    irf_scores = []
    for seed in range(1, 11):
        scores = {}
        for scheme in (WeightScheme.BINARY, WeightScheme.RATING_IRF):
            graph = build_graph(_both_directions(WeightingService.reweight(train_edges, scheme)))
            cfg = TrainConfig(model=ModelName.HPE, walk_length=3, window=1, dimensions=8,
                              sample_times=0.05, seed=seed)
            embeddings = KeyedEmbeddings(list(graph.vertex_names), train_hpe(graph, cfg).phi)
            report = EvaluationService.eval_recommendation(embeddings, split, runs=3, seed=seed)
            scores[scheme] = report.cutoffs[10].map
        irf_scores.append(scores[WeightScheme.RATING_IRF])
        irf_wins += scores[WeightScheme.RATING_IRF] > scores[WeightScheme.BINARY]
    assert irf_wins >= 8
    assert sum(irf_scores) / len(irf_scores) > 0.9
