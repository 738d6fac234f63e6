import numpy as np
import pytest
from scipy.stats import rankdata

from app.exceptions import EvaluationError
from app.schemas.evaluation import Scorer
from app.services.embedding_service import KeyedEmbeddings
from app.services.evaluation_service import (
    EvaluationService,
    RecEvalSplit,
    average_precision_at_k,
    hit_ratio_at_k,
    recall_at_k,
)
from tests.helpers import parse


def genre_embeddings():
    """Two orthogonal genres of three items each."""
    names = ["a1", "a2", "a3", "b1", "b2", "b3"]
    vectors = np.array([[1.0, 0.0]] * 3 + [[0.0, 1.0]] * 3)
    return KeyedEmbeddings(names, vectors)


def genre_split(**options):
    train = parse("ua a1 4\nua a2 5\nub b1 3\nub b2 2\n")
    test = parse("ua a3 1\nub b3 1\n")
    return RecEvalSplit.from_edges(train, test, **options)


class TestSpearman:

    def test_identical_order(self):
        assert EvaluationService.spearman([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_reversed_order(self):
        assert EvaluationService.spearman([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)

    def test_tied_ranks(self):
        # ranks (1, 2.5, 2.5, 4) against (1, 3, 2, 4): 4.5 / sqrt(4.5 * 5)
        assert EvaluationService.spearman([1, 2, 2, 4], [1, 3, 2, 4]) == pytest.approx(0.948683298, abs=1e-9)

    def test_monotone_invariance(self):
        generator = np.random.default_rng(3)
        xs, ys = generator.uniform(0.1, 5, 30), generator.uniform(0.1, 5, 30)
        rho = EvaluationService.spearman(xs, ys)
        assert EvaluationService.spearman(np.exp(xs), ys ** 3) == pytest.approx(rho, abs=1e-12)
        assert EvaluationService.spearman(np.log(xs), -1.0 / ys) == pytest.approx(rho, abs=1e-12)

    def test_heavy_ties_match_ranked_pearson(self):
        generator = np.random.default_rng(8)
        xs, ys = generator.integers(0, 4, 50), generator.integers(0, 3, 50)
        rx, ry = rankdata(xs), rankdata(ys)
        expected = np.corrcoef(rx, ry)[0, 1]
        assert EvaluationService.spearman(xs, ys) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("xs,ys", [([1, 2], [1, 2, 3]), ([1], [1]), ([2, 2, 2], [1, 2, 3]), ([1, 2, 3], [5, 5, 5])])
    def test_invalid(self, xs, ys):
        with pytest.raises(EvaluationError):
            EvaluationService.spearman(xs, ys)


class TestWordSimilarity:

    def test_rank_perfect(self):
        embeddings = KeyedEmbeddings(["x", "y", "z", "w"], np.array([[1.0, 0.0], [0.9, 0.1], [0.5, 0.5], [0.0, 1.0]]))
        benchmark = [("x", "y", 9.0), ("x", "z", 6.5), ("x", "w", 1.0), ("x", "oov", 3.0)]
        result = EvaluationService.eval_word_similarity(embeddings, benchmark)
        assert result.rho == pytest.approx(1.0)
        assert (result.covered_pairs, result.skipped_pairs) == (3, 1)

    def test_identical_and_orthogonal_pairs(self):
        embeddings = KeyedEmbeddings(["p", "q", "r", "s"], np.array([[1.0, 2.0], [1.0, 2.0], [1.0, 0.0], [0.0, 3.0]]))
        result = EvaluationService.eval_word_similarity(embeddings, [("p", "q", 10.0), ("r", "s", 0.0)])
        assert result.rho == pytest.approx(1.0)

    def test_all_out_of_vocabulary(self):
        embeddings = KeyedEmbeddings(["x"], np.ones((1, 2)))
        with pytest.raises(EvaluationError, match="2 skipped"):
            EvaluationService.eval_word_similarity(embeddings, [("a", "b", 1.0), ("c", "d", 2.0)])

    def test_read_benchmark(self, write_file):
        path = write_file("bench.txt", "# pairs\ntiger cat 7.35\ncat tiger 7.00\n\nbook paper 7.46\n")
        assert EvaluationService.read_benchmark(path) == [("tiger", "cat", 7.35), ("book", "paper", 7.46)]

    def test_read_benchmark_rejects_bad_rows(self, write_file):
        with pytest.raises(EvaluationError, match="line 2"):
            EvaluationService.read_benchmark(write_file("bench.txt", "a b 1\na b\n"))


class TestRecommend:

    def test_identical_vector_first(self):
        embeddings = KeyedEmbeddings(["q", "same", "other"], np.array([[1.0, 1.0], [1.0, 1.0], [1.0, -1.0]]))
        assert EvaluationService.recommend(embeddings, [0], 2) == [1, 2]

    def test_all_excluded(self):
        embeddings = KeyedEmbeddings(["q", "c1", "c2"], np.eye(3))
        assert EvaluationService.recommend(embeddings, [0], 5, exclusions=[1, 2]) == []

    def test_hand_scores(self):
        vectors = np.array([[1.0, 0.0], [0.9, 0.3], [0.1, 0.9], [0.5, -0.2]])
        embeddings = KeyedEmbeddings(["q", "first", "second", "third"], vectors)
        assert EvaluationService.recommend(embeddings, [0], 2) == [1, 3]

    def test_ties_by_ascending_id(self):
        embeddings = KeyedEmbeddings(["q", "c", "b", "a"], np.array([[1.0], [2.0], [2.0], [2.0]]))
        assert EvaluationService.recommend(embeddings, [0], 3) == [1, 2, 3]

    def test_never_returns_queries_or_exclusions(self):
        generator = np.random.default_rng(1)
        embeddings = KeyedEmbeddings([f"i{n}" for n in range(30)], generator.normal(size=(30, 4)))
        ranked = EvaluationService.recommend(embeddings, [0, 5], 10, exclusions=[7, 8, 9])
        assert len(ranked) == 10
        assert not set(ranked) & {0, 5, 7, 8, 9}

    def test_mean_of_query_scores(self):
        embeddings = KeyedEmbeddings(["q1", "q2", "x", "y"],
                                     np.array([[1.0, 0.0], [0.0, 1.0], [3.0, -1.0], [1.0, 1.0]]))
        # mean scores: x = (3 - 1) / 2 = 1.0, y = (1 + 1) / 2 = 1.0, tie -> ascending id
        assert EvaluationService.recommend(embeddings, [0, 1], 2) == [2, 3]

    def test_cosine_scorer(self):
        embeddings = KeyedEmbeddings(["q", "long", "aligned"], np.array([[1.0, 0.0], [10.0, 10.0], [0.5, 0.0]]))
        assert EvaluationService.recommend(embeddings, [0], 1) == [1]
        assert EvaluationService.recommend(embeddings, [0], 1, scorer=Scorer.COSINE) == [2]


class TestMetrics:

    def test_partial_hit(self):
        ranked = ["a", "x", "y"]
        assert recall_at_k(ranked, {"a", "b"}, 10) == 0.5
        assert hit_ratio_at_k(ranked, {"a", "b"}, 10) == 1.0

    def test_hit_at_rank_three(self):
        assert average_precision_at_k(["x", "y", "a"], {"a"}, 10) == pytest.approx(1 / 3)

    def test_perfect_ranking(self):
        ranked = ["a", "b", "c", "x"]
        assert average_precision_at_k(ranked, {"a", "b", "c"}, 10) == 1.0
        assert recall_at_k(ranked, {"a", "b", "c"}, 2) == pytest.approx(2 / 3)
        assert average_precision_at_k(ranked, {"a", "b", "c"}, 2) == 1.0

    def test_miss(self):
        assert hit_ratio_at_k(["x"], {"a"}, 10) == 0.0
        assert recall_at_k(["x"], {"a"}, 10) == 0.0
        assert average_precision_at_k(["x"], {"a"}, 10) == 0.0

    def test_monotone_in_k(self):
        ranked = ["x", "a", "y", "b", "z", "c"]
        relevant = {"a", "b", "c"}
        recalls = [recall_at_k(ranked, relevant, k) for k in range(1, 7)]
        assert recalls == sorted(recalls)


class TestEvalRecommendation:

    def test_split_excludes_training_items(self):
        split = RecEvalSplit.from_edges(parse("u a 1\nu b 1\n"), parse("u b 1\nu c 1\nv c 1\n"))
        assert split.test == {"u": {"c"}, "v": {"c"}}
        assert split.cutoffs == [10, 20, 30]

    def test_perfect_ranker(self):
        report = EvaluationService.eval_recommendation(genre_embeddings(), genre_split(), runs=3)
        for k in (10, 20, 30):
            metrics = report.cutoffs[k]
            assert (metrics.recall, metrics.hit_ratio, metrics.map) == (1.0, 1.0, 1.0)
        assert report.users_evaluated == 2
        assert report.runs == 3

    def test_default_runs_from_settings(self):
        report = EvaluationService.eval_recommendation(genre_embeddings(), genre_split(cutoffs=[1]))
        assert report.runs == 10
        assert list(report.cutoffs) == [1]

    def test_cold_users_skipped(self):
        split = RecEvalSplit.from_edges(parse("ua a1 1\nuz unknown 1\n"), parse("ua a2 1\nuz a3 1\n"))
        report = EvaluationService.eval_recommendation(genre_embeddings(), split, runs=1)
        assert (report.users_evaluated, report.users_skipped) == (1, 1)

    def test_no_evaluable_users(self):
        split = RecEvalSplit.from_edges(parse("uz unknown 1\n"), parse("uz a1 1\n"))
        with pytest.raises(EvaluationError):
            EvaluationService.eval_recommendation(genre_embeddings(), split, runs=1)

    def test_seeded_reproducibility_and_bounds(self):
        generator = np.random.default_rng(8)
        names = [f"i{n}" for n in range(40)]
        embeddings = KeyedEmbeddings(names, generator.normal(size=(40, 6)))
        train_lines, test_lines = [], []
        for user in range(12):
            items = generator.choice(40, size=10, replace=False)
            train_lines += [f"u{user} i{i} 1\n" for i in items[:7]]
            test_lines += [f"u{user} i{i} 1\n" for i in items[7:]]
        split = RecEvalSplit.from_edges(parse("".join(train_lines)), parse("".join(test_lines)), queries=3)
        first = EvaluationService.eval_recommendation(embeddings, split, runs=4, seed=5)
        second = EvaluationService.eval_recommendation(embeddings, split, runs=4, seed=5)
        assert first == second
        for metrics in first.cutoffs.values():
            assert metrics.hit_ratio >= metrics.recall
        recalls = [first.cutoffs[k].recall for k in (10, 20, 30)]
        assert recalls == sorted(recalls)


class TestSplitRatings:

    def test_per_user_fraction(self):
        edges = parse("".join(f"u1 i{n} 1\n" for n in range(10)) + "u2 j1 5\n")
        train, test = EvaluationService.split_ratings(edges, 0.8, seed=3)
        assert sum(e.source == "u1" for e in train) == 8
        assert sum(e.source == "u1" for e in test) == 2
        assert [e.target for e in train if e.source == "u2"] == ["j1"]
        assert sorted(train + test) == sorted(edges)

    def test_seeded(self):
        edges = parse("".join(f"u{n % 3} i{n} 1\n" for n in range(30)))
        assert EvaluationService.split_ratings(edges, seed=4) == EvaluationService.split_ratings(edges, seed=4)

    def test_fraction_bounds(self):
        with pytest.raises(EvaluationError):
            EvaluationService.split_ratings(parse("u i 1\n"), 0.0)
