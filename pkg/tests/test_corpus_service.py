import pytest

from app.exceptions import UsageError
from app.services.corpus_service import CorpusService


def weights(edges):
    return {(e.source, e.target): e.weight for e in edges}


def test_window_counts_both_directions():
    edges = CorpusService.cooccurrence_edges(["a b c d\n"], window=2, min_count=1)
    assert weights(edges) == {
        ("a", "b"): 1.0, ("b", "a"): 1.0,
        ("b", "c"): 1.0, ("c", "b"): 1.0,
        ("c", "d"): 1.0, ("d", "c"): 1.0,
    }


def test_counts_accumulate_across_lines():
    edges = CorpusService.cooccurrence_edges(["a b\n", "b a\n", "a c\n"], window=5, min_count=1)
    result = weights(edges)
    assert result[("a", "b")] == 2.0
    assert result[("c", "a")] == 1.0


def test_rare_words_removed_before_windowing():
    edges = CorpusService.cooccurrence_edges(["a rare b\n", "a b\n"], window=2, min_count=2)
    assert weights(edges) == {("a", "b"): 2.0, ("b", "a"): 2.0}


def test_repeated_word_self_pair_counted_once():
    assert weights(CorpusService.cooccurrence_edges(["a a\n"], window=2, min_count=1)) == {("a", "a"): 1.0}


def test_window_too_small():
    with pytest.raises(UsageError):
        CorpusService.cooccurrence_edges(["a b\n"], window=1)


def test_directed_keeps_reading_order():
    edges = CorpusService.cooccurrence_edges(["a b c\n", "c a\n"], window=2, min_count=1, directed=True)
    assert weights(edges) == {("a", "b"): 1.0, ("b", "c"): 1.0, ("c", "a"): 1.0}
