import itertools

import numpy as np

from app.services.graph_service import build_graph, parse_edge_list

CHAIN = "a b 1\nb c 1\n"

TEN_VERTEX = """\
v0 v1 1
v0 v2 3
v1 v2 2
v1 v3 1
v2 v3 4
v2 v0 1
v3 v4 2
v4 v5 1
v4 v0 5
v5 v6 3
v6 v7 1
v6 v2 2
v7 v8 2
v8 v9 1
v8 v3 3
v9 v0 2
v9 v5 1
"""


def parse(text: str, **options):
    return parse_edge_list(text.splitlines(keepends=True), **options)


def graph_from(text: str, **options):
    return build_graph(parse(text, **options))


def clique_text(names) -> str:
    return "".join(f"{a} {b} 1\n" for a, b in itertools.combinations(names, 2))


def transition_matrix(graph) -> np.ndarray:
    n = graph.vertex_count
    matrix = np.zeros((n, n))
    for source, target, weight in graph.iter_edges():
        matrix[source, target] += weight
    totals = matrix.sum(axis=1, keepdims=True)
    totals[totals == 0] = 1.0
    return matrix / totals


def frequencies(draws, size: int) -> np.ndarray:
    return np.bincount(np.asarray(draws, dtype=np.int64), minlength=size) / len(draws)


def l1(counts: dict, expected: dict) -> float:
    total = sum(counts.values())
    keys = set(counts) | set(expected)
    return sum(abs(counts.get(key, 0) / total - expected.get(key, 0.0)) for key in keys)


def mean_cosines(vectors: np.ndarray, groups) -> tuple:
    """Mean cosine of distinct same-group pairs and of cross-group pairs."""
    unit = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    similarity = unit @ unit.T
    within, across = [], []
    for i, j in itertools.combinations(range(len(vectors)), 2):
        (within if groups[i] == groups[j] else across).append(similarity[i, j])
    return float(np.mean(within)), float(np.mean(across))
