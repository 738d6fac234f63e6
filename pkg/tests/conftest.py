import pytest

from app.config import get_settings
from app.services.graph_service import Edge, build_graph
from tests.helpers import CHAIN, TEN_VERTEX, clique_text, graph_from


@pytest.fixture(autouse=True)
def settings_env(monkeypatch):
    monkeypatch.setenv("RECORD_RUNS", "false")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def chain_graph():
    return graph_from(CHAIN)


@pytest.fixture
def triangle_graph():
    return graph_from(clique_text("xyz"), undirected=True)


@pytest.fixture
def star_graph():
    return graph_from("".join(f"hub leaf{i} 1\n" for i in range(5)), undirected=True)


@pytest.fixture
def two_cliques_graph():
    text = clique_text(["a1", "a2", "a3", "a4"]) + clique_text(["b1", "b2", "b3", "b4"])
    return graph_from(text, undirected=True)


@pytest.fixture
def weighted_graph():
    """Ten vertices, each with out-edges, strongly connected."""
    return graph_from(TEN_VERTEX)


@pytest.fixture
def mixed_type_graph():
    return build_graph([
        Edge("u1", "i1", 1.0, 0, 1),
        Edge("u1", "i2", 1.0, 0, 1),
        Edge("u1", "u2", 5.0, 0, 0),
        Edge("u2", "i2", 2.0, 0, 1),
    ])


@pytest.fixture
def write_file(tmp_path):
    def _write(name: str, content: str):
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path
    return _write
