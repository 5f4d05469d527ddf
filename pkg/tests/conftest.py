import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from googlematrix.digraph import DirectedGraph

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_graph(n: int, density: float, seed: int) -> DirectedGraph:
    rng = np.random.default_rng(seed)
    a = rng.random((n, n)) < density
    np.fill_diagonal(a, False)
    s, t = np.nonzero(a)
    return DirectedGraph(n, s, t)


@st.composite
def graphs(draw, min_nodes=1, max_nodes=12):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])
    edges = draw(st.sets(pairs, max_size=n * (n - 1)))
    return DirectedGraph.from_edges(n, sorted(edges))


@pytest.fixture
def cycle3():
    return DirectedGraph.from_edges(3, [(0, 1), (1, 2), (2, 0)])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
