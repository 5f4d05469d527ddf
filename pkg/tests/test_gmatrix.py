import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from googlematrix.digraph import DirectedGraph
from googlematrix.gmatrix import (
    DENSE_CAP_ENV,
    DenseCapError,
    GoogleOperator,
    apply_g,
    build_s,
    dense_cap,
    materialize_dense,
    write_dense_csv,
)

from conftest import graphs, random_graph


def test_build_s_examples(cycle3):
    s = build_s(DirectedGraph.from_edges(2, [(0, 1)]))
    np.testing.assert_array_equal(s.columns.toarray(), [[0, 0], [1, 0]])
    assert list(s.dangling) == [1]
    np.testing.assert_array_equal(build_s(cycle3).columns.toarray(), [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    fan = build_s(DirectedGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)]))
    np.testing.assert_allclose(fan.columns.toarray()[:, 0], [0, 1 / 3, 1 / 3, 1 / 3])


@given(graphs())
def test_s_invariants(g):
    s = build_s(g)
    sums = np.asarray(s.columns.sum(axis=0)).ravel()
    ok = np.ones(g.n_nodes, dtype=bool)
    ok[s.dangling] = False
    np.testing.assert_allclose(sums[ok], 1.0, atol=1e-12)
    assert np.all(sums[s.dangling] == 0)
    assert np.all(s.columns.data > 0)


def test_dense_two_node_hand_values():
    g = materialize_dense(GoogleOperator.from_graph(DirectedGraph.from_edges(2, [(0, 1)]), 0.85))
    np.testing.assert_allclose(g[:, 0], [0.075, 0.925], atol=1e-15)
    np.testing.assert_allclose(g[:, 1], [0.5, 0.5], atol=1e-15)


def test_alpha_limit_approaches_s():
    graph = random_graph(10, 0.2, 4)
    s = build_s(graph)
    ref = s.columns.toarray()
    ref[:, s.dangling] = 1.0 / 10
    g = materialize_dense(GoogleOperator(s, 1 - 1e-12))
    np.testing.assert_allclose(g, ref, atol=1e-11)


@settings(max_examples=40)
@given(graphs(max_nodes=20), st.floats(0.05, 0.99))
def test_dense_stochastic_and_positive(g, alpha):
    dense = materialize_dense(GoogleOperator.from_graph(g, alpha))
    np.testing.assert_allclose(dense.sum(axis=0), 1.0, atol=1e-12)
    assert dense.min() >= (1 - alpha) / g.n_nodes - 1e-15


def test_apply_g_examples():
    n = 6
    full = DirectedGraph.from_edges(n, [(i, j) for i in range(n) for j in range(n) if i != j])
    op = GoogleOperator.from_graph(full)
    np.testing.assert_array_equal(apply_g(op, np.zeros(n)), np.zeros(n))
    np.testing.assert_allclose(apply_g(op, np.full(n, 1 / n)), 1 / n, atol=1e-16)


@pytest.mark.parametrize("n,seed", [(8, 0), (64, 1), (512, 2)])
def test_sparse_dense_agreement(n, seed):
    op = GoogleOperator.from_graph(random_graph(n, 4.0 / n, seed))
    dense = materialize_dense(op)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        v = rng.standard_normal(n)
        assert np.max(np.abs(apply_g(op, v) - dense @ v)) <= 1e-12 * np.abs(v).sum()
    block = rng.random((n, 3))
    np.testing.assert_allclose(apply_g(op, block), dense @ block, atol=1e-12)


@given(graphs(max_nodes=30), st.integers(0, 1000))
def test_apply_g_mass_and_linearity(g, seed):
    op = GoogleOperator.from_graph(g)
    rng = np.random.default_rng(seed)
    v, w = rng.standard_normal((2, g.n_nodes))
    a, b = rng.standard_normal(2)
    gv = apply_g(op, v)
    assert abs(gv.sum() - v.sum()) <= 1e-12 * np.abs(v).sum() + 1e-15
    np.testing.assert_allclose(apply_g(op, a * v + b * w), a * gv + b * apply_g(op, w), atol=1e-12)


def test_operator_validation():
    s = build_s(random_graph(4, 0.5, 0))
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            GoogleOperator(s, bad)
    with pytest.raises(ValueError):
        apply_g(GoogleOperator(s), np.ones(5))


def test_dense_cap_env(monkeypatch):
    monkeypatch.delenv(DENSE_CAP_ENV, raising=False)
    assert dense_cap() == 2 ** 13
    monkeypatch.setenv(DENSE_CAP_ENV, "16")
    assert dense_cap() == 16
    op = GoogleOperator.from_graph(random_graph(20, 0.2, 1))
    with pytest.raises(DenseCapError, match="dense cap"):
        materialize_dense(op)
    monkeypatch.setenv(DENSE_CAP_ENV, "lots")
    with pytest.raises(DenseCapError):
        dense_cap()


def test_write_dense_csv_round_trip():
    g = materialize_dense(GoogleOperator.from_graph(random_graph(5, 0.4, 3)))
    buf = io.StringIO()
    write_dense_csv(g, buf)
    text = buf.getvalue()
    assert "\r" not in text and text.count("\n") == 5
    back = np.array([[float(x) for x in line.split(",")] for line in text.splitlines()])
    np.testing.assert_array_equal(back, g)
