import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from googlematrix.digraph import AbParams, DirectedGraph, ab_generate
from googlematrix.gmatrix import GoogleOperator, apply_g, materialize_dense
from googlematrix.pagerank import (
    ConvergenceError,
    PageRankVector,
    cumulative_pagerank,
    fit_beta,
    fit_cumulative_slope,
    power_iterate,
    rank_order,
    write_pagerank_csv,
)

from conftest import graphs, random_graph


def dense_pagerank(op):
    """Oracle: the lambda = 1 eigenvector of the dense matrix, L1-normalized."""
    w, v = np.linalg.eig(materialize_dense(op))
    k = int(np.argmin(np.abs(w - 1.0)))
    p = np.abs(v[:, k].real)
    return p / p.sum()


def test_complete_graph_uniform():
    n = 7
    g = DirectedGraph.from_edges(n, [(i, j) for i in range(n) for j in range(n) if i != j])
    pr = power_iterate(GoogleOperator.from_graph(g), seed=3)
    np.testing.assert_allclose(pr.p, 1 / n, atol=1e-12)


def test_chain_matches_dense_eigenvector():
    op = GoogleOperator.from_graph(DirectedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)]), 0.85)
    pr = power_iterate(op)
    assert np.abs(pr.p - dense_pagerank(op)).sum() < 1e-8


def test_rank_order_examples():
    assert list(rank_order(np.array([0.2, 0.5, 0.3]))) == [1, 2, 0]
    assert list(rank_order(np.full(5, 0.2))) == [0, 1, 2, 3, 4]


@given(st.lists(st.integers(1, 5), min_size=1, max_size=40))
def test_rank_order_nonincreasing(raw):
    p = np.array(raw, dtype=float)
    p /= p.sum()
    order = rank_order(p)
    assert np.all(np.diff(p[order]) <= 0)
    # ties keep ascending index
    for a, b in zip(order, order[1:]):
        if p[a] == p[b]:
            assert a < b


@settings(max_examples=40)
@given(graphs(max_nodes=40), st.integers(0, 2 ** 20))
def test_fixed_point_positivity_normalization(g, seed):
    op = GoogleOperator.from_graph(g)
    pr = power_iterate(op, seed=seed)
    assert np.abs(apply_g(op, pr.p) - pr.p).sum() <= 2e-12
    assert pr.p.min() >= 0.15 / g.n_nodes - 1e-15
    assert abs(pr.p.sum() - 1) <= 1e-12
    assert np.all(np.diff(pr.sorted()) <= 0)


def test_seed_independence():
    op = GoogleOperator.from_graph(random_graph(200, 0.02, 7))
    a = power_iterate(op, seed=1)
    b = power_iterate(op, seed=2)
    assert np.abs(a.p - b.p).sum() <= 10 * 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_residual_halving_rate(seed):
    op = GoogleOperator.from_graph(random_graph(150, 0.03, seed))
    pr = power_iterate(op, seed=seed)
    step = math.ceil(math.log(0.5) / math.log(0.85))
    res = pr.residuals
    for k in range(len(res) - step):
        if res[k + step] > 1e-14:
            assert res[k + step] <= 0.5 * res[k] * (1 + 1e-6)


def test_convergence_error_carries_iterate():
    op = GoogleOperator.from_graph(random_graph(50, 0.1, 0))
    with pytest.raises(ConvergenceError) as info:
        power_iterate(op, tol=1e-15, max_iter=3)
    assert info.value.last_iterate.shape == (50,)
    assert info.value.residual > 0


def test_fit_beta_synthetic():
    j = np.arange(1, 5001, dtype=float)
    p = j ** -0.9
    fit = fit_beta(p / p.sum())
    assert abs(fit.beta - 0.9) < 0.005
    assert abs(fit.nu - (1 + 1 / 0.9)) < 0.01
    assert fit.nu == 1 + 1 / fit.beta
    assert not fit.poor


def test_fit_beta_uniform_fails():
    with pytest.raises(ValueError):
        fit_beta(np.full(1000, 1e-3))


def test_fit_beta_window_too_small():
    with pytest.raises(ValueError):
        fit_beta(np.linspace(1, 0.1, 50))


def test_cumulative_examples():
    n = 8
    t = cumulative_pagerank(np.full(n, 1 / n), grid=[0.5 / n, 1 / n, 2 / n])
    assert list(t.count) == [n, n, 0]
    t = cumulative_pagerank(np.array([0.5, 0.3, 0.2]), grid=[0.25])
    assert list(t.count) == [2]
    buf = io.StringIO()
    t.to_csv(buf)
    assert buf.getvalue().splitlines()[0] == "p,P_c,P_c_over_N"


def test_cumulative_rejects_bad_grid():
    with pytest.raises(ValueError):
        cumulative_pagerank(np.array([0.5, 0.5]), grid=[0.3, 0.2])


def test_cumulative_slope_of_power_law():
    j = np.arange(1, 20001, dtype=float)
    p = j ** -1.0
    slope, _ = fit_cumulative_slope(cumulative_pagerank(p / p.sum(), points=200))
    # P_c(p_j) = j exactly, so the slope is -1/beta
    assert abs(slope + 1.0) < 0.02


def test_ab_pagerank_decays():
    g = ab_generate(AbParams(5, 0.2, 0.1, 4096, seed=5))
    fit = fit_beta(power_iterate(GoogleOperator.from_graph(g), seed=1))
    assert 0.5 < fit.beta < 1.1


def test_write_pagerank_csv():
    pr = PageRankVector(np.array([0.2, 0.5, 0.3]))
    buf = io.StringIO()
    write_pagerank_csv(pr, buf, labels=["a", "b", "c"])
    assert buf.getvalue() == "rank,node,p\n1,b,0.5\n2,c,0.3\n3,a,0.2\n"
