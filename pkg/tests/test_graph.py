from __future__ import annotations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bgsl.graph import (DegreeOperator, DimensionError, EdgeVector, InvalidIndexError,
                        count_components, devectorize, edge_index, edge_pair, graph_stats,
                        laplacian, laplacian_pinv, num_nodes, vectorize)


def random_weights(rng, n, p=0.5):
    k = n * (n - 1) // 2
    return rng.random(k) * (rng.random(k) < p)


def test_edge_index_examples():
    assert edge_index(0, 1, 3) == 0
    assert edge_index(1, 2, 3) == 2


def test_edge_index_round_trip():
    n = 6
    seen = []
    for i in range(n):
        for j in range(i + 1, n):
            k = edge_index(i, j, n)
            assert edge_pair(k, n) == (i, j)
            seen.append(k)
    assert seen == list(range(n * (n - 1) // 2))


@pytest.mark.parametrize("i,j", [(1, 1), (2, 1), (-1, 2), (0, 3)])
def test_edge_index_rejects_bad_pairs(i, j):
    with pytest.raises(InvalidIndexError):
        edge_index(i, j, 3)


def test_num_nodes_rejects_non_triangular():
    with pytest.raises(DimensionError):
        num_nodes(4)


@given(st.integers(2, 25), st.integers(0, 2**31 - 1))
def test_vectorize_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.random(n * (n - 1) // 2)
    A = devectorize(a, n)
    assert np.array_equal(A, A.T)
    assert np.all(np.diag(A) == 0)
    assert np.array_equal(vectorize(A), a)
    assert np.array_equal(EdgeVector.from_matrix(A).values, a)


def test_degree_operator_examples():
    S = DegreeOperator(3)
    assert np.array_equal(S.apply([1.0, 2.0, 3.0]), [3.0, 4.0, 5.0])
    assert np.array_equal(S.apply(np.zeros(3)), np.zeros(3))
    S5 = DegreeOperator(5)
    assert np.array_equal(S5.apply(np.ones(10)), 4 * np.ones(5))
    assert np.array_equal(S.adjoint([1.0, 2.0, 3.0]), [3.0, 4.0, 5.0])
    assert np.array_equal(S.adjoint(2.5 * np.ones(3)), 5.0 * np.ones(3))


def test_degree_operator_dimension_errors():
    S = DegreeOperator(4)
    with pytest.raises(DimensionError):
        S.apply(np.ones(5))
    with pytest.raises(DimensionError):
        S.adjoint(np.ones(3))


def test_degree_operator_matches_dense():
    S = DegreeOperator(7)
    rng = np.random.default_rng(0)
    a = rng.random(21)
    assert np.allclose(S.dense() @ a, S.apply(a), rtol=0, atol=1e-14)
    lam = rng.random(7)
    assert np.allclose(S.dense().T @ lam, S.adjoint(lam), rtol=0, atol=1e-14)


@settings(max_examples=50)
@given(st.integers(2, 200), st.integers(0, 2**31 - 1))
def test_adjoint_identity(n, seed):
    rng = np.random.default_rng(seed)
    S = DegreeOperator(n)
    a = rng.standard_normal(n * (n - 1) // 2)
    lam = rng.standard_normal(n)
    lhs = S.apply(a) @ lam
    rhs = a @ S.adjoint(lam)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, np.abs(S.apply(a)).sum() * np.abs(lam).max())


def test_pinv_two_node_path():
    Lp = laplacian_pinv(np.array([1.0]))
    assert np.allclose(Lp, [[0.25, -0.25], [-0.25, 0.25]], atol=1e-14)


def test_pinv_empty_graph_is_zero():
    assert np.array_equal(laplacian_pinv(np.zeros(6)), np.zeros((4, 4)))


@settings(max_examples=30)
@given(st.integers(2, 50), st.integers(0, 2**31 - 1))
def test_pinv_penrose_identities(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.random(n * (n - 1) // 2) + 0.05  # complete, hence connected
    L = laplacian(a)
    Lp = laplacian_pinv(a)
    scale = np.linalg.norm(L) * np.linalg.norm(Lp)
    assert np.linalg.norm(L @ Lp @ L - L) <= 1e-8 * np.linalg.norm(L) * scale
    assert np.linalg.norm(Lp @ L @ Lp - Lp) <= 1e-8 * np.linalg.norm(Lp) * scale
    assert np.linalg.norm((L @ Lp) - (L @ Lp).T) <= 1e-8 * scale
    assert np.linalg.norm((Lp @ L) - (Lp @ L).T) <= 1e-8 * scale


def test_graph_stats_examples():
    st_full = graph_stats(np.ones(6))
    assert st_full.edge_density == 1.0 and st_full.n_components == 1
    st_empty = graph_stats(np.zeros(6))
    assert st_empty.edge_density == 0.0 and st_empty.n_components == 4
    two = np.zeros(6)
    two[edge_index(0, 1, 4)] = 1
    two[edge_index(2, 3, 4)] = 1
    st_two = graph_stats(two)
    assert st_two.edge_density == pytest.approx(2 / 6)
    assert st_two.n_components == 2


def test_graph_stats_threshold_and_quantiles():
    a = np.array([1e-6, 0.5, 2.0])
    s = graph_stats(a)
    assert s.edge_density == pytest.approx(2 / 3)
    assert s.weight_quantiles[0] == 0.5 and s.weight_quantiles[-1] == 2.0


@settings(max_examples=40)
@given(st.integers(2, 30), st.floats(0.0, 1.0), st.integers(0, 2**31 - 1))
def test_components_match_bfs(n, p, seed):
    rng = np.random.default_rng(seed)
    a = random_weights(rng, n, p)
    g = nx.from_numpy_array(devectorize(a, n) > 1e-5)
    assert count_components(a) == nx.number_connected_components(g)
