import math

import numpy as np
import pytest

from gsstv.core import GuideImage
from gsstv.graph import GraphParams, SpatialGraph, build_graph, incidence_pattern, laplacian
from gsstv.linops import operator_norm_sq_estimate, weighted_graph_diff

import oracles


def guide(arr2d):
    arr2d = np.asarray(arr2d, dtype=float)
    return GuideImage(*arr2d.shape, arr2d.ravel(order="F"))


def test_params_validation():
    with pytest.raises(ValueError):
        GraphParams(0.0, 0.1)
    with pytest.raises(ValueError):
        GraphParams(1.0, -0.1)
    assert GraphParams() == GraphParams(2.0, 0.1)


@pytest.mark.parametrize("n1, n2", [(1, 1), (1, 5), (2, 2), (3, 3), (4, 7), (6, 2)])
def test_edge_count(n1, n2):
    g = build_graph(guide(np.zeros((n1, n2))))
    expected = (n1 - 1) * n2 + n1 * (n2 - 1) + 2 * (n1 - 1) * (n2 - 1)
    assert g.num_edges == expected


def test_two_by_two_has_six_edges():
    g = build_graph(guide(np.zeros((2, 2))))
    assert g.num_edges == 6
    dists = [d for _, _, d in oracles.brute_edges(2, 2)]
    assert sorted(dists).count(1.0) == 4 and sum(math.isclose(d, math.sqrt(2)) for d in dists) == 2


@pytest.mark.parametrize("n1, n2", [(3, 3), (4, 5), (5, 2)])
def test_edges_and_weights_match_brute_force(n1, n2):
    rng = np.random.default_rng(n1 * 10 + n2)
    img = rng.random((n1, n2))
    params = GraphParams(1.3, 0.2)
    g = build_graph(guide(img), params)
    brute = oracles.brute_edges(n1, n2)
    assert g.edges == [(p, q) for p, q, _ in brute]
    np.testing.assert_allclose(g.weights, oracles.brute_weights(img, 1.3, 0.2), rtol=1e-14)


def test_edge_invariants():
    g = build_graph(guide(np.random.default_rng(0).random((5, 4))))
    assert np.all(g.heads < g.tails)
    assert len(set(g.edges)) == g.num_edges
    assert np.all((g.weights > 0) & (g.weights <= 1))
    for p, q in g.edges:
        (jp, ip), (jq, iq) = divmod(p, 5), divmod(q, 5)
        assert max(abs(ip - iq), abs(jp - jq)) == 1


def test_weight_examples():
    # horizontal neighbours, equal values, sigma_l = 1
    g = build_graph(guide([[0.4, 0.4]]), GraphParams(1.0, 0.1))
    assert g.weights[0] == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert g.weights[0] == pytest.approx(0.367879, abs=1e-6)
    # diagonal neighbours on a 2x2 grid of equal values
    g = build_graph(guide(np.full((2, 2), 0.4)), GraphParams(1.0, 0.1))
    diag = [w for (p, q), w in zip(g.edges, g.weights) if {p, q} in ({0, 3}, {1, 2})]
    assert diag == pytest.approx([0.243117] * 2, abs=1e-6)
    # adjacent pixels with |x_p - x_q| = 0.5
    g = build_graph(guide([[0.25, 0.75]]), GraphParams(1.0, 0.1))
    assert g.weights[0] == pytest.approx(math.exp(-1) * math.exp(-5), rel=1e-12)
    assert g.weights[0] == pytest.approx(0.002479, abs=1e-6)


def test_weight_symmetry_under_transpose():
    img = np.random.default_rng(5).random((4, 6))
    a = build_graph(guide(img)).weights
    b = build_graph(guide(img.T)).weights
    np.testing.assert_allclose(np.sort(a), np.sort(b), rtol=1e-15)


def test_weight_monotonicity():
    def w(delta, sx):
        return build_graph(guide([[0.0, delta]]), GraphParams(2.0, sx)).weights[0]

    assert w(0.1, 0.1) > w(0.2, 0.1) > w(0.4, 0.1)
    assert w(0.3, 0.05) < w(0.3, 0.1) < w(0.3, 1.0)


def test_invalid_graph_rejected():
    with pytest.raises(ValueError):
        SpatialGraph(2, 1, [1], [0], [0.5])
    with pytest.raises(ValueError):
        SpatialGraph(2, 1, [0], [1], [0.0])
    with pytest.raises(ValueError):
        SpatialGraph(2, 1, [0], [2], [0.5])


def test_incidence_single_edge():
    g = build_graph(guide([[0.0, 0.0]]))
    d = incidence_pattern(g).toarray()
    np.testing.assert_array_equal(d @ np.array([2.0, 7.0]), [5.0])


def test_incidence_two_nonzeros_per_row_and_constants_in_null_space():
    g = build_graph(guide(np.random.default_rng(1).random((4, 3))))
    d = incidence_pattern(g).toarray()
    assert np.all((d != 0).sum(axis=1) == 2)
    np.testing.assert_array_equal(d.sum(axis=1), 0)
    np.testing.assert_array_equal(d @ np.full(12, 3.3), 0)


def test_incidence_two_by_two_step_image():
    # column-major [0, 0, 1, 1]: column 0 is all 0, column 1 is all 1
    g = build_graph(guide([[0.0, 1.0], [0.0, 1.0]]))
    d = incidence_pattern(g).toarray()
    out = d @ np.array([0.0, 0.0, 1.0, 1.0])
    within_column = [e for e, (p, q) in enumerate(g.edges) if p // 2 == q // 2]
    assert len(within_column) == 2
    for e, val in enumerate(out):
        assert abs(val) == (0.0 if e in within_column else 1.0)


def test_laplacian_matches_explicit_construction():
    g = build_graph(guide(np.random.default_rng(2).random((3, 3))))
    lap = laplacian(g).toarray()
    explicit = np.zeros((9, 9))
    for p, q, _ in oracles.brute_edges(3, 3):
        explicit[p, q] = explicit[q, p] = -1
    np.fill_diagonal(explicit, -explicit.sum(axis=1))
    np.testing.assert_array_equal(lap, explicit)
    np.testing.assert_array_equal(lap.sum(axis=1), 0)


@pytest.mark.parametrize("n1, n2", [(3, 3), (6, 6), (8, 5)])
def test_incidence_norm_bound(n1, n2):
    g = build_graph(guide(np.zeros((n1, n2))))
    lam = np.linalg.eigvalsh(laplacian(g).toarray()).max()
    assert lam <= 16.0
    # with equal guide values every weight is exp(-d/sigma_l) <= 1
    est = operator_norm_sq_estimate(weighted_graph_diff(g), safety=1.0)
    assert est <= 16.0
