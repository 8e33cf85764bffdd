import math

import numpy as np
import pytest

from conftest import polygon, random_disk_points
from hypersteiner.fermat import best_fst4, fermat_point, fst3
from hypersteiner.heuristics import (
    RhsConfig,
    contract_edge,
    expand_angle,
    hypersteiner,
    randomized_hypersteiner,
    reduce_degree,
    spanning_tree,
)
from hypersteiner.klein import angle_at, barycenter, distance
from hypersteiner.tree import Tree
from hypersteiner.triangulation import mst

FAST = RhsConfig(max_iterations=2)


def assert_valid(res, terminals):
    tree = res.tree
    assert tree.is_spanning_tree()
    np.testing.assert_array_equal(tree.terminals, terminals)
    assert res.length == pytest.approx(tree.length, rel=1e-12)
    assert res.mst_length == pytest.approx(mst(terminals).total, rel=1e-12)
    assert res.length / res.mst_length >= 0.5 - 1e-9
    deg = tree.degrees()
    assert np.all(deg[tree.n_terminals:] >= 3)


def test_reduce_degree_without_steiner_is_mst(rng):
    pts = random_disk_points(rng, 8)
    tree = reduce_degree(pts, np.empty((0, 2)))
    assert len(tree.steiner) == 0
    assert tree.length == pytest.approx(mst(pts).total)


def test_reduce_degree_removes_edge_midpoint():
    pts = np.array([[-0.3, 0.0], [0.3, 0.0], [0.0, 0.6]])
    mid = barycenter(pts[0], pts[1])
    tree = reduce_degree(pts, mid[None])
    # a Steiner point of degree 2 is dropped, or replaced by the Fermat point if it picked up a third edge
    assert tree.is_spanning_tree()
    assert tree.length <= mst(pts).total + 1e-12


def test_reduce_degree_moves_to_fermat_point():
    tri = np.array([[0.5, 0.1], [-0.2, 0.4], [-0.1, -0.5]])
    s = fermat_point(*tri)
    start = s + np.array([0.01, -0.005])
    tree = reduce_degree(tri, start[None])
    assert len(tree.steiner) == 1
    np.testing.assert_allclose(tree.steiner[0], s, atol=1e-10)
    assert tree.length < Tree(tri, start[None], [(0, 3), (1, 3), (2, 3)]).length


def test_reduce_degree_outputs_degree_three(rng):
    pts = random_disk_points(rng, 12)
    steiner = random_disk_points(rng, 10)
    tree = reduce_degree(pts, steiner)
    assert tree.is_spanning_tree()
    assert np.all(tree.degrees()[12:] == 3)


def test_expand_angle_inserts_steiner_point():
    r = 0.05
    a = math.radians(60)
    pts = np.array([[r, 0.0], [0.0, 0.0], [r * math.cos(a), r * math.sin(a)]])
    path = Tree(pts, np.empty((0, 2)), [(0, 1), (1, 2)])
    out = expand_angle(path)
    assert len(out.steiner) == 1
    assert out.length < path.length - 1e-6


def test_expand_angle_keeps_wide_angles():
    tri = polygon(3, 0.3)
    pts = np.vstack([tri, [[0.0, 0.0]]])
    star_tree = Tree(pts, np.empty((0, 2)), [(0, 3), (1, 3), (2, 3)])
    out = expand_angle(star_tree)
    assert len(out.steiner) == 0
    assert out.length == pytest.approx(star_tree.length)


def test_contract_edge_merges_vertices():
    terms = np.array([[-0.4, 0.2], [-0.4, -0.2], [0.4, 0.25], [0.4, -0.25]])
    tree = Tree(terms, [[0.0, 0.0], [0.0, 1e-13]], [(0, 4), (1, 4), (2, 5), (3, 5), (4, 5)])
    out = contract_edge(tree, 4, 5)
    assert len(out.steiner) == 1
    assert out.is_spanning_tree()


def test_spanning_tree_drops_duplicate_steiner():
    pts = np.array([[-0.3, 0.0], [0.3, 0.0], [0.0, 0.6]])
    tree = spanning_tree(pts, np.array([[0.0, 0.1], [0.0, 0.1], [0.3, 0.0]]))
    assert len(tree.steiner) == 1
    assert tree.is_spanning_tree()


def test_hs_two_points():
    pts = np.array([[0.1, 0.2], [-0.3, 0.1]])
    res = hypersteiner(pts)
    assert res.red_percent == 0.0
    assert res.tree.edges.tolist() == [[0, 1]]


def test_hs_three_points_is_fst3():
    tri = np.array([[0.5, 0.1], [-0.2, 0.4], [-0.1, -0.5]])
    res = hypersteiner(tri)
    assert res.length == pytest.approx(fst3(*tri).length, rel=1e-12)
    assert_valid(res, tri)


def test_hs_square_uses_fst4():
    sq = polygon(4, 0.6)
    res = hypersteiner(sq)
    assert res.length == pytest.approx(best_fst4(sq).length, rel=1e-9)


def test_hs_invariants(rng):
    for n in (5, 12, 30):
        pts = random_disk_points(rng, n)
        res = hypersteiner(pts)
        assert_valid(res, pts)
        assert res.red_percent >= -1e-9


def test_rhs_two_points():
    pts = np.array([[0.1, 0.2], [-0.3, 0.1]])
    res = randomized_hypersteiner(pts, FAST)
    assert res.red_percent == 0.0
    assert len(res.tree.edges) == 1


def test_rhs_equilateral_triangle():
    tri = polygon(3, 0.5)
    res = randomized_hypersteiner(tri, RhsConfig(seed=1))
    assert res.length == pytest.approx(fst3(*tri).length, rel=1e-6)


def test_rhs_square_reaches_fst4():
    sq = polygon(4, 0.6)
    res = randomized_hypersteiner(sq, RhsConfig(seed=0))
    assert res.length == pytest.approx(best_fst4(sq).length, rel=1e-5)


def test_rhs_invariants_and_determinism(rng):
    pts = random_disk_points(rng, 15)
    a = randomized_hypersteiner(pts, RhsConfig(seed=3, max_iterations=2))
    b = randomized_hypersteiner(pts.copy(), RhsConfig(seed=3, max_iterations=2))
    assert_valid(a, pts)
    assert a.red_percent >= -1e-9
    assert np.array_equal(a.tree.edges, b.tree.edges)
    assert np.array_equal(a.tree.steiner, b.tree.steiner)
    assert a.length == b.length


def test_rhs_steiner_angles_are_near_120(rng):
    pts = random_disk_points(rng, 10, rmax=0.7)
    res = randomized_hypersteiner(pts, RhsConfig(seed=0, max_iterations=2))
    tree = res.tree
    adj = tree.adjacency()
    allp = tree.points
    for k in range(tree.n_terminals, tree.n_vertices):
        nb = adj[k]
        for i in range(3):
            assert angle_at(allp[k], allp[nb[i]], allp[nb[(i + 1) % 3]]) > math.radians(110)


def test_terminal_validation():
    with pytest.raises(ValueError):
        hypersteiner(np.array([[0.1, 0.1]]))
    with pytest.raises(ValueError):
        randomized_hypersteiner(np.array([[0.1, 0.1], [0.1, 0.1], [0.3, 0.0]]))
    with pytest.raises(ValueError):
        RhsConfig(insertion_range=(0.7, 0.2))
    with pytest.raises(ValueError):
        RhsConfig(max_iterations=0)


def test_rhs_config_iterations():
    assert RhsConfig().iterations_for(50) == 7
    assert RhsConfig(max_iterations=3).iterations_for(50) == 3
