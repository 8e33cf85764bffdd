import math

import numpy as np
import pytest
from scipy.optimize import minimize

from conftest import conformal_angle, mp_distance, polygon, random_disk_points
from hypersteiner.fermat import (
    ALPHA,
    IsopticParams,
    admits_fermat,
    best_fst4,
    convex_pairings,
    fermat_point,
    fst3,
    fst4,
    isoptic_eval,
)
from hypersteiner.klein import DegenerateEdgeError, distance


def oracle_min_sum(tri, start):
    f = lambda s: sum(mp_distance(s, p) for p in tri) if np.hypot(*s) < 1 else 1e9
    return minimize(f, start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 5000}).x


def test_equilateral_fermat_point_is_origin():
    tri = polygon(3, 0.3)
    np.testing.assert_allclose(fermat_point(*tri), (0, 0), atol=1e-12)
    params = IsopticParams(tuple(tri[0]), tuple(tri[1]))
    assert abs(isoptic_eval(params, (0.0, 0.0))) < 1e-9


def test_isoptic_on_chord_is_nonzero():
    params = IsopticParams((-0.3, 0.0), (0.4, 0.0))
    val = isoptic_eval(params, (0.1, 0.0))
    # the subtended angle is pi, so cos(angle) - cos(alpha) < 0
    assert val < 0
    with pytest.raises(DegenerateEdgeError):
        isoptic_eval(params, (-0.3, 0.0))


def test_isoptic_sign_tracks_angle(rng):
    x, y = (-0.2, 0.1), (0.3, -0.1)
    params = IsopticParams(x, y)
    for s in random_disk_points(rng, 50, rmax=0.9):
        ang = conformal_angle(s, x, y)
        val = isoptic_eval(params, s)
        if abs(ang - ALPHA) > 1e-6:
            assert np.sign(val) == np.sign(math.cos(ang) - math.cos(ALPHA))


def test_obtuse_triangle_has_no_fermat_point():
    a = math.radians(130)
    tri = [(0.0, 0.0), (0.01, 0.0), (0.01 * math.cos(a), 0.01 * math.sin(a))]
    assert not admits_fermat(*tri)
    assert fermat_point(*tri) is None
    assert fst3(*tri) is None


def test_tiny_triangle_matches_euclidean_torricelli():
    tri = 1e-4 * np.array([[0.0, 0.0], [0.8, 0.0], [0.0, 0.6]])
    # Euclidean Torricelli point by direct minimization
    euclid = minimize(lambda s: sum(np.hypot(*(s - p)) for p in tri), tri.mean(axis=0),
                      method="Nelder-Mead", options={"xatol": 1e-14, "fatol": 1e-18}).x
    np.testing.assert_allclose(fermat_point(*tri), euclid, atol=1e-6)


def test_fermat_point_minimizes_distance_sum(rng):
    checked = 0
    for tri in random_disk_points(rng, 60, rmax=0.9).reshape(-1, 3, 2):
        s = fermat_point(*tri)
        if s is None:
            continue
        ref = oracle_min_sum(tri, tri.mean(axis=0))
        assert sum(distance(tri, s)) <= sum(mp_distance(ref, p) for p in tri) + 1e-9
        angles = [conformal_angle(s, tri[i], tri[(i + 1) % 3]) for i in range(3)]
        np.testing.assert_allclose(angles, ALPHA, atol=1e-7)
        checked += 1
    assert checked >= 5


def test_fermat_point_with_init_agrees(rng):
    tri = np.array([[0.5, 0.1], [-0.2, 0.4], [-0.1, -0.5]])
    a = fermat_point(*tri)
    b = fermat_point(*tri, init=(0.05, 0.0))
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_near_boundary_triangle():
    t = 1 - 1e-10
    tri = polygon(3, t, phase=0.3) + 0.0
    s = fermat_point(*tri)
    assert s is not None
    np.testing.assert_allclose(s, (0, 0), atol=1e-8)


def test_fst3_star():
    tri = polygon(3, 0.3)
    f = fst3(*tri)
    assert f.length == pytest.approx(3 * math.atanh(0.3), rel=1e-12)
    assert f.edges == [(0, 3), (1, 3), (2, 3)]


def test_fst4_tiny_square_matches_euclidean_smt():
    side = 2e-4
    sq = side / 2 * np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)
    f = fst4(*sq, topology=((0, 1), (2, 3)))
    assert f is not None
    assert f.length == pytest.approx((1 + math.sqrt(3)) * side, rel=1e-6)


def test_fst4_mirror_symmetry():
    pts = np.array([[-0.4, 0.2], [-0.4, -0.2], [0.4, 0.25], [0.4, -0.25]])
    f = fst4(*pts, topology=((0, 1), (2, 3)))
    assert f is not None
    np.testing.assert_allclose(f.steiner[:, 1], 0.0, atol=1e-9)
    # every Steiner point sees its three neighbours at 120 degrees
    allp = f.points
    for k in (4, 5):
        nbrs = [b if a == k else a for a, b in f.edges if k in (a, b)]
        for i in range(3):
            ang = conformal_angle(allp[k], allp[nbrs[i]], allp[nbrs[(i + 1) % 3]])
            assert ang == pytest.approx(ALPHA, abs=1e-6)


def test_fst4_is_local_minimum():
    pts = np.array([[-0.4, 0.2], [-0.4, -0.2], [0.4, 0.25], [0.4, -0.25]])
    f = fst4(*pts, topology=((0, 1), (2, 3)))

    def length(flat):
        s1, s2 = flat[:2], flat[2:]
        return (mp_distance(pts[0], s1) + mp_distance(pts[1], s1) + mp_distance(pts[2], s2)
                + mp_distance(pts[3], s2) + mp_distance(s1, s2))

    ref = minimize(length, np.zeros(4), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000}).fun
    assert f.length == pytest.approx(ref, abs=1e-9)


def test_fst4_wrong_topology_is_rejected():
    # pairing opposite corners forces crossing edges; no valid full tree exists
    sq = 0.3 * np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float) / math.sqrt(2)
    assert fst4(*sq, topology=((0, 2), (1, 3))) is None


def test_best_fst4_and_pairings():
    sq = polygon(4, 0.5)
    pairs = convex_pairings(sq)
    assert len(pairs) == 2
    for a, b in pairs:
        # pairs are adjacent corners in angular order
        assert abs(a[0] - a[1]) in (1, 3) and abs(b[0] - b[1]) in (1, 3)
    f = best_fst4(sq)
    assert f is not None
    mst_len = 3 * distance(sq[0], sq[1])
    assert f.length < mst_len
