import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import conformal_angle, mp_distance, random_disk_points
from hypersteiner.klein import (
    DegenerateEdgeError,
    GaussianSpec,
    angle_at,
    barycenter,
    check_points,
    distance,
    exp_map,
    gamma,
    klein_to_poincare,
    log_map,
    lorentzian_inner,
    metric_norm,
    pairwise_distances,
    poincare_to_klein,
    retract,
    sample_wrapped_gaussian,
    triangle_barycenters,
)

coord = st.floats(-0.7, 0.7, allow_nan=False)
point = st.tuples(coord, coord)


def test_lorentzian_inner_values():
    assert lorentzian_inner((0, 0), (0, 0)) == pytest.approx(-1.0)
    assert lorentzian_inner((0.5, 0), (0.5, 0)) == pytest.approx(-0.75)


def test_gamma_values():
    assert gamma(np.array([0.0, 0.0])) == pytest.approx(1.0)
    assert gamma(np.array([0.6, 0.0])) == pytest.approx(1.25)
    assert gamma(np.array([0.8, 0.0])) == pytest.approx(5 / 3)


def test_distance_basic():
    assert distance((0, 0), (0, 0)) == 0.0
    assert distance((0, 0), (0.5, 0)) == pytest.approx(math.atanh(0.5), rel=1e-14)


def test_distance_matches_high_precision(rng):
    pts = random_disk_points(rng, 200, rmax=1 - 1e-9)
    for p, q in zip(pts[:100], pts[100:]):
        assert distance(p, q) == pytest.approx(mp_distance(p, q), rel=1e-9, abs=1e-12)


def test_distance_tiny_separation_keeps_precision():
    p = np.array([0.3, -0.2])
    q = p + np.array([1e-9, 2e-9])
    assert distance(p, q) == pytest.approx(mp_distance(p, q), rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(point, point, point)
def test_distance_is_a_metric(p, q, r):
    dpq, dqr, dpr = distance(p, q), distance(q, r), distance(p, r)
    assert dpq == pytest.approx(distance(q, p), abs=1e-12)
    assert dpr <= dpq + dqr + 1e-9


def test_pairwise_distances_symmetric(rng):
    pts = random_disk_points(rng, 12)
    d = pairwise_distances(pts)
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    assert d[3, 7] == pytest.approx(mp_distance(pts[3], pts[7]), rel=1e-10)


def test_check_points_rejects_outside():
    with pytest.raises(ValueError):
        check_points([[1.0, 0.0]])
    with pytest.raises(ValueError):
        check_points([[np.nan, 0.0]])


def test_barycenter_cases():
    p = np.array([0.2, -0.4])
    np.testing.assert_allclose(barycenter(p, p, p), p, atol=1e-15)
    np.testing.assert_allclose(barycenter((0, 0), (0.3, 0), (-0.3, 0)), (0, 0), atol=1e-15)
    # independent closed form with gamma = (1.25, 1.25, 1)
    expected = (1.25 * np.array([0.6, 0]) + 1.25 * np.array([0, 0.6])) / 3.5
    np.testing.assert_allclose(barycenter((0.6, 0), (0, 0.6), (0, 0)), expected, atol=1e-15)


def test_two_point_barycenter_is_midpoint(rng):
    for p, q in zip(random_disk_points(rng, 20), random_disk_points(rng, 20)):
        m = barycenter(p, q)
        assert distance(p, m) == pytest.approx(distance(q, m), rel=1e-9)
        assert distance(p, m) + distance(m, q) == pytest.approx(distance(p, q), rel=1e-9)


def test_triangle_barycenters_matches_scalar(rng):
    pts = random_disk_points(rng, 6)
    tri = np.array([[0, 1, 2], [3, 4, 5]])
    out = triangle_barycenters(pts, tri)
    np.testing.assert_allclose(out[1], barycenter(*pts[3:6]), atol=1e-15)


def test_angle_at_examples():
    assert angle_at((0, 0), (0.3, 0), (0, 0.3)) == pytest.approx(math.pi / 2)
    assert angle_at((0, 0), (0.3, 0), (-0.3, 0)) == pytest.approx(math.pi)
    r = 1e-4
    tri = [(r * math.cos(a), r * math.sin(a)) for a in (0, 2 * math.pi / 3, 4 * math.pi / 3)]
    assert angle_at(tri[0], tri[1], tri[2]) == pytest.approx(math.pi / 3, abs=1e-6)
    with pytest.raises(DegenerateEdgeError):
        angle_at((0.1, 0.1), (0.1, 0.1), (0.2, 0))


def test_angle_at_matches_conformal_oracle(rng):
    pts = random_disk_points(rng, 300, rmax=0.99)
    for v, a, b in pts.reshape(-1, 3, 2):
        assert angle_at(v, a, b) == pytest.approx(conformal_angle(v, a, b), abs=1e-9)


def test_hyperbolic_triangle_angle_sum_below_pi(rng):
    for v, a, b in random_disk_points(rng, 60).reshape(-1, 3, 2):
        total = angle_at(v, a, b) + angle_at(a, b, v) + angle_at(b, v, a)
        assert total < math.pi


def test_exp_map_at_origin():
    v = np.array([0.6, -0.8]) * 1.7
    out = exp_map(np.zeros(2), v)
    np.testing.assert_allclose(out, math.tanh(1.7) * np.array([0.6, -0.8]), atol=1e-14)
    np.testing.assert_allclose(exp_map(np.array([0.3, 0.1]), np.zeros(2)), [0.3, 0.1])


def test_log_map_examples():
    np.testing.assert_allclose(log_map(np.array([0.2, 0.2]), np.array([0.2, 0.2])), 0.0)
    v = log_map(np.zeros(2), np.array([math.tanh(1.0), 0.0]))
    assert metric_norm(np.zeros(2), v) == pytest.approx(1.0)
    assert v[1] == 0.0 and v[0] > 0


def test_exp_log_roundtrip(rng):
    a = random_disk_points(rng, 50, rmax=0.9)
    b = random_disk_points(rng, 50, rmax=0.9)
    v = log_map(a, b)
    np.testing.assert_allclose(exp_map(a, v), b, atol=1e-10)
    np.testing.assert_allclose(metric_norm(a, v), [mp_distance(p, q) for p, q in zip(a, b)], rtol=1e-9)


def test_exp_map_follows_geodesic(rng):
    # points along exp_p(t v) are collinear in the Klein chart and at distance t |v|
    p = np.array([0.4, -0.3])
    v = np.array([0.2, 0.5])
    n = metric_norm(p, v)
    for t in (0.5, 1.0, 2.0):
        q = exp_map(p, t * v)
        assert distance(p, q) == pytest.approx(t * n, rel=1e-10)
        cross = (q - p)[0] * v[1] - (q - p)[1] * v[0]
        assert abs(cross) < 1e-12


def test_retract_first_order():
    p = np.array([0.2, 0.1])
    v = np.array([1e-6, -2e-6])
    np.testing.assert_allclose(retract(p, v), exp_map(p, v), atol=1e-11)
    out = retract(np.array([0.9, 0.0]), np.array([1.0, 0.0]))
    assert np.linalg.norm(out) < 1.0


def test_poincare_roundtrip(rng):
    pts = random_disk_points(rng, 40, rmax=0.999)
    np.testing.assert_allclose(poincare_to_klein(klein_to_poincare(pts)), pts, atol=1e-12)
    # the Poincare radius of a Klein point at radius r is tanh(artanh(r) / 2)
    r = 0.7
    assert klein_to_poincare(np.array([r, 0.0]))[0] == pytest.approx(math.tanh(math.atanh(r) / 2))


def test_wrapped_gaussian_deterministic_and_concentrated():
    spec = GaussianSpec((0.3, 0.2), 1e-9)
    a = sample_wrapped_gaussian(spec, np.random.default_rng(5), size=20)
    b = sample_wrapped_gaussian(spec, np.random.default_rng(5), size=20)
    assert np.array_equal(a, b)
    assert max(distance(p, (0.3, 0.2)) for p in a) < 1e-7


def test_wrapped_gaussian_distance_scale():
    # distances from the mean follow sigma * chi with 2 degrees of freedom
    spec = GaussianSpec((0.5, -0.5), 0.3)
    s = sample_wrapped_gaussian(spec, np.random.default_rng(0), size=4000)
    d = distance(s, np.array([0.5, -0.5]))
    assert np.mean(d * d) == pytest.approx(2 * 0.3**2, rel=0.08)


def test_wrapped_gaussian_near_boundary_stays_inside():
    mu = (1 - 1e-10, 0.0)
    s = sample_wrapped_gaussian(GaussianSpec(mu, 0.1), np.random.default_rng(1), size=200)
    assert np.all(np.hypot(s[:, 0], s[:, 1]) < 1.0)
