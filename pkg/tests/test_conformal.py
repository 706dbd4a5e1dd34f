import math

import numpy as np
import pytest

from honeycombs.conformal import (
    INFINITY, DegenerateArc, Disjoint, HypSphere, Plane, Sphere, ball_distance,
    ball_to_uhs, ball_to_uhs_points, dihedral, geodesic_arc, geodesic_circle,
    hyp_sphere_to_euclidean, invert_point, invert_sphere, mobius_to_origin,
    poincare_to_klein, uhs_to_ball, uhs_to_ball_points,
)

ORIGIN_UNIT = Sphere((0, 0, 0), 1.0)


def fit_sphere(pts):
    """Least squares sphere through points: |x|^2 = 2 c.x + (r^2 - |c|^2)."""
    A = np.hstack([2 * pts, np.ones((len(pts), 1))])
    b = np.sum(pts ** 2, axis=1)
    sol = np.linalg.lstsq(A, b, rcond=None)[0]
    c = sol[:3]
    return c, math.sqrt(sol[3] + c @ c)


def points_on(s, n, rng):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if isinstance(s, Sphere):
        return s.c + s.radius * v
    v -= np.outer(v @ s.n, s.n)
    return s.offset * s.n + 3 * v


def test_invert_point_examples():
    assert np.allclose(invert_point(ORIGIN_UNIT, (2, 0, 0)), (0.5, 0, 0))
    assert np.allclose(invert_point(Plane((0, 0, 1), 0), (1, 2, 3)), (1, 2, -3))
    assert np.allclose(invert_point(ORIGIN_UNIT, (1, 0, 0)), (1, 0, 0))
    assert invert_point(ORIGIN_UNIT, (0, 0, 0)) is INFINITY
    assert np.allclose(invert_point(ORIGIN_UNIT, INFINITY), (0, 0, 0))
    assert invert_point(Plane((0, 0, 1), 0), INFINITY) is INFINITY


def test_invert_sphere_plane_to_sphere():
    img = invert_sphere(ORIGIN_UNIT, Plane((0, 0, 1), 1.0))
    # oracle: invert four generic points of the plane and fit
    pts = np.array([[0.3, 0.1, 1], [-1, 2, 1], [4, -1, 1], [0.5, 0.5, 1]])
    c, r = fit_sphere(np.array([invert_point(ORIGIN_UNIT, p) for p in pts]))
    assert isinstance(img, Sphere)
    assert np.allclose(img.c, (0, 0, 0.5)) and np.allclose(c, (0, 0, 0.5))
    assert img.radius == pytest.approx(0.5) and r == pytest.approx(0.5)


def test_invert_sphere_mirror():
    img = invert_sphere(Plane((0, 0, 1), 0), Sphere((1, 1, 1), 0.5))
    assert np.allclose(img.c, (1, 1, -1)) and img.radius == 0.5


def test_sphere_through_center_becomes_plane_and_back():
    s = Sphere((0, 0, 1), 1.0)
    img = invert_sphere(ORIGIN_UNIT, s)
    assert isinstance(img, Plane)
    # the ball interior maps to the half space z > 0.5
    assert np.allclose(img.n, (0, 0, -1)) and img.offset == pytest.approx(-0.5)
    back = invert_sphere(ORIGIN_UNIT, img)
    assert isinstance(back, Sphere) and np.allclose(back.c, s.c) and back.inside_ball


def test_orientation_carried():
    # inside of the small sphere maps to the inside of its image
    s = Sphere((3, 0, 0), 1.0)
    img = invert_sphere(ORIGIN_UNIT, s)
    probe = invert_point(ORIGIN_UNIT, (3.2, 0.1, 0))
    assert img.signed_power(probe) < 0
    # sphere containing the inversion center: inside maps to the outside
    s = Sphere((0.2, 0, 0), 1.0)
    img = invert_sphere(ORIGIN_UNIT, s)
    assert not img.inside_ball


def random_mirror(rng):
    if rng.random() < 0.3:
        return Plane.from_normal(rng.normal(size=3), rng.normal())
    return Sphere(rng.normal(size=3), rng.uniform(0.2, 3.0), bool(rng.random() < 0.5))


def test_inversion_involution_and_incidence():
    rng = np.random.default_rng(1)
    for _ in range(300):
        m, s = random_mirror(rng), random_mirror(rng)
        x = rng.normal(size=3) * 2
        assert np.allclose(invert_point(m, invert_point(m, x)), x, atol=1e-12, rtol=0)
        twice = invert_sphere(m, invert_sphere(m, s))
        assert type(twice) is type(s)
        for p in points_on(s, 5, rng):
            if isinstance(m, Sphere) and np.linalg.norm(p - m.c) < 1e-3:
                continue
            assert abs(invert_sphere(m, s).signed_power(invert_point(m, p))) < 1e-8 * max(1, np.linalg.norm(invert_point(m, p))) ** 2
        assert abs(twice.signed_power(s.c if isinstance(s, Sphere) else s.offset * s.n)
                   - s.signed_power(s.c if isinstance(s, Sphere) else s.offset * s.n)) < 1e-8


def test_dihedral_examples():
    a = Plane((1, 0, 0), 0)
    b = Plane((0.5, math.sqrt(3) / 2, 0), 0)
    assert dihedral(a, b) == pytest.approx(math.pi / 3)
    assert dihedral(ORIGIN_UNIT, Sphere((math.sqrt(2), 0, 0), 1)) == pytest.approx(math.pi / 2)
    # oracle: angle between the circle tangent and the line at an intersection point
    x = np.array([math.sqrt(0.75), 0, 0.5])
    normal_sphere = x
    normal_plane = np.array([0, 0, 1.0])
    oracle = math.acos(normal_sphere @ normal_plane)
    assert dihedral(ORIGIN_UNIT, Plane((0, 0, 1), 0.5)) == pytest.approx(oracle) == pytest.approx(math.pi / 3)
    with pytest.raises(Disjoint):
        dihedral(ORIGIN_UNIT, Sphere((5, 0, 0), 1))


def test_dihedral_conformal():
    rng = np.random.default_rng(2)
    checked = 0
    while checked < 200:
        a, b, m = random_mirror(rng), random_mirror(rng), random_mirror(rng)
        try:
            ang = dihedral(a, b)
        except Disjoint:
            continue
        img = dihedral(invert_sphere(m, a), invert_sphere(m, b))
        assert img == pytest.approx(ang, abs=1e-8)
        checked += 1


def test_ball_uhs():
    assert np.allclose(ball_to_uhs((0, 0, 0)), (0, 0, 1))
    assert np.allclose(ball_to_uhs((0, 0, -1)), (0, 0, 0))
    assert ball_to_uhs((0, 0, 1)) is INFINITY
    rng = np.random.default_rng(3)
    v = rng.normal(size=(1000, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    pts = v * rng.uniform(0, 0.99, size=(1000, 1)) ** (1 / 3)
    uhs = ball_to_uhs_points(pts)
    assert (uhs[:, 2] > 0).all()
    assert np.allclose(uhs_to_ball_points(uhs), pts, atol=1e-12, rtol=0)
    bd = ball_to_uhs_points(v[v[:, 2] < 0.9])
    assert np.allclose(bd[:, 2], 0, atol=1e-12)
    assert np.allclose(uhs_to_ball((0.3, -0.2, 0.7)), uhs_to_ball_points(np.array([[0.3, -0.2, 0.7]]))[0])


def test_poincare_to_klein():
    assert np.allclose(poincare_to_klein((0, 0, 0)), 0)
    assert np.allclose(poincare_to_klein((0, 0.6, 0.8)), (0, 0.6, 0.8))
    assert np.allclose(poincare_to_klein((0.5, 0, 0)), (0.8, 0, 0))


def sample_sphere_distances(h, n, rng):
    ce, re = hyp_sphere_to_euclidean(h)
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return ball_distance(ce + re * v, np.array(h.center_h))


def test_hyp_sphere_to_euclidean():
    c, r = hyp_sphere_to_euclidean(HypSphere((0, 0, 0), 0.6))
    assert np.allclose(c, 0) and r == pytest.approx(math.tanh(0.3))
    h = HypSphere((0.5, 0, 0), 2 * math.atanh(0.2))
    c, r = hyp_sphere_to_euclidean(h)
    assert c[0] == pytest.approx(0.48485, abs=1e-5) and r == pytest.approx(0.15152, abs=1e-5)
    d = sample_sphere_distances(h, 100, np.random.default_rng(4))
    assert np.allclose(d, h.radius_h, atol=1e-9)
    radii = [hyp_sphere_to_euclidean(HypSphere((t, 0, 0), 1.0))[1] for t in (0.9, 0.99, 0.999, 0.9999)]
    assert all(a > b for a, b in zip(radii, radii[1:])) and radii[-1] < 1e-3
    for t in (0.2, 0.7, 0.95):
        assert np.linalg.norm(hyp_sphere_to_euclidean(HypSphere((0, t, 0), 0.4))[0]) < t


def test_mobius_to_origin():
    rng = np.random.default_rng(5)
    a = np.array([0.3, -0.4, 0.2])
    x = rng.uniform(-0.5, 0.5, size=(50, 3))
    y = mobius_to_origin(a, x)
    assert np.allclose(mobius_to_origin(a, a), 0)
    assert np.allclose(mobius_to_origin(-a, y), x)
    assert np.allclose(ball_distance(x[:-1], x[1:]), ball_distance(y[:-1], y[1:]))


def test_geodesic_arc():
    pts = geodesic_arc((-0.5, 0, 0), (0.5, 0, 0), 2)
    assert np.allclose(pts[1], 0)
    pts = geodesic_arc((0, 0, 0), (0.8, 0, 0), 1)
    assert len(pts) == 2 and np.allclose(pts, [[0, 0, 0], [0.8, 0, 0]])
    with pytest.raises(DegenerateArc):
        geodesic_arc((0.1, 0, 0), (0.1, 0, 0), 3)
    rng = np.random.default_rng(6)
    for _ in range(50):
        a, b = rng.uniform(-0.55, 0.55, size=(2, 3))
        pts = geodesic_arc(a, b, 7)
        c, rho = geodesic_circle(a, b)
        assert np.allclose(np.linalg.norm(pts - c, axis=1), rho, atol=1e-10)
        assert np.allclose(np.cross(a - c, b - c) @ (pts - c).T, 0, atol=1e-10)
        d = ball_distance(pts[:-1], pts[1:])
        assert np.allclose(d, d[0], atol=1e-9)
        k = poincare_to_klein(pts[[0, 3, 7]])
        assert np.linalg.norm(np.cross(k[1] - k[0], k[2] - k[0])) < 1e-10


def test_geodesic_arc_ideal_endpoints():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a, b = rng.normal(size=(2, 3))
        a /= np.linalg.norm(a)
        b = b / np.linalg.norm(b) * rng.choice([1.0, 0.6])
        pts = geodesic_arc(a, b, 9)
        c, rho = geodesic_circle(a, b)
        assert np.allclose(np.linalg.norm(pts - c, axis=1), rho, atol=1e-10)
        assert (np.linalg.norm(pts[1:-1], axis=1) < 1).all()
