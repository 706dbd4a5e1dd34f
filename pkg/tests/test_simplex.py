import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from honeycombs.conformal import Plane, Sphere, invert_point, normal_cosine
from honeycombs.schlafli import INF, Geometry, SchlafliSymbol, classify_3d
from honeycombs.simplex import (
    Simplex, UnsupportedGeometry, build_simplex, canonicalize, canonicalize_many,
    in_domain, interior_point, reflect_word, verify_angles,
)

TERMS = [3, 4, 5, 6, 7, INF]
HYPERBOLIC = [
    SchlafliSymbol(*t) for t in itertools.product(TERMS, repeat=3)
    if classify_3d(SchlafliSymbol(*t)) is Geometry.HYPERBOLIC
]


@pytest.mark.parametrize("s", HYPERBOLIC, ids=str)
def test_angle_residuals(s):
    sx = build_simplex(s)
    assert max(verify_angles(sx)) < 1e-9
    # vertical mirrors: normals or centers have no z component
    for m in sx.mirrors:
        assert (m.n if isinstance(m, Plane) else m.c)[2] == 0.0


def test_matrix_size():
    assert len(HYPERBOLIC) == 209


@pytest.mark.parametrize("terms", [(4, 3, 3), (4, 3, 4), (3, 3, 5), (5, 3, 3)])
def test_non_hyperbolic_rejected(terms):
    with pytest.raises(UnsupportedGeometry):
        build_simplex(SchlafliSymbol(*terms))


def test_angle_oracle_654():
    # measure the angles directly from the intersection circles, independent of normal_cosine
    sx = build_simplex(SchlafliSymbol(6, 5, 4))
    m0, m1, m2, m3 = sx.mirrors
    # M2, M3 are both spheres centred on z=0; angle from the law of cosines on the radii
    d = np.linalg.norm(m2.c - m3.c)
    cos_between_radii = (m2.radius ** 2 + m3.radius ** 2 - d ** 2) / (2 * m2.radius * m3.radius)
    assert math.acos(abs(cos_between_radii)) == pytest.approx(math.pi / 4, abs=1e-12)
    # M0, M1 planes through the z axis at angle pi/6
    assert math.acos(abs(np.dot(m0.n, m1.n))) == pytest.approx(math.pi / 6, abs=1e-12)


def test_perturbation_detected():
    sx = build_simplex(SchlafliSymbol(4, 3, 7))
    m3 = sx.mirrors[3]
    bad = Simplex(sx.mirrors[:3] + (Sphere(m3.c, m3.radius + 1e-3, m3.inside_ball),), sx.symbol, sx.geometry)
    res = verify_angles(bad)
    assert res[2] > 1e-5
    assert max(res[:2]) < 1e-9


def test_tangency_for_infinite_p():
    sx = build_simplex(SchlafliSymbol(INF, 3, 4))
    res = verify_angles(sx)
    assert res[0] < 1e-9
    assert normal_cosine(sx.mirrors[0], sx.mirrors[1]) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("s", HYPERBOLIC[::7], ids=str)
def test_domain_membership(s):
    sx = build_simplex(s)
    y = interior_point(sx)
    assert in_domain(sx, y)
    for m in sx.mirrors:
        assert not in_domain(sx, invert_point(m, y))
    on_m0 = np.array([y[0], 0.0, y[2]]) if s.p != INF else None
    if on_m0 is not None and in_domain(sx, on_m0 + np.array([0, 1e-9, 0])):
        assert in_domain(sx, on_m0)


def test_canonicalize_identity_and_single_undo():
    sx = build_simplex(SchlafliSymbol(4, 3, 7))
    y = interior_point(sx)
    r = canonicalize(sx, y)
    assert r.total_reflections == 0 and r.converged
    np.testing.assert_array_equal(r.point, y)
    r = canonicalize(sx, invert_point(sx.mirrors[2], y))
    assert r.total_reflections == 1
    np.testing.assert_allclose(r.point, y, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(HYPERBOLIC), st.lists(st.integers(0, 3), max_size=5))
def test_group_invariance(s, word):
    sx = build_simplex(s)
    y = interior_point(sx)
    r = canonicalize(sx, reflect_word(sx, y, word))
    assert r.converged
    np.testing.assert_allclose(r.point, y, atol=1e-9 * max(1.0, np.linalg.norm(y)))


def test_convergence_and_retraction_437():
    sx = build_simplex(SchlafliSymbol(4, 3, 7))
    rng = np.random.default_rng(7)
    pts = np.column_stack([rng.uniform(-2, 2, 10_000), rng.uniform(-2, 2, 10_000), np.zeros(10_000)])
    out, total, cell, conv = canonicalize_many(sx, pts, max_iter=4000)
    assert conv.mean() >= 0.999
    assert (cell <= total).all()
    _, total2, _, conv2 = canonicalize_many(sx, out[conv], max_iter=4000)
    assert (total2 == 0).all() and conv2.all()
    # determinism and chunk independence
    _, _, cell_b, _ = canonicalize_many(sx, pts[:5000], max_iter=4000)
    np.testing.assert_array_equal(cell[:5000], cell_b)


def test_cell_center_and_head():
    sx = build_simplex(SchlafliSymbol(4, 3, 7))
    c = sx.cell_center
    assert c is not None and in_domain(sx, c, tol=1e-12)
    assert build_simplex(SchlafliSymbol(7, 3, 4)).head_radius > 0
    assert build_simplex(SchlafliSymbol(6, 3, 4)).cell_center is None
