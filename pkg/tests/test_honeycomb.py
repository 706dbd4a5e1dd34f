import math

import numpy as np
import pytest

from honeycombs.conformal import Sphere, geodesic_circle
from honeycombs.honeycomb import (
    CLIP_RADIUS, Edge, NoMaterialCenter, ball_model, clipped, enumerate_cells, enumerate_edges,
    inradius, point_key, read_edges, seed_edge, self_similar_scale, write_edges, _reflect,
)
from honeycombs.schlafli import parse
from honeycombs.simplex import UnsupportedGeometry


@pytest.fixture(scope="module")
def edges435():
    return enumerate_edges(parse("4,3,5"), 0.08, 40)


def _on(m, x, tol=1e-9):
    return abs(float(m.signed_power(x))) < tol * max(1.0, getattr(m, "radius", 1.0))


def test_layer_counts_435():
    assert enumerate_cells(parse("4,3,5"), 2) == [1, 6, 30]


@pytest.mark.parametrize("sym, faces", [("5,3,4", 12), ("3,5,3", 20), ("4,3,7", 6), ("3,3,7", 4)])
def test_first_layer_is_face_count(sym, faces):
    assert enumerate_cells(parse(sym), 1) == [1, faces]


@pytest.mark.parametrize("sym", ["7,3,4", "6,3,4", "4,4,4"])
def test_no_material_center(sym):
    with pytest.raises(NoMaterialCenter):
        inradius(parse(sym))
    with pytest.raises(NoMaterialCenter):
        self_similar_scale(parse(sym))
    with pytest.raises(NoMaterialCenter):
        enumerate_cells(parse(sym))


def test_inradius_437_closed_form():
    closed = math.acosh(math.sqrt(2) * math.cos(math.pi / 7))
    assert inradius(parse("4,3,7")) == pytest.approx(closed, abs=1e-9)
    assert self_similar_scale(parse("4,3,7")) == pytest.approx(4.25917, abs=1e-4)
    assert self_similar_scale(parse("4,3,7")) == math.exp(2 * inradius(parse("4,3,7")))


@pytest.mark.parametrize("sym", ["4,3,5", "4,3,7", "5,3,4", "3,5,3", "3,3,6", "3,4,i"])
def test_inradius_oracle_ball(sym):
    # distance from the ball origin (the cell center) to the M3 image
    bm = ball_model(parse(sym))
    assert bm.centered_on == "cell"
    m3 = bm.mirrors[3]
    if isinstance(m3, Sphere):
        near = np.linalg.norm(m3.c) - m3.radius
    else:
        near = abs(m3.offset)
    assert inradius(parse(sym)) == pytest.approx(2 * math.atanh(near), abs=1e-9)


def test_scale_435_stable():
    a = self_similar_scale(parse("4,3,5"))
    assert a > 1 and a == self_similar_scale(parse("4,3,5"))


@pytest.mark.parametrize("sym", ["4,3,5", "5,3,4", "7,3,4", "3,3,6", "4,3,7", "6,3,6", "7,3,7"])
def test_seed_edge_incidence(sym):
    bm = ball_model(parse(sym))
    e = seed_edge(bm)
    # the edge lies on M2 and M3; M0 swaps its ends
    mid_circle = geodesic_circle(e.a, e.b)
    for x in (e.a, e.b):
        assert _on(bm.mirrors[2], x) and _on(bm.mirrors[3], x)
    np.testing.assert_allclose(_reflect(bm.mirrors[0], e.a), e.b, atol=1e-10)
    assert mid_circle is None or mid_circle[1] > 0
    # every ball mirror is orthogonal to the unit sphere
    for m in bm.mirrors:
        if isinstance(m, Sphere):
            assert m.c @ m.c == pytest.approx(1 + m.radius ** 2, rel=1e-9)
        else:
            assert abs(m.offset) < 1e-9


def test_central_cube_has_12_edges(edges435):
    verts = {}
    for e in edges435:
        for x in (e.a, e.b):
            verts[point_key(x)] = np.linalg.norm(x)
    r0 = min(verts.values())
    inner = {k for k, r in verts.items() if r < r0 + 1e-6}
    assert len(inner) == 8
    cube = [e for e in edges435 if point_key(e.a) in inner and point_key(e.b) in inner]
    assert len(cube) == 12


def test_interior_degree_435(edges435):
    deg = edges435.degrees()
    verts = {point_key(x): x for e in edges435 for x in (e.a, e.b)}
    inner = [k for k, x in verts.items() if np.linalg.norm(x) < 0.6]
    assert len(inner) >= 8
    assert all(deg[k] == 12 for k in inner)


def test_closure(edges435):
    bm = ball_model(parse("4,3,5"))
    for e in edges435:
        if e.depth >= 40:
            continue
        for m in bm.mirrors:
            f = Edge(_reflect(m, e.a), _reflect(m, e.b))
            assert f in edges435 or f.length < 0.08


def test_determinism_and_dedup(edges435):
    again = enumerate_edges(parse("4,3,5"), 0.08, 40)
    assert again.keys() == edges435.keys()
    ends = np.array([np.r_[e.a, e.b] for e in edges435])
    swapped = np.array([np.r_[e.b, e.a] for e in edges435])
    for i in range(0, len(ends), 97):
        d1 = np.abs(ends - ends[i]).max(axis=1)
        d2 = np.abs(swapped - ends[i]).max(axis=1)
        assert ((d1 < 1e-9) | (d2 < 1e-9)).sum() == 1


def test_key_symmetric():
    a, b = np.array([0.1, 0.2, 0.3]), np.array([-0.2, 0.0, 0.5])
    assert Edge(a, b).key == Edge(b, a).key


def test_threshold_cutoff():
    assert len(enumerate_edges(parse("4,3,5"), 5.0, 10)) == 0
    assert len(enumerate_edges(parse("4,3,5"), 0.01, 0)) == 1
    with pytest.raises(ValueError):
        enumerate_edges(parse("4,3,5"), 0.0, 3)


def test_unsupported():
    with pytest.raises(UnsupportedGeometry):
        enumerate_edges(parse("4,3,4"), 0.1, 3)
    with pytest.raises(UnsupportedGeometry):
        enumerate_edges(parse("7,3,i"), 0.1, 3)


def test_hyperideal_edges_are_clipped():
    es = enumerate_edges(parse("4,3,7"), 0.2, 20)
    assert len(es) > 12
    for e in list(es)[:50]:
        assert all(e.ideal_ends())
        a, b = clipped(e)
        assert np.linalg.norm(a) == pytest.approx(CLIP_RADIUS, abs=1e-12)
        assert np.linalg.norm(b) == pytest.approx(CLIP_RADIUS, abs=1e-12)
        c = geodesic_circle(e.a, e.b)
        if c is not None:
            for x in (a, b):
                assert np.linalg.norm(x - c[0]) == pytest.approx(c[1], rel=1e-10)
        # clipping keeps the nearer part: clipped ends are closer to the original ends than to each other
        assert np.linalg.norm(a - e.a) < np.linalg.norm(a - e.b)


def test_export_roundtrip(tmp_path, edges435):
    p = tmp_path / "edges.txt"
    write_edges(edges435, p)
    back = read_edges(p)
    assert back.keys() == edges435.keys()
    line = p.read_text().splitlines()[0].split()
    assert len(line) == 6
