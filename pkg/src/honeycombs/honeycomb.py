"""Honeycomb edges in the Poincare ball, cell layers, inradius.

The simplex is built in upper half space, moved by a similarity so that a
chosen center (cell center, else vertex, else edge midpoint) sits at
(0, 0, 1), and carried to the ball where that point becomes the origin.
Edges are generated breadth first by reflecting a seed edge in the four
ball mirrors.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .conformal import (
    GeneralizedSphere, Plane, Sphere, geodesic_circle, invert_point, invert_sphere, uhs_to_ball,
    uhs_to_ball_sphere,
)
from .schlafli import INF, ElementType, Geometry, SchlafliSymbol, cell_type, classify_3d, vertex_type
from .simplex import Simplex, UnsupportedGeometry, build_simplex

KEY_GRID = 1e-7
CLIP_RADIUS = 0.9995


class NoMaterialCenter(ValueError):
    pass


# -- keys --------------------------------------------------------------------

def point_key(x) -> tuple:
    return tuple(int(v) for v in np.rint(np.asarray(x, float) / KEY_GRID))


def edge_key(a, b) -> tuple:
    ka, kb = point_key(a), point_key(b)
    return (ka, kb) if ka <= kb else (kb, ka)


@dataclass(frozen=True)
class Edge:
    a: np.ndarray
    b: np.ndarray
    depth: int = 0

    @property
    def key(self) -> tuple:
        return edge_key(self.a, self.b)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.a - self.b))

    def ideal_ends(self, tol: float = 1e-9) -> tuple[bool, bool]:
        return abs(self.a @ self.a - 1.0) < tol, abs(self.b @ self.b - 1.0) < tol


@dataclass
class EdgeSet:
    edges: list = field(default_factory=list)
    index: dict = field(default_factory=dict)

    def add(self, e: Edge) -> bool:
        k = e.key
        if k in self.index:
            return False
        self.index[k] = len(self.edges)
        self.edges.append(e)
        return True

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __contains__(self, e: Edge) -> bool:
        return e.key in self.index

    def keys(self) -> set:
        return set(self.index)

    def adjacency(self) -> dict:
        """Vertex key -> list of edge indices."""
        adj: dict = {}
        for i, e in enumerate(self.edges):
            adj.setdefault(point_key(e.a), []).append(i)
            adj.setdefault(point_key(e.b), []).append(i)
        return adj

    def degrees(self) -> dict:
        return {k: len(v) for k, v in self.adjacency().items()}


# -- geometry ----------------------------------------------------------------

def _similar(m: GeneralizedSphere, shift: np.ndarray, scale: float) -> GeneralizedSphere:
    """Image of ``m`` under x -> (x - shift) / scale."""
    if isinstance(m, Sphere):
        return Sphere(tuple((m.c - shift) / scale), m.radius / scale, m.inside_ball)
    return Plane(m.normal, (m.offset - float(m.n @ shift)) / scale)


def edge_circle(sx: Simplex):
    """(foot midpoint x, half-chord) of the geodesic M2 ∩ M3 in upper half space.

    The geodesic is symmetric across M0 (y = 0), so it is the semicircle in
    the vertical plane x = px with radius py.
    """
    from .render_boundary import edge_feet

    if sx.symbol.r == INF:
        raise UnsupportedGeometry(f"{sx.symbol}: r = inf puts every edge at infinity")
    P, Q = edge_feet(sx)
    return float(P[0]), float(abs(P[1]))


def uhs_vertex(sx: Simplex) -> np.ndarray | None:
    """The honeycomb vertex on the seed edge: material point, ideal point, or None."""
    px, py = edge_circle(sx)
    m1 = sx.mirrors[1]
    # point on M1 with x = px, y from the plane equation
    if sx.symbol.p == INF:
        y = m1.offset
    else:
        y = px * (-m1.n[0]) / m1.n[1]
    vt = vertex_type(sx.symbol)
    if vt is ElementType.HYPERIDEAL:
        return None
    if vt is ElementType.IDEAL:
        return np.array([px, py if y > 0 else -py, 0.0])
    return np.array([px, y, math.sqrt(py * py - y * y)])


def center_point(sx: Simplex) -> tuple[str, np.ndarray]:
    """UHS point to place at the ball origin: cell center, material vertex or edge midpoint."""
    c = sx.cell_center
    if c is not None:
        return "cell", c
    if vertex_type(sx.symbol) is ElementType.MATERIAL:
        return "vertex", uhs_vertex(sx)
    px, py = edge_circle(sx)
    return "edge", np.array([px, 0.0, py])


@dataclass(frozen=True)
class BallModel:
    sx: Simplex
    mirrors: tuple
    shift: np.ndarray
    scale: float
    centered_on: str

    def to_ball(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        y = (x - self.shift) / self.scale
        return np.asarray(uhs_to_ball(y), float)


def ball_model(s: SchlafliSymbol) -> BallModel:
    if classify_3d(s) is not Geometry.HYPERBOLIC:
        raise UnsupportedGeometry(f"{s} is {classify_3d(s).value}")
    sx = build_simplex(s)
    kind, c = center_point(sx)
    shift = np.array([c[0], c[1], 0.0])
    scale = float(c[2])
    mirrors = tuple(uhs_to_ball_sphere(_similar(m, shift, scale)) for m in sx.mirrors)
    return BallModel(sx, mirrors, shift, scale, kind)


def seed_edge(bm: BallModel) -> Edge:
    sx = bm.sx
    px, py = edge_circle(sx)
    v = uhs_vertex(sx)
    if v is None:
        a, b = np.array([px, py, 0.0]), np.array([px, -py, 0.0])
    else:
        a, b = v, np.array([v[0], -v[1], v[2]])  # M0 is y = 0
    return Edge(bm.to_ball(a), bm.to_ball(b), 0)


def _reflect(m: GeneralizedSphere, x: np.ndarray) -> np.ndarray:
    y = np.asarray(invert_point(m, x), float)
    n = y @ y
    # ideal points stay on the sphere; remove drift
    if abs(n - 1.0) < 1e-9 and abs(x @ x - 1.0) < 1e-9:
        y = y / math.sqrt(n)
    return y


def enumerate_edges(s: SchlafliSymbol, min_euclidean_length: float = 0.05, max_depth: int = 50,
                    max_edges: int = 200_000) -> EdgeSet:
    """Breadth-first orbit of the seed edge under the four mirrors.

    An image is kept when its euclidean length is at least the threshold and
    its depth (number of reflections) does not exceed ``max_depth``.
    """
    if not min_euclidean_length > 0 or max_depth < 0:
        raise ValueError("thresholds must be positive")
    bm = ball_model(s)
    seed = seed_edge(bm)
    out = EdgeSet()
    if seed.length < min_euclidean_length:
        return out
    out.add(seed)
    q = deque([seed])
    while q:
        e = q.popleft()
        if e.depth >= max_depth:
            continue
        for m in bm.mirrors:
            f = Edge(_reflect(m, e.a), _reflect(m, e.b), e.depth + 1)
            if f.length < min_euclidean_length or f in out:
                continue
            out.add(f)
            if len(out) >= max_edges:
                raise RuntimeError(f"edge budget {max_edges} exhausted; raise min_euclidean_length")
            q.append(f)
    return out


def clipped(e: Edge, radius: float = CLIP_RADIUS) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints pulled in along the geodesic to ``|x| = radius`` when they are ideal."""
    ia, ib = e.ideal_ends()
    if not (ia or ib):
        return e.a, e.b
    circ = geodesic_circle(e.a, e.b)
    out = []
    for end, ideal in ((e.a, ia), (e.b, ib)):
        if not ideal:
            out.append(e.a if end is e.a else e.b)
        elif circ is None:
            out.append(radius * end / np.linalg.norm(end))
        else:
            # circle (c, rho) with |c|^2 = 1 + rho^2 meets |x| = radius at
            # alpha along c plus or minus beta across it, in the geodesic's plane
            c, _ = circ
            nc = float(np.linalg.norm(c))
            u = c / nc
            alpha = (radius * radius + 1.0) / (2.0 * nc)
            beta = math.sqrt(max(radius * radius - alpha * alpha, 0.0))
            w = end - (end @ u) * u
            w /= np.linalg.norm(w)
            out.append(alpha * u + beta * w)
    return out[0], out[1]


# -- cells -------------------------------------------------------------------

def _sphere_key(m: GeneralizedSphere) -> tuple:
    if isinstance(m, Sphere):
        return ("s",) + point_key(m.c) + (int(round(m.radius / KEY_GRID)),)
    return ("p",) + point_key(m.n) + (int(round(m.offset / KEY_GRID)),)


def central_faces(bm: BallModel) -> list:
    """Face mirrors of the central cell: the orbit of M3 under M0, M1, M2."""
    faces = {_sphere_key(bm.mirrors[3]): bm.mirrors[3]}
    q = deque([bm.mirrors[3]])
    while q:
        f = q.popleft()
        for m in bm.mirrors[:3]:
            g = invert_sphere(m, f)
            k = _sphere_key(g)
            if k not in faces:
                faces[k] = g
                q.append(g)
                if len(faces) > 1000:
                    raise NoMaterialCenter("cell has infinitely many faces")
    return list(faces.values())


def enumerate_cells(s: SchlafliSymbol, max_layer: int = 2) -> list[int]:
    """Cell counts per adjacency layer around the central cell (material cells only)."""
    if cell_type(s) is not ElementType.MATERIAL:
        raise NoMaterialCenter(f"{s} cells have no material center")
    bm = ball_model(s)
    faces0 = central_faces(bm)
    center = np.zeros(3)
    seen = {point_key(center)}
    layer = [(center, faces0)]
    counts = [1]
    for _ in range(max_layer):
        nxt = []
        for c, faces in layer:
            for f in faces:
                c2 = np.asarray(invert_point(f, c), float)
                k = point_key(c2)
                if k in seen:
                    continue
                seen.add(k)
                nxt.append((c2, [invert_sphere(f, g) for g in faces]))
        counts.append(len(nxt))
        layer = nxt
    return counts


# -- inradius ----------------------------------------------------------------

def inradius(s: SchlafliSymbol) -> float:
    """Distance from the cell center to a face, from the simplex geometry."""
    if classify_3d(s) is not Geometry.HYPERBOLIC:
        raise UnsupportedGeometry(f"{s} is not hyperbolic")
    sx = build_simplex(s)
    c = sx.cell_center
    if c is None:
        raise NoMaterialCenter(f"{s}: cells are {cell_type(s).value}, no material center")
    # the z-axis through the center meets M3 orthogonally at height R
    return math.log(c[2] / sx.mirrors[3].radius)


def self_similar_scale(s: SchlafliSymbol) -> float:
    return math.exp(2.0 * inradius(s))


# -- export ------------------------------------------------------------------

def write_edges(es, path, clip: float | None = CLIP_RADIUS) -> None:
    """One edge per line: ``ax ay az bx by bz``."""
    with open(path, "w") as fh:
        for e in es:
            a, b = clipped(e, clip) if clip is not None else (e.a, e.b)
            fh.write(" ".join(f"{v:.12g}" for v in (*a, *b)) + "\n")


def read_edges(path) -> EdgeSet:
    out = EdgeSet()
    with open(path) as fh:
        for line in fh:
            if line.strip():
                v = np.array([float(t) for t in line.split()])
                out.add(Edge(v[:3], v[3:]))
    return out
