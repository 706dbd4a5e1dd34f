"""Printable tube meshes for honeycomb edges.

Each edge becomes a closed tube whose rings are the tangent circles of a
family of equal hyperbolic spheres centred on the edge.  Rings are built in a
frame where the edge lies on a diameter, so every ring shares one angular
basis and the tube has no twist.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .conformal import DegenerateArc, geodesic_arc, geodesic_circle, mobius_to_origin
from .honeycomb import CLIP_RADIUS, Edge, EdgeSet, clipped, point_key

DEFAULT_R0 = 0.02
DEFAULT_RINGS = 24
DEFAULT_AROUND = 16


class EmptyMesh(ValueError):
    pass


# -- thickness policies --------------------------------------------------------

@dataclass(frozen=True)
class Accurate:
    """Constant hyperbolic offset 2 artanh(r0) from the core geodesic."""
    r0: float

    def __post_init__(self):
        if not 0 < self.r0 < 1:
            raise ValueError("r0 must lie in (0, 1)")


@dataclass(frozen=True)
class AccurateClamped:
    r0: float
    min_euclidean_diameter: float

    def __post_init__(self):
        if not 0 < self.r0 < 1 or not self.min_euclidean_diameter > 0:
            raise ValueError("r0 in (0, 1) and a positive minimum diameter required")


@dataclass(frozen=True)
class ConstantEuclidean:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")


ThicknessPolicy = Accurate | AccurateClamped | ConstantEuclidean


# -- mesh container --------------------------------------------------------------

@dataclass
class Mesh:
    vertices: np.ndarray   # (n, 3) float
    triangles: np.ndarray  # (m, 3) int

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, np.int64).reshape(-1, 3)
        if len(self.triangles) and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise ValueError("triangle index out of range")

    @classmethod
    def concat(cls, meshes) -> "Mesh":
        meshes = list(meshes)
        if not meshes:
            return cls(np.zeros((0, 3)), np.zeros((0, 3), np.int64))
        offs = np.cumsum([0] + [len(m.vertices) for m in meshes[:-1]])
        return cls(np.vstack([m.vertices for m in meshes]),
                   np.vstack([m.triangles + o for m, o in zip(meshes, offs)]))

    def soup(self) -> np.ndarray:
        """(m, 3, 3) triangle corner coordinates."""
        return self.vertices[self.triangles]

    def signed_volume(self) -> float:
        t = self.soup()
        return float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)


# -- tube construction -------------------------------------------------------------

def _frame(e: Edge, ends):
    """Base point on the geodesic, its diameter direction, and unit perpendiculars."""
    circ = geodesic_circle(e.a, e.b)
    if circ is None:
        m = np.zeros(3)
    else:
        c, rho = circ
        nc = float(np.linalg.norm(c))
        m = c / nc * (nc - rho)
    fa, fb = mobius_to_origin(m, ends[0]), mobius_to_origin(m, ends[1])
    u = fb - fa
    u /= np.linalg.norm(u)
    # a fixed perpendicular basis; any choice works, this one is deterministic
    helper = np.eye(3)[int(np.argmin(np.abs(u)))]
    e1 = np.cross(u, helper)
    e1 /= np.linalg.norm(e1)
    return m, u, e1, np.cross(u, e1)


def _core_points(e: Edge, n_rings: int, clip: float) -> tuple[np.ndarray, tuple]:
    ia, ib = e.ideal_ends()
    if not (ia or ib):
        return geodesic_arc(e.a, e.b, n_rings - 1), (e.a, e.b)
    a, b = clipped(e, clip)
    circ = geodesic_circle(a, b)
    t = np.linspace(0.0, 1.0, n_rings)[:, None]
    if circ is None:
        return a + t * (b - a), (a, b)
    c, rho = circ
    ua, ub = (a - c) / rho, (b - c) / rho
    ang = math.acos(max(-1.0, min(1.0, float(ua @ ub))))
    perp = ub - (ua @ ub) * ua
    perp /= np.linalg.norm(perp)
    pts = c + rho * (np.cos(t * ang) * ua + np.sin(t * ang) * perp)
    pts[0], pts[-1] = a, b
    return pts, (a, b)


def accurate_rings(e: Edge, r0: float, n_rings: int, n_around: int, clip: float = CLIP_RADIUS):
    """Ring points (n_rings, n_around, 3) at hyperbolic distance 2 artanh(r0) from the edge.

    Also returns the core points the rings surround.
    """
    if n_rings < 2 or n_around < 3:
        raise ValueError("need n_rings >= 2 and n_around >= 3")
    if e.length == 0.0:
        raise DegenerateArc("edge endpoints coincide")
    core, ends = _core_points(e, n_rings, clip)
    m, u, e1, e2 = _frame(e, ends)
    t = mobius_to_origin(m, core) @ u
    th = 2.0 * math.pi * np.arange(n_around) / n_around
    ring0 = r0 * (np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2)
    # translation along u taking 0 to t*u, applied to points perpendicular to u
    tt = t[:, None, None]
    moved = ((1.0 - tt * tt) * ring0[None] + (1.0 + r0 * r0) * tt * u) / (1.0 + tt * tt * r0 * r0)
    rings = mobius_to_origin(-m, moved.reshape(-1, 3)).reshape(n_rings, n_around, 3)
    return rings, core


def _ring_circles(rings: np.ndarray):
    """Circumcircle (centers, radii, unit normals) of each ring, from three of its points."""
    k = rings.shape[1] // 3
    a, b, c = rings[:, 0], rings[:, k], rings[:, 2 * k]
    u, v = b - a, c - a
    w = np.cross(u, v)
    ww = np.einsum("ij,ij->i", w, w)[:, None]
    uu = np.einsum("ij,ij->i", u, u)[:, None]
    vv = np.einsum("ij,ij->i", v, v)[:, None]
    centers = a + (np.cross(w, u) * vv + np.cross(v, w) * uu) / (2.0 * ww)
    radii = np.linalg.norm(centers - a, axis=1)
    return centers, radii, w / np.sqrt(ww)


def tube_rings(e: Edge, policy, n_rings: int = DEFAULT_RINGS, n_around: int = DEFAULT_AROUND,
               clip: float = CLIP_RADIUS) -> np.ndarray:
    if isinstance(policy, ConstantEuclidean):
        # accurate ring planes and directions, recentred on the core at a fixed size
        rings, core = accurate_rings(e, 0.5, n_rings, n_around, clip)
        centers, radii, _ = _ring_circles(rings)
        scale = policy.radius / radii
        return core[:, None, :] + (rings - centers[:, None, :]) * scale[:, None, None]
    rings, _ = accurate_rings(e, policy.r0, n_rings, n_around, clip)
    if isinstance(policy, Accurate):
        return rings
    centers, radii, _ = _ring_circles(rings)
    scale = np.maximum(radii, policy.min_euclidean_diameter / 2.0) / radii
    return centers[:, None, :] + (rings - centers[:, None, :]) * scale[:, None, None]


def _stitch(n_rings: int, n_around: int) -> np.ndarray:
    tris = []
    for i in range(n_rings - 1):
        for j in range(n_around):
            a, b = i * n_around + j, i * n_around + (j + 1) % n_around
            c, d = a + n_around, b + n_around
            tris += [(a, b, d), (a, d, c)]
    start, end = n_rings * n_around, n_rings * n_around + 1
    last = (n_rings - 1) * n_around
    for j in range(n_around):
        jn = (j + 1) % n_around
        tris.append((start, jn, j))
        tris.append((end, last + j, last + jn))
    return np.array(tris, np.int64)


def cyclide_tube(e: Edge, policy, n_rings: int = DEFAULT_RINGS, n_around: int = DEFAULT_AROUND,
                 clip: float = CLIP_RADIUS) -> Mesh:
    """Closed tube around ``e`` with flat fan caps, oriented outward."""
    rings = tube_rings(e, policy, n_rings, n_around, clip)
    centers, _, _ = _ring_circles(rings[[0, -1]])
    mesh = Mesh(np.vstack([rings.reshape(-1, 3), centers]), _stitch(n_rings, n_around))
    if mesh.signed_volume() < 0:
        mesh.triangles = mesh.triangles[:, ::-1].copy()
    return mesh


def build_mesh(es, policy, n_rings: int = DEFAULT_RINGS, n_around: int = DEFAULT_AROUND,
               clip: float = CLIP_RADIUS) -> Mesh:
    return Mesh.concat(cyclide_tube(e, policy, n_rings, n_around, clip) for e in es)


# -- culling ---------------------------------------------------------------------

def max_tube_diameter(e: Edge, r0: float, clip: float = CLIP_RADIUS) -> float:
    """Euclidean diameter of the largest sphere swept along the edge.

    Sphere size shrinks with distance from the origin, so the largest one sits
    at the point of the edge nearest the origin.
    """
    a, b = clipped(e, clip)
    circ = geodesic_circle(a, b)
    if circ is None:
        m = np.zeros(3)
    else:
        c, rho = circ
        nc = float(np.linalg.norm(c))
        m = c / nc * (nc - rho)
    # m is on the segment when centring it puts a and b on opposite sides
    if mobius_to_origin(m, a) @ mobius_to_origin(m, b) < 0:
        d2 = float(m @ m)
    else:
        d2 = min(float(a @ a), float(b @ b))
    return 2.0 * r0 * (1.0 - d2) / (1.0 - d2 * r0 * r0)


def prune_dangling(es) -> EdgeSet:
    """Repeatedly drop edges with a material end of degree one.

    Ideal endpoints lie on the sphere at infinity and never count as dangling.
    """
    edges = list(es)
    ends = [(point_key(e.a), point_key(e.b)) for e in edges]
    anchored = [e.ideal_ends() for e in edges]
    inc = defaultdict(set)
    for i, (ka, kb) in enumerate(ends):
        inc[ka].add(i)
        inc[kb].add(i)
    alive = [True] * len(edges)
    stack = [k for k, s in inc.items() if len(s) == 1]
    while stack:
        k = stack.pop()
        if len(inc[k]) != 1:
            continue
        i = next(iter(inc[k]))
        side = 0 if ends[i][0] == k else 1
        if anchored[i][side]:
            continue
        alive[i] = False
        for kk in ends[i]:
            inc[kk].discard(i)
            if len(inc[kk]) == 1:
                stack.append(kk)
    out = EdgeSet()
    for e, ok in zip(edges, alive):
        if ok:
            out.add(e)
    return out


def cull(es, min_euclidean_diameter: float, r0: float = DEFAULT_R0, clip: float = CLIP_RADIUS) -> EdgeSet:
    """Drop edges thinner than the threshold everywhere, then prune dangling edges."""
    thick = [e for e in es if max_tube_diameter(e, r0, clip=clip) >= min_euclidean_diameter]
    return prune_dangling(thick)


# -- export ----------------------------------------------------------------------

STL_RECORD = np.dtype([("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])


def _unit_normals(tri: np.ndarray) -> np.ndarray:
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    ln = np.linalg.norm(n, axis=1, keepdims=True)
    return np.divide(n, ln, out=np.zeros_like(n), where=ln > 0)


def export_stl(m: Mesh, scale_mm: float = 1.0) -> bytes:
    if len(m.triangles) == 0:
        raise EmptyMesh("mesh has no triangles")
    tri = m.soup() * scale_mm
    rec = np.zeros(len(tri), STL_RECORD)
    rec["normal"] = _unit_normals(tri)
    rec["v"] = tri
    header = b"honeycombs binary STL".ljust(80, b"\0")
    return header + np.uint32(len(tri)).astype("<u4").tobytes() + rec.tobytes()


def read_stl(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """(normals (m, 3), triangles (m, 3, 3)) from binary STL bytes."""
    n = int(np.frombuffer(data, "<u4", 1, 80)[0])
    if len(data) != 84 + 50 * n:
        raise ValueError("truncated or padded STL")
    rec = np.frombuffer(data, STL_RECORD, n, 84)
    return rec["normal"].astype(float), rec["v"].astype(float)


def export_obj(m: Mesh) -> str:
    if len(m.triangles) == 0:
        raise EmptyMesh("mesh has no triangles")
    lines = [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in m.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in m.triangles]
    return "\n".join(lines) + "\n"
