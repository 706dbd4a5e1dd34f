"""Boundary-at-infinity images of hyperbolic honeycombs.

Every subsample on the plane z = 0 is pulled back through the viewport
isometry, folded into the fundamental simplex, and colored by how many cell
walls (M3 reflections) it crossed.  Hyperideal vertex disks additionally get
their cell walls drawn as thin black "bananas" of constant hyperbolic width.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .conformal import Plane, Sphere
from .schlafli import INF, ElementType, Geometry, SchlafliSymbol, cell_type, classify_3d, vertex_type
from .simplex import Simplex, UnsupportedGeometry, build_simplex, canonicalize_many

SUBSAMPLES = 4  # per axis
DEFAULT_MAX_ITER = 4000
DEFAULT_BANANA = 0.025
UNCONVERGED = -1
TANGENT_TOL = 1e-10  # relative; squared half-chord below this counts as tangency


class EmptyGrid(ValueError):
    pass


class Isometry:
    """Composition of boundary Mobius steps, applied left to right.

    Steps are ``("scale", s)``, ``("rotate", angle)``, ``("translate", (dx, dy))``
    and ``("invert", (cx, cy), radius)``.  Each extends to an isometry of
    upper half space fixing the vertical direction.
    """

    def __init__(self, steps=()):
        self.steps = tuple(steps)

    def then(self, *steps) -> "Isometry":
        return Isometry(self.steps + tuple(steps))

    def apply(self, pts) -> np.ndarray:
        p = np.array(pts, dtype=float, copy=True)
        single = p.ndim == 1
        p = p.reshape(-1, 3)
        with np.errstate(divide="ignore", invalid="ignore"):
            for st in self.steps:
                kind = st[0]
                if kind == "scale":
                    p *= st[1]
                elif kind == "rotate":
                    c, s = math.cos(st[1]), math.sin(st[1])
                    x = p[:, 0].copy()
                    p[:, 0] = c * x - s * p[:, 1]
                    p[:, 1] = s * x + c * p[:, 1]
                elif kind == "translate":
                    p[:, 0] += st[1][0]
                    p[:, 1] += st[1][1]
                elif kind == "invert":
                    cx, cy = st[1]
                    d = p - np.array([cx, cy, 0.0])
                    f = st[2] ** 2 / np.einsum("ij,ij->i", d, d)
                    p = np.array([cx, cy, 0.0]) + f[:, None] * d
                else:
                    raise ValueError(f"unknown isometry step {kind!r}")
        return p[0] if single else p

    def __repr__(self):
        return f"Isometry({list(self.steps)!r})"


@dataclass(frozen=True)
class Viewport:
    center: tuple = (0.0, 0.0)
    half_extent: float = 1.0
    resolution: tuple = (256, 256)  # (width, height)
    pre_isometry: Isometry | None = None
    tower_scale: float | None = None  # color by depth from a dilation-invariant tower of cells

    def __post_init__(self):
        w, h = self.resolution
        if w < 1 or h < 1:
            raise ValueError("resolution must be at least 1x1")
        if not self.half_extent > 0:
            raise ValueError("half_extent must be positive")
        if self.tower_scale is not None and not self.tower_scale > 1:
            raise ValueError("tower_scale must exceed 1")

    def sample_points(self, rows: slice | None = None) -> np.ndarray:
        """Screen coordinates of the 4x4 subsamples, shape (rows, W, 16, 2).

        half_extent is half the image width; pixels are square.  Offsets are
        built from integer numerators so the grid is exactly symmetric.
        """
        w, h = self.resolution
        n = SUBSAMPLES
        r = range(h)[rows] if rows is not None else range(h)
        a = np.arange(n)
        num_x = 2 * n * np.arange(w)[:, None] + 2 * a[None, :] + 1 - n * w  # (W, n)
        num_y = 2 * n * np.asarray(r)[:, None] + 2 * a[None, :] + 1 - n * h  # (rows, n)
        sx = num_x / (n * w) * self.half_extent
        sy = -num_y / (n * w) * self.half_extent
        X = np.broadcast_to(sx[None, :, None, :], (len(r), w, n, n))
        Y = np.broadcast_to(sy[:, None, :, None], (len(r), w, n, n))
        out = np.stack([X + self.center[0], Y + self.center[1]], axis=-1)
        return out.reshape(len(r), w, n * n, 2)


@dataclass
class DepthGrid:
    depth: np.ndarray  # (H, W, 16) int, UNCONVERGED where canonicalization bailed out
    in_banana: np.ndarray  # (H, W, 16) bool

    @property
    def converged(self) -> np.ndarray:
        return self.depth >= 0

    @property
    def mean_depth(self) -> float:
        conv = self.converged
        n = int(conv.sum())
        if n == 0:
            return 0.0
        return int(self.depth[conv].sum(dtype=np.int64)) / n


HEXAGON = (
    (1.0, 1.0, 1.0),  # white
    (0.0, 1.0, 1.0),  # cyan
    (0.0, 0.0, 1.0),  # blue
    (0.0, 0.0, 0.0),  # black
    (1.0, 0.0, 0.0),  # red
    (1.0, 1.0, 0.0),  # yellow
    (1.0, 1.0, 1.0),
)


@dataclass(frozen=True)
class Palette:
    hexagon_vertices: tuple = HEXAGON
    start_offset: float = 0.0
    direction: int = 1
    rate_constant: float = 1.0
    bailout: tuple = (0.0, 0.0, 0.0)
    # path distance where deep samples stop advancing (3 = the black vertex);
    # None cycles forever, which turns sub-pixel dust near the limit set into noise
    saturate_at: float | None = 3.0

    def __post_init__(self):
        if len(self.hexagon_vertices) != 7:
            raise ValueError("palette path needs 7 vertices (closed hexagon)")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if not self.rate_constant > 0:
            raise ValueError("rate constant must be positive")


def color_path(t, vertices=HEXAGON) -> np.ndarray:
    """Piecewise-linear walk around the hexagon, period 6."""
    v = np.asarray(vertices, dtype=float)
    t = np.mod(np.asarray(t, dtype=float), 6.0)
    i = np.minimum(np.floor(t).astype(int), 5)
    f = (t - i)[..., None]
    return v[i] * (1.0 - f) + v[i + 1] * f


def rate_for(mean_depth: float, k: float = 1.0) -> float:
    return k / math.sqrt(max(mean_depth, 1.0))


def colorize(g: DepthGrid, pal: Palette = Palette()) -> np.ndarray:
    """8-bit RGB image, shape (H, W, 3)."""
    conv = g.converged
    if not conv.any():
        raise EmptyGrid("no converged samples to color")
    rate = rate_for(g.mean_depth, pal.rate_constant)
    dist = np.where(conv, g.depth, 0) * rate
    if pal.saturate_at is not None:
        dist = np.minimum(dist, pal.saturate_at)
    t = pal.start_offset + pal.direction * dist
    rgb = color_path(t, pal.hexagon_vertices)
    rgb[g.in_banana] = 0.0
    rgb[~conv] = pal.bailout
    avg = rgb.mean(axis=2)
    return np.clip(np.rint(avg * 255.0), 0, 255).astype(np.uint8)


# -- vertex disks and bananas -------------------------------------------------

def vertex_disk(sx: Simplex):
    """Boundary circle (center, radius) of the hyperideal vertex's polar plane.

    It is the circle on z = 0 orthogonal to the traces of M1, M2, M3.
    Returns None when the vertex is material or ideal.
    """
    if vertex_type(sx.symbol) is not ElementType.HYPERIDEAL:
        return None
    # unknowns (cx, cy, w) with w = |c|^2 - rho^2
    A, b = [], []
    for m in sx.mirrors[1:]:
        if isinstance(m, Sphere):
            A.append([-2 * m.c[0], -2 * m.c[1], 1.0])
            b.append(m.radius ** 2 - m.c[0] ** 2 - m.c[1] ** 2)
        else:
            A.append([m.n[0], m.n[1], 0.0])
            b.append(m.offset)
    cx, cy, w = np.linalg.solve(np.array(A), np.array(b))
    rho2 = cx * cx + cy * cy - w
    if rho2 <= 0:
        return None
    return np.array([cx, cy]), math.sqrt(rho2)


def banana_sinh(sx: Simplex, disk, pts) -> np.ndarray:
    """sinh of the 2D hyperbolic distance (in the vertex disk) to the M3 trace.

    ``inf`` outside the disk.  ``pts`` is (N, 2) or (N, 3) with z ignored.
    """
    c0, rho0 = disk
    pts = np.asarray(pts, dtype=float)
    u = (pts[:, :2] - c0) / rho0
    uu = np.einsum("ij,ij->i", u, u)
    m3 = sx.mirrors[3]
    with np.errstate(divide="ignore", invalid="ignore"):
        if isinstance(m3, Sphere):
            g = (m3.c[:2] - c0) / rho0
            rg = m3.radius / rho0
            d = u - g
            s = np.abs(np.einsum("ij,ij->i", d, d) - rg * rg) / (rg * (1.0 - uu))
        else:
            s = 2.0 * np.abs((pts[:, :2] @ m3.n[:2] - m3.offset) / rho0) / (1.0 - uu)
    return np.where(uu < 1.0, s, np.inf)


def banana_test(sx: Simplex, x, radius: float = DEFAULT_BANANA) -> bool:
    disk = vertex_disk(sx)
    if disk is None:
        return False
    return bool(banana_sinh(sx, disk, np.asarray(x, float)[None, :])[0] < math.sinh(radius))


# -- centering -----------------------------------------------------------------

def trace_intersections(a, b) -> list[np.ndarray]:
    """Points where the boundary traces (circles/lines on z = 0) of two mirrors meet."""
    def circ(m):
        return (m.c[:2], m.radius) if isinstance(m, Sphere) else None

    ca, cb = circ(a), circ(b)
    if ca is None and cb is None:
        n1, n2 = a.n[:2], b.n[:2]
        det = n1[0] * n2[1] - n1[1] * n2[0]
        if abs(det) < 1e-15:
            return []
        return [np.array([(a.offset * n2[1] - b.offset * n1[1]) / det, (n1[0] * b.offset - n2[0] * a.offset) / det])]
    if ca is None:
        a, b, ca, cb = b, a, cb, ca
    c, r = ca
    if cb is None:
        n, off = b.n[:2], b.offset
        foot = c + (off - c @ n) * n
        h2 = r * r - float((off - c @ n) ** 2)
        if h2 < -TANGENT_TOL * r * r:
            return []
        t = np.array([-n[1], n[0]]) * math.sqrt(max(h2, 0.0))
        return [foot + t, foot - t] if h2 > TANGENT_TOL * r * r else [foot]
    c2, r2 = cb
    d = float(np.linalg.norm(c2 - c))
    if d == 0:
        return []
    x = (d * d + r * r - r2 * r2) / (2 * d)
    h2 = r * r - x * x
    scale = min(r, r2) ** 2
    if h2 < -TANGENT_TOL * scale:
        return []
    e = (c2 - c) / d
    base = c + x * e
    t = np.array([-e[1], e[0]]) * math.sqrt(max(h2, 0.0))
    return [base + t, base - t] if h2 > TANGENT_TOL * scale else [base]


def edge_feet(sx: Simplex) -> list[np.ndarray]:
    """Boundary feet of the edge geodesic M2 ∩ M3 (one point when tangent)."""
    pts = trace_intersections(sx.mirrors[2], sx.mirrors[3])
    return sorted(pts, key=lambda p: -p[1])


def self_similar_scale_of(sx: Simplex) -> float:
    """Dilation about the origin carrying the central cell to its neighbour along the z-axis."""
    c = sx.cell_center
    if c is None:
        raise UnsupportedGeometry(f"{sx.symbol} has no material cell center")
    return (c[2] / sx.mirrors[3].radius) ** 2


CENTERINGS = ("cell", "edge", "auto", "self-similar")


def auto_centering(s: SchlafliSymbol) -> str:
    if cell_type(s) is not ElementType.MATERIAL and vertex_type(s) is not ElementType.MATERIAL:
        return "edge"
    return "cell"


def centering_isometry(sx: Simplex, mode: str = "auto") -> Isometry:
    """Screen -> model map putting a cell (or an edge) at the image center."""
    s = sx.symbol
    if mode == "auto":
        mode = auto_centering(s)
    if mode == "self-similar":
        mode = "cell"
    if mode == "cell":
        if s.p == INF:
            # unit disk -> half plane x < 0 (the cell head)
            return Isometry([("invert", (1.0, 0.0), math.sqrt(2.0))])
        if sx.meta is Geometry.SPHERICAL:
            return Isometry([("scale", float(sx.cell_center[2]))])
        if sx.meta is Geometry.HYPERBOLIC:
            return Isometry([("scale", sx.head_radius)])
        return Isometry()
    if mode == "edge":
        feet = edge_feet(sx)
        if len(feet) == 1:
            return Isometry([("invert", (0.0, 0.0), 1.0), ("translate", tuple(feet[0]))])
        P, Q = feet
        rho = float(np.linalg.norm(P - Q))
        # screen unit circle -> trace of M0, edge geodesic -> vertical line over the origin
        return Isometry([
            ("scale", rho), ("translate", tuple(P)), ("invert", tuple(Q), rho),
        ])
    raise ValueError(f"unknown centering {mode!r}; choose from {CENTERINGS}")


def default_viewport(s: SchlafliSymbol, resolution=(256, 256), center: str = "auto",
                     half_extent: float | None = None) -> Viewport:
    sx = build_simplex(s)
    iso = centering_isometry(sx, center)
    tower = self_similar_scale_of(sx) if center == "self-similar" else None
    if tower is not None and s.p != 4:
        raise UnsupportedGeometry("self-similar centering needs cubic cells {4,3,r}")
    if half_extent is None:
        half_extent = 3.0 if center == "self-similar" else 1.6
    return Viewport((0.0, 0.0), half_extent, tuple(resolution), iso, tower)


# -- rendering -----------------------------------------------------------------

def _tower_reduce(xy: np.ndarray, t: float):
    """Scale each point by t^-n so that 1 <= |x| < t."""
    r = np.hypot(xy[:, 0], xy[:, 1])
    with np.errstate(divide="ignore"):
        n = np.floor(np.log(r) / math.log(t))
    n = np.where(np.isfinite(n), n, 0.0)
    return xy * np.power(t, -n)[:, None]


def _depth_rows(sx, vp, rows, max_iter, banana_radius, disk, tower_span):
    screen = vp.sample_points(rows)
    shape = screen.shape[:3]
    flat = np.zeros((screen[..., 0].size, 3))
    flat[:, :2] = screen.reshape(-1, 2)
    if vp.pre_isometry is not None:
        flat = vp.pre_isometry.apply(flat)
    if vp.tower_scale is None:
        pts, _, cell, conv = canonicalize_many(sx, flat, max_iter)
        depth = np.where(conv, cell, UNCONVERGED)
    else:
        # depth to the nearest cell of the dilation tower: min over nearby scales
        t = vp.tower_scale
        base = _tower_reduce(flat[:, :2], t)
        depth = np.full(len(flat), np.iinfo(np.int64).max)
        pts = np.zeros_like(flat)
        anyconv = np.zeros(len(flat), bool)
        for j in range(-tower_span, tower_span + 1):
            q = np.zeros_like(flat)
            q[:, :2] = base * t ** j
            out, _, cell, conv = canonicalize_many(sx, q, max_iter)
            better = conv & (cell < depth)
            depth = np.where(better, cell, depth)
            pts[better] = out[better]
            anyconv |= conv
        depth = np.where(anyconv, depth, UNCONVERGED)
        conv = anyconv
    banana = np.zeros(len(flat), bool)
    if disk is not None and banana_radius > 0:
        banana = conv & (banana_sinh(sx, disk, pts) < math.sinh(banana_radius))
    return depth.reshape(shape), banana.reshape(shape)


def depth_field(sx: Simplex, vp: Viewport, max_iter: int = DEFAULT_MAX_ITER,
                banana_radius: float = DEFAULT_BANANA, workers: int = 1,
                rows_per_chunk: int = 16, tower_span: int = 2) -> DepthGrid:
    if sx.geometry is not Geometry.HYPERBOLIC:
        raise UnsupportedGeometry(f"{sx.symbol} is not hyperbolic")
    w, h = vp.resolution
    disk = vertex_disk(sx)
    chunks = [slice(i, min(i + rows_per_chunk, h)) for i in range(0, h, rows_per_chunk)]

    def job(rows):
        return _depth_rows(sx, vp, rows, max_iter, banana_radius, disk, tower_span)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    depth = np.concatenate([p[0] for p in parts])
    banana = np.concatenate([p[1] for p in parts])
    return DepthGrid(depth, banana)


def render(s: SchlafliSymbol, vp: Viewport | None = None, pal: Palette = Palette(),
           banana_radius: float = DEFAULT_BANANA, max_iter: int = DEFAULT_MAX_ITER,
           workers: int = 1) -> np.ndarray:
    if classify_3d(s) is not Geometry.HYPERBOLIC:
        raise UnsupportedGeometry(f"{s} is {classify_3d(s).value}; only hyperbolic honeycombs can be rendered")
    sx = build_simplex(s)
    if vp is None:
        vp = default_viewport(s)
    g = depth_field(sx, vp, max_iter, banana_radius, workers)
    return colorize(g, pal)


def save_png(img: np.ndarray, path) -> None:
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(img), mode="RGB").save(path, format="PNG")
