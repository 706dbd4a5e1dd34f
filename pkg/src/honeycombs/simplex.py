"""Fundamental simplex of a hyperbolic {p,q,r} honeycomb in upper half space.

All four mirrors are orthogonal to the boundary plane z = 0.  M0, M1, M2
trace the meta-{p,q} triangle on the boundary; M3 is the cell mirror,
centered on the meta-cell center.

Orientation conventions (the simplex is the intersection of the insides):

* M0 is the plane y = 0 with y > 0 inside.
* M1 is the plane through the z-axis at angle pi/p (or y = 1 for p = inf).
* M2 depends on the meta-tiling {p,q}: a sphere centered at (k, 0, 0) with
  its outside as inside when hyperbolic, a sphere at (-k, 0, 0) when
  spherical, the plane x = 1 when euclidean; k = cos(pi/q) / sin(pi/p).
  For p = inf it is the sphere of radius 1/cos(pi/q) about the origin.
* M3 is a hemisphere about the origin.  Material cells (spherical meta)
  keep the cell center (0, 0, h), h^2 = 1 - k^2, above it; ideal cells have
  their center at infinity; hyperideal cells have their head around the
  origin.  For p = inf M3 is a vertical plane x = const.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conformal import GeneralizedSphere, Plane, Sphere, invert_point, normal_cosine
from .schlafli import (
    INF, Geometry, SchlafliSymbol, classify_2d, classify_3d, cos_pi_over, sin_pi_over,
)

DOMAIN_TOL = 1e-12
PAIRS = ((0, 1), (1, 2), (2, 3), (0, 2), (0, 3), (1, 3))


class UnsupportedGeometry(ValueError):
    pass


@dataclass(frozen=True)
class Simplex:
    mirrors: tuple
    symbol: SchlafliSymbol
    geometry: Geometry

    @property
    def meta(self) -> Geometry:
        return classify_2d(self.symbol.p, self.symbol.q)

    def targets(self) -> tuple:
        s = self.symbol
        return (s.p, s.q, s.r, 2, 2, 2)

    @property
    def cell_center(self) -> np.ndarray | None:
        """Material cell center (0, 0, h), or None for ideal/hyperideal cells."""
        if self.symbol.p == INF or self.meta is not Geometry.SPHERICAL:
            return None
        k = self.mirrors[2].c[0]
        return np.array([0.0, 0.0, math.sqrt(1.0 - k * k)])

    @property
    def head_radius(self) -> float | None:
        """Radius of the central cell head about the origin (finite p, hyperideal cells)."""
        if self.symbol.p == INF or self.meta is not Geometry.HYPERBOLIC:
            return None
        k = self.mirrors[2].c[0]
        return math.sqrt(k * k - 1.0)


def build_simplex(s: SchlafliSymbol) -> Simplex:
    g = classify_3d(s)
    if g is not Geometry.HYPERBOLIC:
        raise UnsupportedGeometry(f"{s} is {g.value}; only hyperbolic honeycombs have an upper half space simplex")
    p, q, r = s.terms
    gamma = cos_pi_over(r)
    m0 = Plane((0.0, -1.0, 0.0), 0.0)
    if p == INF:
        m1 = Plane((0.0, 1.0, 0.0), 1.0)
        rho = 1.0 / cos_pi_over(q)
        m2 = Sphere((0.0, 0.0, 0.0), rho, inside_ball=False)
        m3 = Plane((1.0, 0.0, 0.0), rho * gamma)
        return Simplex((m0, m1, m2, m3), s, g)

    a = math.pi / p
    m1 = Plane((-math.sin(a), math.cos(a), 0.0), 0.0)
    meta = classify_2d(p, q)
    k = cos_pi_over(q) / sin_pi_over(p)
    if meta is Geometry.HYPERBOLIC:
        m2 = Sphere((k, 0.0, 0.0), 1.0, inside_ball=False)
        m3 = Sphere((0.0, 0.0, 0.0), gamma + math.sqrt(gamma * gamma + k * k - 1.0), inside_ball=True)
    elif meta is Geometry.EUCLIDEAN:
        m2 = Plane((1.0, 0.0, 0.0), 1.0)
        m3 = Sphere((0.0, 0.0, 0.0), 1.0 / gamma, inside_ball=False)
    else:
        m2 = Sphere((-k, 0.0, 0.0), 1.0, inside_ball=True)
        h2 = 1.0 - k * k
        # smaller root of R^2 - 2 gamma R + h^2 = 0; hyperbolicity gives gamma > h
        m3 = Sphere((0.0, 0.0, 0.0), h2 / (gamma + math.sqrt(gamma * gamma - h2)), inside_ball=False)
    return Simplex((m0, m1, m2, m3), s, g)


def pair_residual(a: GeneralizedSphere, b: GeneralizedSphere, m) -> float:
    """|measured - target| for interior angle pi/m; tangency residual for m = inf."""
    cs = normal_cosine(a, b)
    if m == INF:
        return abs(1.0 + cs)
    excess = max(0.0, abs(cs) - 1.0)
    measured = math.pi - math.acos(max(-1.0, min(1.0, cs)))
    return abs(measured - math.pi / m) + excess


def verify_angles(sx: Simplex) -> list[float]:
    """Residuals for pairs (0,1), (1,2), (2,3), (0,2), (0,3), (1,3)."""
    return [pair_residual(sx.mirrors[i], sx.mirrors[j], m) for (i, j), m in zip(PAIRS, sx.targets())]


def in_domain(sx: Simplex, x, tol: float = DOMAIN_TOL) -> bool:
    return all(float(m.signed_power(x)) <= tol for m in sx.mirrors)


@dataclass(frozen=True)
class CanonicalizeResult:
    point: np.ndarray
    total_reflections: int
    cell_reflections: int
    converged: bool


def _snap(v: float) -> float:
    for exact in (0.0, 0.5, -0.5, 1.0, -1.0):
        if abs(v - exact) < 1e-15:
            return exact
    return v


def _mirror_params(sx: Simplex):
    """Per mirror: ("sphere", center, r^2, sign), ("axial", 2x2 matrix, normal) or ("plane", normal, offset).

    Axial planes contain the z-axis; their reflection matrix is snapped to
    exact entries where possible so symmetric inputs fold to identical bits.
    """
    out = []
    for m in sx.mirrors:
        if isinstance(m, Sphere):
            out.append(("sphere", m.c, m.radius ** 2, 1.0 if m.inside_ball else -1.0))
        elif m.offset == 0.0 and m.n[2] == 0.0:
            nx, ny = m.n[0], m.n[1]
            mat = np.array([[_snap(1 - 2 * nx * nx), _snap(-2 * nx * ny)],
                            [_snap(-2 * nx * ny), _snap(1 - 2 * ny * ny)]])
            out.append(("axial", mat, m.n, 0.0))
        else:
            out.append(("plane", m.n, m.offset, 1.0))
    return out


@np.errstate(divide="ignore", invalid="ignore", over="ignore")
def canonicalize_many(sx: Simplex, pts, max_iter: int = 4000, tol: float = DOMAIN_TOL):
    """Vectorized canonicalization of an (N, 3) array.

    Each step reflects a point in the first mirror (in index order) whose
    inside test fails.  Returns ``(points, total, cell, converged)``.
    """
    pts = np.array(pts, dtype=float, copy=True).reshape(-1, 3)
    n = len(pts)
    total = np.zeros(n, dtype=np.int64)
    cell = np.zeros(n, dtype=np.int64)
    converged = np.zeros(n, dtype=bool)
    params = _mirror_params(sx)

    idx = np.arange(n)
    x, y, z = pts[:, 0].copy(), pts[:, 1].copy(), pts[:, 2].copy()
    t = np.zeros(n, dtype=np.int64)
    c = np.zeros(n, dtype=np.int64)
    it = 0
    while idx.size:
        sel = np.full(idx.size, -1, dtype=np.int8)
        for k in (3, 2, 1, 0):
            kind, a, b, sgn = params[k]
            if kind == "sphere":
                dx, dy, dz = x - a[0], y - a[1], z - a[2]
                f = sgn * ((dx * dx + dy * dy) + dz * dz - b)
            elif kind == "axial":
                f = x * b[0] + y * b[1]
            else:
                f = (x * a[0] + y * a[1]) + z * a[2] - b
            sel[f > tol] = k
        done = sel < 0
        if it >= max_iter:
            done[:] = True
        if done.any():
            di = idx[done]
            pts[di, 0], pts[di, 1], pts[di, 2] = x[done], y[done], z[done]
            total[di], cell[di] = t[done], c[done]
            converged[di] = (sel[done] < 0) & np.isfinite(x[done] + y[done] + z[done])
            keep = ~done
            idx, x, y, z, t, c, sel = idx[keep], x[keep], y[keep], z[keep], t[keep], c[keep], sel[keep]
            if not idx.size:
                break
        for k in range(4):
            mk = sel == k
            if not mk.any():
                continue
            kind, a, b, sgn = params[k]
            xs, ys, zs = x[mk], y[mk], z[mk]
            if kind == "sphere":
                dx, dy, dz = xs - a[0], ys - a[1], zs - a[2]
                f = b / ((dx * dx + dy * dy) + dz * dz)
                x[mk], y[mk], z[mk] = a[0] + f * dx, a[1] + f * dy, a[2] + f * dz
            elif kind == "axial":
                x[mk], y[mk] = a[0, 0] * xs + a[0, 1] * ys, a[1, 0] * xs + a[1, 1] * ys
            else:
                f = 2.0 * (((xs * a[0] + ys * a[1]) + zs * a[2]) - b)
                x[mk], y[mk], z[mk] = xs - f * a[0], ys - f * a[1], zs - f * a[2]
            if k == 3:
                c[mk] += 1
        t += 1
        it += 1
    return pts, total, cell, converged


def canonicalize(sx: Simplex, x, max_iter: int = 4000) -> CanonicalizeResult:
    pts, total, cell, conv = canonicalize_many(sx, np.asarray(x, float)[None, :], max_iter)
    return CanonicalizeResult(pts[0], int(total[0]), int(cell[0]), bool(conv[0]))


def reflect_word(sx: Simplex, x, word) -> np.ndarray:
    """Apply mirrors ``word[0]``, then ``word[1]``, ... to the point ``x``."""
    for k in word:
        x = invert_point(sx.mirrors[k], x)
    return x


def interior_point(sx: Simplex, samples: int = 50000, seed: int = 0) -> np.ndarray:
    """A point well inside the domain, found by maximizing the worst margin.

    Margins are sinh of hyperbolic distance, so scale does not bias the search.
    """
    rng = np.random.default_rng(seed)
    rad = np.exp(rng.uniform(-6, 4, samples))
    if sx.symbol.p == INF:
        x = rng.uniform(-4.0, sx.mirrors[3].offset, samples)
        y = rng.uniform(0.0, 1.0, samples)
    else:
        phi = rng.uniform(0.0, math.pi / sx.symbol.p, samples)
        x, y = rad * np.cos(phi), rad * np.sin(phi)
    z = np.hypot(x, y) * np.exp(rng.uniform(-4, 3, samples))
    pts = np.column_stack([x, y, z])
    margins = np.stack([-_hyperbolic_margin(m, pts) for m in sx.mirrors]).min(axis=0)
    if margins.max() <= 0:
        raise RuntimeError(f"no interior point found for {sx.symbol}")
    return pts[np.argmax(margins)]


def _hyperbolic_margin(m: GeneralizedSphere, pts: np.ndarray) -> np.ndarray:
    """Signed sinh of hyperbolic distance to the mirror (negative inside)."""
    z = pts[:, 2]
    if isinstance(m, Sphere):
        return m.signed_power(pts) / (2.0 * m.radius * z)
    return m.signed_power(pts) / z
