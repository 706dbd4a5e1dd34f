"""Generalized spheres and sphere inversion in conformal models of H^3.

A mirror is either a :class:`Sphere` or a :class:`Plane`.  Both carry an
orientation: ``Sphere.inside_ball`` says whether the ball or its complement
is the inside, and a plane's inside is ``normal . x < offset`` (so the
normal points outward).

Two models are used: the Poincare ball (unit ball) and the upper half space
(``z > 0``).  They are related by the inversion in the sphere of radius
sqrt(2) about the north pole followed by ``z -> -z``; the ball origin goes
to ``(0, 0, 1)`` and the south pole to the uhs origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

PLANE_RADIUS = 1e7
UNIT_TOL = 1e-12


class Disjoint(ValueError):
    """Two generalized spheres that do not meet have no dihedral angle."""


class DegenerateArc(ValueError):
    pass


class _PointAtInfinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_PointAtInfinity, ())


INFINITY = _PointAtInfinity()


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float
    inside_ball: bool = True

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")

    @property
    def c(self) -> np.ndarray:
        return np.array(self.center)

    def flipped(self) -> "Sphere":
        return Sphere(self.center, self.radius, not self.inside_ball)

    def signed_power(self, x) -> np.ndarray:
        """Negative strictly inside, zero on the sphere (vectorized over rows)."""
        d = _vec(x) - self.c
        p = np.sum(d * d, axis=-1) - self.radius ** 2
        return p if self.inside_ball else -p


@dataclass(frozen=True)
class Plane:
    normal: tuple
    offset: float

    def __post_init__(self):
        n = tuple(float(c) for c in self.normal)
        if abs(math.sqrt(sum(c * c for c in n)) - 1.0) > UNIT_TOL:
            raise ValueError("plane normal must be a unit vector")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_normal(cls, normal, offset: float = 0.0) -> "Plane":
        """Normalize ``normal``; ``offset`` is the signed distance along the unit normal."""
        n = _vec(normal)
        return cls(tuple(n / np.linalg.norm(n)), offset)

    @classmethod
    def through(cls, normal, point) -> "Plane":
        n = _vec(normal)
        n = n / np.linalg.norm(n)
        return cls(tuple(n), float(n @ _vec(point)))

    @property
    def n(self) -> np.ndarray:
        return np.array(self.normal)

    def flipped(self) -> "Plane":
        return Plane(tuple(-c for c in self.normal), -self.offset)

    def signed_power(self, x) -> np.ndarray:
        return _vec(x) @ self.n - self.offset


GeneralizedSphere = Union[Sphere, Plane]


def contains(m: GeneralizedSphere, x, tol: float = 1e-12) -> bool:
    """Closed inside test."""
    return bool(m.signed_power(x) <= tol)


def invert_point(m: GeneralizedSphere, x):
    if x is INFINITY:
        return INFINITY if isinstance(m, Plane) else m.c
    x = _vec(x)
    if isinstance(m, Plane):
        return x - 2.0 * (x @ m.n - m.offset) * m.n
    d = x - m.c
    dd = d @ d
    if dd == 0.0:
        return INFINITY
    return m.c + (m.radius ** 2 / dd) * d


def invert_points(m: GeneralizedSphere, pts: np.ndarray) -> np.ndarray:
    """Vectorized :func:`invert_point` for an (N, 3) array (no infinity handling)."""
    pts = _vec(pts)
    if isinstance(m, Plane):
        return pts - 2.0 * (pts @ m.n - m.offset)[..., None] * m.n
    d = pts - m.c
    dd = np.sum(d * d, axis=-1)
    return m.c + (m.radius ** 2 / dd)[..., None] * d


def _perp_basis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = axis / np.linalg.norm(axis)
    helper = np.eye(3)[np.argmin(np.abs(a))]
    e1 = np.cross(a, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(a, e1)


def _probe(s: GeneralizedSphere, avoid: np.ndarray | None) -> np.ndarray:
    """A point strictly inside ``s`` kept well away from ``avoid``."""
    if isinstance(s, Plane):
        base = s.offset * s.n - s.n
        e1, e2 = _perp_basis(s.n)
        cands = [base + k * e for k in (0.0, 1.0, -1.0) for e in (e1, e2)]
    else:
        c, r = s.c, s.radius
        if s.inside_ball:
            cands = [c] + [c + 0.5 * r * sgn * e for e in np.eye(3) for sgn in (1, -1)]
        else:
            cands = [c + 2.0 * r * sgn * e for e in np.eye(3) for sgn in (1, -1)]
    if avoid is None:
        return cands[0]
    return max(cands, key=lambda p: np.linalg.norm(p - avoid))


def _orient_like(img: GeneralizedSphere, m: GeneralizedSphere, s: GeneralizedSphere) -> GeneralizedSphere:
    avoid = m.c if isinstance(m, Sphere) else None
    probe = invert_point(m, _probe(s, avoid))
    return img if img.signed_power(probe) < 0 else img.flipped()


def _plane_through(p0, p1, p2) -> Plane:
    n = np.cross(p1 - p0, p2 - p0)
    return Plane.through(n, p0)


def invert_sphere(m: GeneralizedSphere, s: GeneralizedSphere) -> GeneralizedSphere:
    """Image of ``s`` under inversion in ``m``, orientation carried along."""
    if isinstance(m, Plane):
        if isinstance(s, Sphere):
            return Sphere(tuple(invert_point(m, s.c)), s.radius, s.inside_ball)
        n = s.n - 2.0 * (s.n @ m.n) * m.n
        p0 = invert_point(m, s.offset * s.n)
        return Plane(tuple(n / np.linalg.norm(n)), float(n @ p0 / np.linalg.norm(n)))

    c, R2 = m.c, m.radius ** 2
    if isinstance(s, Plane):
        delta = s.n @ c - s.offset
        if abs(delta) * PLANE_RADIUS <= R2 * 0.5:
            if abs(delta) <= 1e-15 * max(1.0, abs(s.offset)):
                return _orient_like(s, m, s)
            # image sphere radius would exceed the plane threshold
            e1, e2 = _perp_basis(s.n)
            foot = c - delta * s.n
            pts = [invert_point(m, foot + 10.0 * v) for v in (e1, e2, -e1)]
            return _orient_like(_plane_through(*pts), m, s)
        img = Sphere(tuple(c - (R2 / (2.0 * delta)) * s.n), R2 / (2.0 * abs(delta)))
        return _orient_like(img, m, s)

    d = s.c - c
    dd = d @ d
    denom = dd - s.radius ** 2
    if denom == 0.0 or R2 * s.radius / abs(denom) > PLANE_RADIUS:
        axis = d if dd > 0 else np.array([0.0, 0.0, 1.0])
        e1, e2 = _perp_basis(axis)
        pts = [invert_point(m, s.c + s.radius * v) for v in (e1, e2, -e1)]
        return _orient_like(_plane_through(*pts), m, s)
    img = Sphere(tuple(c + (R2 / denom) * d), R2 * s.radius / abs(denom))
    return _orient_like(img, m, s)


def normal_cosine(a: GeneralizedSphere, b: GeneralizedSphere) -> float:
    """Cosine of the angle between outward normals where ``a`` and ``b`` meet.

    Magnitude above 1 means the surfaces are disjoint; exactly -1 or 1 means
    tangency.
    """
    if isinstance(a, Plane) and isinstance(b, Plane):
        return float(a.n @ b.n)
    if isinstance(a, Plane):
        a, b = b, a
    sa = 1.0 if a.inside_ball else -1.0
    if isinstance(b, Plane):
        return sa * float(b.offset - b.n @ a.c) / a.radius
    sb = 1.0 if b.inside_ball else -1.0
    d = a.c - b.c
    return sa * sb * (a.radius ** 2 + b.radius ** 2 - d @ d) / (2.0 * a.radius * b.radius)


def dihedral(a: GeneralizedSphere, b: GeneralizedSphere, tol: float = 1e-12) -> float:
    """Angle in [0, pi] between the outward normals of ``a`` and ``b``."""
    cs = normal_cosine(a, b)
    if abs(cs) > 1.0 + tol:
        raise Disjoint(f"surfaces do not meet (cos = {cs})")
    return math.acos(max(-1.0, min(1.0, cs)))


def interior_angle(a: GeneralizedSphere, b: GeneralizedSphere, tol: float = 1e-12) -> float:
    """Opening angle of the region inside both ``a`` and ``b``."""
    return math.pi - dihedral(a, b, tol)


# --- model conversions -----------------------------------------------------

_NORTH_INV = Sphere((0.0, 0.0, 1.0), math.sqrt(2.0))
_FLIP_Z = Plane((0.0, 0.0, 1.0), 0.0)
BALL_TO_UHS = (_NORTH_INV, _FLIP_Z)
UHS_TO_BALL = (_FLIP_Z, _NORTH_INV)


def _chain_point(chain, x):
    for m in chain:
        x = invert_point(m, x)
    return x


def ball_to_uhs(x):
    return _chain_point(BALL_TO_UHS, x)


def uhs_to_ball(x):
    return _chain_point(UHS_TO_BALL, x)


def ball_to_uhs_points(pts: np.ndarray) -> np.ndarray:
    for m in BALL_TO_UHS:
        pts = invert_points(m, pts)
    return pts


def uhs_to_ball_points(pts: np.ndarray) -> np.ndarray:
    for m in UHS_TO_BALL:
        pts = invert_points(m, pts)
    return pts


def uhs_to_ball_sphere(s: GeneralizedSphere) -> GeneralizedSphere:
    for m in UHS_TO_BALL:
        s = invert_sphere(m, s)
    return s


def poincare_to_klein(x) -> np.ndarray:
    x = _vec(x)
    return 2.0 * x / (1.0 + np.sum(x * x, axis=-1, keepdims=x.ndim > 1))


# --- hyperbolic metric in the ball ----------------------------------------

def ball_distance(x, y) -> np.ndarray:
    x, y = _vec(x), _vec(y)
    num = 2.0 * np.sum((x - y) ** 2, axis=-1)
    den = (1.0 - np.sum(x * x, axis=-1)) * (1.0 - np.sum(y * y, axis=-1))
    return np.arccosh(1.0 + num / den)


def mobius_to_origin(a, x) -> np.ndarray:
    """Ball isometry sending ``a`` to the origin (inverse: ``mobius_to_origin(-a, .)``)."""
    a, x = _vec(a), _vec(x)
    aa = a @ a
    xx = np.sum(x * x, axis=-1, keepdims=x.ndim > 1)
    ax = (x @ a)[..., None] if x.ndim > 1 else x @ a
    num = (1.0 - aa) * (x - a) - (xx - 2.0 * ax + aa) * a
    return num / (1.0 - 2.0 * ax + aa * xx)


@dataclass(frozen=True)
class HypSphere:
    center_h: tuple
    radius_h: float

    def __post_init__(self):
        object.__setattr__(self, "center_h", tuple(float(c) for c in self.center_h))
        if not np.linalg.norm(self.center_h) < 1.0:
            raise ValueError("hyperbolic center must lie inside the unit ball")
        if not self.radius_h > 0:
            raise ValueError("hyperbolic radius must be positive")


def hyp_sphere_to_euclidean(h: HypSphere) -> tuple[np.ndarray, float]:
    p = np.array(h.center_h)
    r0 = math.tanh(h.radius_h / 2.0)
    d2 = p @ p
    den = d2 * r0 * r0 - 1.0
    return p * (r0 * r0 - 1.0) / den, r0 * (d2 - 1.0) / den


# --- geodesics ------------------------------------------------------------

def _circle_through(a, b, c):
    """Center and radius of the circle through three points in R^3."""
    u, v = b - a, c - a
    w = np.cross(u, v)
    ww = w @ w
    if ww < 1e-24 * (u @ u) * (v @ v):
        return None
    center = a + (np.cross(w, u) * (v @ v) + np.cross(v, w) * (u @ u)) / (2.0 * ww)
    return center, float(np.linalg.norm(center - a))


def geodesic_arc(a, b, n: int, ideal_tol: float = 1e-12) -> np.ndarray:
    """``n + 1`` samples of the ball geodesic from ``a`` to ``b``.

    Material endpoints give equal hyperbolic spacing; when an endpoint is
    ideal the arc is sampled uniformly in angle about the geodesic's circle.
    """
    a, b = _vec(a), _vec(b)
    if n < 1:
        raise ValueError("n must be positive")
    if np.linalg.norm(a - b) == 0.0:
        raise DegenerateArc("endpoints coincide")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1.0 - ideal_tol and nb < 1.0 - ideal_tol:
        bp = mobius_to_origin(a, b)
        L = 2.0 * math.atanh(np.linalg.norm(bp))
        u = bp / np.linalg.norm(bp)
        s = np.linspace(0.0, L, n + 1)
        pts = mobius_to_origin(-a, np.tanh(s / 2.0)[:, None] * u)
        pts[0], pts[-1] = a, b
        return pts
    # at least one ideal endpoint: the inverse of an interior endpoint is a
    # third point on the circle; with both ideal the center is the chord's pole
    if na < 1.0 - ideal_tol:
        circ = _circle_through(a, b, a / (na * na)) if na > 0 else None
    elif nb < 1.0 - ideal_tol:
        circ = _circle_through(a, b, b / (nb * nb)) if nb > 0 else None
    elif abs(1.0 + a @ b) < 1e-15:
        circ = None
    else:
        center = (a + b) / (1.0 + a @ b)
        circ = (center, float(np.linalg.norm(center - a)))
        if circ[1] > PLANE_RADIUS:
            circ = None
    t = np.linspace(0.0, 1.0, n + 1)[:, None]
    if circ is None:
        return a + t * (b - a)
    center, rad = circ
    ua, ub = (a - center) / rad, (b - center) / rad
    ang = math.acos(max(-1.0, min(1.0, ua @ ub)))
    perp = ub - (ua @ ub) * ua
    perp /= np.linalg.norm(perp)
    th = t * ang
    pts = center + rad * (np.cos(th) * ua + np.sin(th) * perp)
    pts[0], pts[-1] = a, b
    return pts


def geodesic_circle(a, b):
    """Center and radius of the circle carrying the ball geodesic through ``a``, ``b``.

    Returns ``None`` for diameters.  Independent of :func:`geodesic_arc`: it
    uses that the circle is orthogonal to the unit sphere, i.e. |c|^2 = 1 + rho^2.
    """
    a, b = _vec(a), _vec(b)
    # c . a = (1 + |a|^2) / 2 and c . b = (1 + |b|^2) / 2, c in span(a, b)
    M = np.array([[a @ a, a @ b], [a @ b, b @ b]])
    if abs(np.linalg.det(M)) < 1e-14 * max(1.0, np.abs(M).max()) ** 2:
        return None
    rhs = np.array([(1 + a @ a) / 2, (1 + b @ b) / 2])
    alpha, beta = np.linalg.solve(M, rhs)
    c = alpha * a + beta * b
    return c, math.sqrt(c @ c - 1.0)
