"""Schläfli symbols {p,q,r}: parsing, duality and classification.

Terms are plain ints (>= 3) or ``math.inf``.  Trig of pi/inf is taken as
its limit so infinite terms never go through floating point division.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Union

INF = math.inf

Term = Union[int, float]  # int >= 3, or INF

EUCLIDEAN_TOL = 1e-12


class SchlafliError(ValueError):
    pass


class MalformedSymbol(SchlafliError):
    pass


class TermOutOfRange(SchlafliError):
    pass


class NotAPolyhedron(ValueError):
    pass


class Geometry(enum.Enum):
    SPHERICAL = "spherical"
    EUCLIDEAN = "euclidean"
    HYPERBOLIC = "hyperbolic"


class ElementType(enum.Enum):
    MATERIAL = "material"
    IDEAL = "ideal"
    HYPERIDEAL = "hyperideal"


def sin_pi_over(n: Term) -> float:
    return 0.0 if n == INF else math.sin(math.pi / n)


def cos_pi_over(n: Term) -> float:
    return 1.0 if n == INF else math.cos(math.pi / n)


def term_str(n: Term, compact: bool = False) -> str:
    if n == INF:
        return "i" if compact else "inf"
    return str(n)


@dataclass(frozen=True)
class SchlafliSymbol:
    p: Term
    q: Term
    r: Term
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        for t in (self.p, self.q, self.r):
            _check_term(t)

    @property
    def terms(self) -> tuple[Term, Term, Term]:
        return (self.p, self.q, self.r)

    def dual(self) -> "SchlafliSymbol":
        return SchlafliSymbol(self.r, self.q, self.p)

    @property
    def has_infinite_term(self) -> bool:
        return INF in self.terms

    def filename_stem(self) -> str:
        """``437``, ``73i`` ... with ``i`` for infinity."""
        return "".join(term_str(t, compact=True) for t in self.terms)

    def __str__(self) -> str:
        return "{" + ",".join(term_str(t) for t in self.terms) + "}"


def _check_term(t) -> None:
    if t == INF:
        return
    if isinstance(t, bool) or not isinstance(t, int):
        raise MalformedSymbol(f"term {t!r} is not an integer or infinity")
    if t < 3:
        raise TermOutOfRange(f"term {t} must be >= 3")


_INF_TOKENS = {"i", "inf", "∞", "infinity"}


def parse_term(tok: str) -> Term:
    tok = tok.strip().lower()
    if tok in _INF_TOKENS:
        return INF
    if not re.fullmatch(r"[+-]?\d+", tok):
        raise MalformedSymbol(f"bad term {tok!r}")
    n = int(tok)
    if n < 3:
        raise TermOutOfRange(f"term {n} must be >= 3")
    return n


def parse_terms(text: str) -> list[Term]:
    """Parse a symbol of any rank; used by :func:`parse` and the 2D helper."""
    s = re.sub(r"\s+", "", text)
    if not s:
        raise MalformedSymbol("empty symbol")
    if s.startswith("{") or s.endswith("}"):
        if not (s.startswith("{") and s.endswith("}")):
            raise MalformedSymbol(f"unbalanced braces in {text!r}")
        s = s[1:-1]
        parts = s.split(",")
    elif "," in s:
        parts = s.split(",")
    elif "-" in s:
        parts = s.split("-")
    else:
        parts = [s]
    if any(p == "" for p in parts):
        raise MalformedSymbol(f"empty term in {text!r}")
    return [parse_term(p) for p in parts]


def parse(text: str) -> SchlafliSymbol:
    """Parse ``{p,q,r}``, ``p,q,r`` or ``p-q-r``; terms may be ``i``/``inf``/``∞``."""
    terms = parse_terms(text)
    if len(terms) != 3:
        raise MalformedSymbol(f"expected 3 terms, got {len(terms)} in {text!r}")
    return SchlafliSymbol(*terms, source=text)


def _defect(a: Term, b: Term):
    """(a-2)(b-2), INF when either term is infinite."""
    if a == INF or b == INF:
        return INF
    return (a - 2) * (b - 2)


def classify_2d(p: Term, q: Term) -> Geometry:
    d = _defect(p, q)
    if d < 4:
        return Geometry.SPHERICAL
    if d == 4:
        return Geometry.EUCLIDEAN
    return Geometry.HYPERBOLIC


def classify_3d(s: SchlafliSymbol) -> Geometry:
    # any infinite term: cos(pi/q) > sin(pi/p) sin(pi/r) holds in the limit
    if s.has_infinite_term:
        return Geometry.HYPERBOLIC
    lhs = math.cos(math.pi / s.q)
    rhs = math.sin(math.pi / s.p) * math.sin(math.pi / s.r)
    if abs(lhs - rhs) <= EUCLIDEAN_TOL:
        return Geometry.EUCLIDEAN
    return Geometry.SPHERICAL if lhs < rhs else Geometry.HYPERBOLIC


def _element_type(a: Term, b: Term) -> ElementType:
    d = _defect(a, b)
    if d < 4:
        return ElementType.MATERIAL
    if d == 4:
        return ElementType.IDEAL
    return ElementType.HYPERIDEAL


def vertex_type(s: SchlafliSymbol) -> ElementType:
    """Type of the vertices, read off the vertex figure {q,r}."""
    return _element_type(s.q, s.r)


def cell_type(s: SchlafliSymbol) -> ElementType:
    """Type of the cells, read off the cell {p,q}."""
    return _element_type(s.p, s.q)


def dihedral_angle(p: Term, q: Term) -> float:
    """Dihedral angle of the euclidean polyhedron {p,q}."""
    if classify_2d(p, q) is Geometry.HYPERBOLIC:
        raise NotAPolyhedron(f"{{{term_str(p)},{term_str(q)}}} tiles the hyperbolic plane")
    arg = cos_pi_over(q) / sin_pi_over(p)
    return 2.0 * math.asin(min(arg, 1.0))


def all_symbols(lo: int = 3, hi: int = 9):
    rng = range(lo, hi + 1)
    for p in rng:
        for q in rng:
            for r in rng:
                yield SchlafliSymbol(p, q, r)
