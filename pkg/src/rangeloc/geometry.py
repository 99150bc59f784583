"""Distance-geometry primitives.

Triangle areas are recovered from pairwise distances through the
Cayley-Menger determinant; the coordinate-based shoelace formula is kept
alongside as an oracle for tests and for the scenario generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import CollinearNeighbors, DegenerateInput

# Relative tolerances, normalized by the largest distance involved.
TAU_GEOM = 1e-9
TAU_DEG = 1e-12
TAU_SUM = 1e-9


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def __sub__(self, other: Point2) -> Point2:
        return Point2(self.x - other.x, self.y - other.y)

    def __add__(self, other: Point2) -> Point2:
        return Point2(self.x + other.x, self.y + other.y)

    def scaled(self, s: float) -> Point2:
        return Point2(s * self.x, s * self.y)


def distance(p: Point2, q: Point2) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


@dataclass(frozen=True)
class TriangleDistances:
    d_ab: float
    d_ac: float
    d_bc: float

    def __post_init__(self):
        ds = (self.d_ab, self.d_ac, self.d_bc)
        if not all(math.isfinite(d) and d >= 0 for d in ds):
            raise DegenerateInput(f"distances must be finite and nonnegative, got {ds}")
        a, b, c = sorted(ds, reverse=True)
        if a > b + c + TAU_GEOM * a:
            raise DegenerateInput(f"triangle inequality violated: {ds}")


class BarycentricMagnitudes(NamedTuple):
    m_i: float
    m_j: float
    m_k: float


@dataclass(frozen=True)
class SignedBarycentric:
    """Areal coordinates of a node with respect to three neighbors."""

    coeffs: tuple[float, float, float]
    neighbors: tuple[int, int, int] | None = None

    def __post_init__(self):
        total = math.fsum(self.coeffs)
        scale = max(1.0, sum(abs(a) for a in self.coeffs))
        if abs(total - 1.0) > TAU_SUM * scale:
            raise ValueError(f"coefficients {self.coeffs} sum to {total}, not 1")

    @property
    def signs(self) -> tuple[int, int, int]:
        return tuple(1 if a >= 0 else -1 for a in self.coeffs)

    def combine(self, p_i: Point2, p_j: Point2, p_k: Point2) -> Point2:
        a_i, a_j, a_k = self.coeffs
        return Point2(
            a_i * p_i.x + a_j * p_j.x + a_k * p_k.x,
            a_i * p_i.y + a_j * p_j.y + a_k * p_k.y,
        )


def _squared_area(a: float, b: float, c: float) -> float:
    # Closed-form expansion of the bordered 4x4 Cayley-Menger determinant,
    # evaluated in Kahan's factored order (sides sorted descending) so that
    # needle-shaped triangles keep their relative accuracy.
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c)):
        raise DegenerateInput(f"non-finite distance in ({a}, {b}, {c})")
    if a < 0 or b < 0 or c < 0:
        raise DegenerateInput(f"negative distance in ({a}, {b}, {c})")
    if a < b:
        a, b = b, a
    if b < c:
        b, c = c, b
    if a < b:
        a, b = b, a
    s2 = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c)) / 16.0
    if s2 < 0.0:
        if s2 < -TAU_GEOM * a**4:
            raise DegenerateInput(f"distances ({a}, {b}, {c}) are not realizable in the plane")
        return 0.0
    return s2


def squared_area_cm(t: TriangleDistances) -> float:
    """Squared triangle area from its three side lengths.

    Equals ``-det(CM) / 16`` where ``CM`` is the bordered matrix of squared
    distances. Slightly negative values caused by rounding are clamped to 0.
    """
    return _squared_area(t.d_ab, t.d_ac, t.d_bc)


def signed_area(p_a: Point2, p_b: Point2, p_c: Point2) -> float:
    """Shoelace area of triangle (a, b, c); positive when a is left of b->c."""
    return 0.5 * ((p_b.x - p_a.x) * (p_c.y - p_a.y) - (p_c.x - p_a.x) * (p_b.y - p_a.y))


def barycentric_magnitudes(
    d_li: float, d_lj: float, d_lk: float, d_ij: float, d_ik: float, d_jk: float
) -> BarycentricMagnitudes:
    """Absolute areal coordinates of l with respect to (i, j, k) from distances only."""
    s_ijk = _squared_area(d_ij, d_ik, d_jk)
    scale = max(d_ij, d_ik, d_jk)
    if s_ijk <= TAU_DEG * scale**4:
        raise CollinearNeighbors(
            f"neighbor triangle is degenerate (squared area {s_ijk:.3e})"
        )
    s_ljk = _squared_area(d_lj, d_lk, d_jk)
    s_lki = _squared_area(d_lk, d_li, d_ik)
    s_lij = _squared_area(d_li, d_lj, d_ij)
    return BarycentricMagnitudes(
        math.sqrt(s_ljk / s_ijk), math.sqrt(s_lki / s_ijk), math.sqrt(s_lij / s_ijk)
    )


def areal_from_coordinates(
    p_l: Point2, p_i: Point2, p_j: Point2, p_k: Point2
) -> SignedBarycentric:
    """Signed areal coordinates computed from known positions (test oracle)."""
    s_ijk = signed_area(p_i, p_j, p_k)
    scale = max(distance(p_i, p_j), distance(p_i, p_k), distance(p_j, p_k))
    if s_ijk * s_ijk <= TAU_DEG * scale**4:
        raise CollinearNeighbors("neighbor triangle is degenerate")
    coeffs = (
        signed_area(p_l, p_j, p_k) / s_ijk,
        signed_area(p_l, p_k, p_i) / s_ijk,
        signed_area(p_l, p_i, p_j) / s_ijk,
    )
    try:
        return SignedBarycentric(coeffs)
    except ValueError:
        # Happens only when l is so far away that the areas cancel.
        raise DegenerateInput(f"areal coordinates {coeffs} lost to cancellation") from None
