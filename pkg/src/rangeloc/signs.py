"""Sign patterns of areal coordinates from range measurements alone.

The magnitudes |a_li|, |a_lj|, |a_lk| follow from distances, but their signs
do not. Because areal coordinates sum to one, the signs are usually pinned by

    s_i |a_li| + s_j |a_lj| + s_k |a_lk| = 1.

Two situations leave this equation with several solutions: a vanishing
magnitude (l lies on the line through an edge of the neighbor triangle), and
the case |a_li| = 1 with |a_lj| = |a_lk|. The first is settled by comparing
the two remaining magnitudes, the second by distance tests that tell the
parallelogram point apart from the two points on the parallel through i.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    AmbiguousZeroCase,
    InconsistentMagnitudes,
    NotAmbiguous,
    NotZeroCase,
    UnresolvableAmbiguity,
)
from .geometry import BarycentricMagnitudes, SignedBarycentric, barycentric_magnitudes

TAU_ZERO = 1e-9
TAU_AMB = 1e-6
TAU_LEM = 1e-6

SignPattern = tuple[int, int, int]

# Every sign triple except (-1, -1, -1), which can never sum to +1.
PATTERNS: tuple[SignPattern, ...] = tuple(
    p for p in itertools.product((1, -1), repeat=3) if p != (-1, -1, -1)
)


def sign_tolerance(m) -> float:
    return 1e-6 * max(1.0, m[0] + m[1] + m[2])


@dataclass(frozen=True)
class QuadDistances:
    """The six distances among a node l and its neighbors i, j, k."""

    d_li: float
    d_lj: float
    d_lk: float
    d_ij: float
    d_ik: float
    d_jk: float

    def __post_init__(self):
        for name, value in zip(
            ("d_li", "d_lj", "d_lk", "d_ij", "d_ik", "d_jk"), self.astuple()
        ):
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")

    def astuple(self) -> tuple[float, ...]:
        return (self.d_li, self.d_lj, self.d_lk, self.d_ij, self.d_ik, self.d_jk)

    def magnitudes(self) -> BarycentricMagnitudes:
        return barycentric_magnitudes(*self.astuple())

    def to_l(self, u: int) -> float:
        return (self.d_li, self.d_lj, self.d_lk)[u]

    def between(self, u: int, v: int) -> float:
        if u == v:
            return 0.0
        return {
            frozenset((0, 1)): self.d_ij,
            frozenset((0, 2)): self.d_ik,
            frozenset((1, 2)): self.d_jk,
        }[frozenset((u, v))]

    def permuted(self, perm: tuple[int, int, int]) -> QuadDistances:
        """Relabel so that new role r is played by old neighbor ``perm[r]``."""
        a, b, c = perm
        return QuadDistances(
            self.to_l(a), self.to_l(b), self.to_l(c),
            self.between(a, b), self.between(a, c), self.between(b, c),
        )


def enumerate_feasible_patterns(m) -> list[SignPattern]:
    """All admissible sign patterns whose signed magnitudes sum to one."""
    tol = sign_tolerance(m)
    feasible = [
        p for p in PATTERNS
        if abs(p[0] * m[0] + p[1] * m[1] + p[2] * m[2] - 1.0) <= tol
    ]
    if not feasible:
        raise InconsistentMagnitudes(f"no sign pattern fits magnitudes {tuple(m)}")
    return feasible


def _with_zero_first(u: int) -> tuple[int, int, int]:
    return (u,) + tuple(v for v in range(3) if v != u)


def _unpermute(pattern_in_roles, perm) -> SignPattern:
    out = [0, 0, 0]
    for role, original in enumerate(perm):
        out[original] = pattern_in_roles[role]
    return tuple(out)


def resolve_zero_case(m) -> SignPattern:
    """Signs when exactly one magnitude vanishes (l on an edge line).

    The vanishing coefficient gets sign +1. The other two are both positive
    when both magnitudes are below one; otherwise the larger one is positive
    and the smaller negative.
    """
    zeros = [u for u in range(3) if m[u] <= TAU_ZERO]
    if len(zeros) != 1 or any(m[u] <= 0 for u in range(3) if u != zeros[0]):
        raise NotZeroCase(f"expected exactly one vanishing magnitude, got {tuple(m)}")
    return _zero_case(m, zeros[0])


def _zero_case(m, zero: int) -> SignPattern:
    perm = _with_zero_first(zero)
    mj, mk = m[perm[1]], m[perm[2]]
    tol = sign_tolerance(m)
    # Each inequality must hold by more than tol to count as decided.
    if mj < 1 - tol and mk < 1 - tol:
        pattern = (1, 1, 1)
    elif mj > 1 + tol and mj > mk + tol:
        pattern = (1, 1, -1)
    elif mk > 1 + tol and mk > mj + tol:
        pattern = (1, -1, 1)
    else:
        raise AmbiguousZeroCase(f"magnitudes {tuple(m)} match no zero-case branch")
    return _unpermute(pattern, perm)


def _unit_candidates(m, tau: float) -> list[int]:
    return [
        u for u in range(3)
        if abs(m[u] - 1.0) <= tau
        and abs(m[(u + 1) % 3] - m[(u + 2) % 3]) <= tau
    ]


def is_ambiguous(m) -> bool:
    """True when one magnitude is one and the other two coincide."""
    return bool(_unit_candidates(m, TAU_AMB))


def _close(x: float, y: float, scale: float) -> bool:
    return abs(x - y) <= TAU_LEM * scale


def _is_parallelogram_apex(q: QuadDistances) -> bool:
    # l = j + k - i: opposite sides equal and the parallelogram law on the diagonal.
    scale = max(q.astuple())
    return (
        _close(q.d_lj, q.d_ik, scale)
        and _close(q.d_lk, q.d_ij, scale)
        and _close(q.d_li**2, 2 * q.d_ij**2 + 2 * q.d_ik**2 - q.d_jk**2, scale**2)
    )


class AmbiguityResult(NamedTuple):
    pattern: SignPattern
    case: int


def _ambiguity_tests(q: QuadDistances, unit: int) -> AmbiguityResult:
    """Distance tests for the ambiguous case, with ``unit`` the |a| = 1 neighbor."""
    perm = _with_zero_first(unit)
    r = q.permuted(perm)
    # The tests need the angle at j acute. Take the smaller of the angles at
    # j and k (opposite the shorter side): it is always acute, and a right
    # angle never sits on the boundary of this choice.
    if r.d_ik > r.d_ij:
        perm = (perm[0], perm[2], perm[1])
        r = q.permuted(perm)
    if _is_parallelogram_apex(r):
        return AmbiguityResult(_unpermute((-1, 1, 1), perm), 1)
    lhs = r.d_lj**2
    rhs = r.d_ij**2 + r.d_li**2
    if _close(lhs, rhs, max(r.astuple()) ** 2):
        raise UnresolvableAmbiguity(
            f"d_jl^2 = {lhs!r} is indistinguishable from d_ij^2 + d_il^2 = {rhs!r}"
        )
    if lhs < rhs:
        return AmbiguityResult(_unpermute((1, 1, -1), perm), 3)
    return AmbiguityResult(_unpermute((1, -1, 1), perm), 4)


def _pick_unit(q: QuadDistances, m, candidates: list[int]) -> int:
    # When several neighbors could play the unit role (e.g. all magnitudes
    # equal one), prefer the one for which l is the parallelogram apex.
    for u in candidates:
        if _is_parallelogram_apex(q.permuted(_with_zero_first(u))):
            return u
    return candidates[0]


def resolve_ambiguous(q: QuadDistances) -> SignPattern:
    m = q.magnitudes()
    candidates = sorted(_unit_candidates(m, TAU_AMB), key=lambda u: abs(m[u] - 1.0))
    if not candidates:
        raise NotAmbiguous(f"magnitudes {tuple(m)} admit a unique sign pattern")
    return _ambiguity_tests(q, _pick_unit(q, m, candidates)).pattern


class Resolution(NamedTuple):
    barycentric: SignedBarycentric
    pattern: SignPattern
    branch: str


def _renormalize(coeffs: list[float]) -> tuple[float, float, float]:
    total = coeffs[0] + coeffs[1] + coeffs[2]
    out = [c / total for c in coeffs]
    # Push the last rounding residue into the largest coefficient.
    big = max(range(3), key=lambda u: abs(out[u]))
    out[big] += 1.0 - math.fsum(out)
    return tuple(out)


def resolve_with_branch(
    q: QuadDistances, neighbors: tuple[int, int, int] | None = None
) -> Resolution:
    """Full sign resolution, also reporting which rule decided the pattern."""
    m = q.magnitudes()
    tol = sign_tolerance(m)
    small = [u for u in range(3) if m[u] <= tol]
    if len(small) >= 2:
        # l coincides with a neighbor.
        rest = [u for u in range(3) if u not in small]
        if not rest:
            raise InconsistentMagnitudes(f"all magnitudes vanish: {tuple(m)}")
        big = rest[0]
        coeffs = [0.0, 0.0, 0.0]
        coeffs[big] = 1.0
        pattern = (1, 1, 1)
        return Resolution(SignedBarycentric(tuple(coeffs), neighbors), pattern, "coincident")

    feasible = enumerate_feasible_patterns(m)
    if len(feasible) == 1:
        pattern, branch = feasible[0], "unique"
    elif len(small) == 1:
        # A magnitude below the sum tolerance has no recoverable sign.
        pattern, branch = _zero_case(m, small[0]), "zero case"
    else:
        # Several patterns fit: pick the neighbor closest to the unit role.
        order = sorted(range(3), key=lambda u: abs(m[u] - 1.0))
        candidates = [u for u in order if u in _unit_candidates(m, TAU_AMB)] or order[:1]
        pattern, case = _ambiguity_tests(q, _pick_unit(q, m, candidates))
        branch = f"Lemma 2 case {case}"
    coeffs = _renormalize([pattern[u] * m[u] for u in range(3)])
    return Resolution(SignedBarycentric(coeffs, neighbors), pattern, branch)


def resolve_sign_pattern(
    q: QuadDistances, neighbors: tuple[int, int, int] | None = None
) -> SignedBarycentric:
    """Signed areal coordinates of l from the six distances of ``q``."""
    return resolve_with_branch(q, neighbors).barycentric
