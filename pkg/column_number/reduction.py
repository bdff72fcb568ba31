"""Reduce a generic Δ-modular two-row matrix to a matrix of type m.

Pipeline: find a direction v of small lattice width for conv(A ∪ −A),
complete v to a unimodular U, flip column signs to a nonnegative first
coordinate, add (0, 1), divide by gcds, and read off per-row ranges.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from math import gcd, isqrt
from typing import Dict, Iterable, Iterator, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from .errors import InternalGuardError, PreconditionError, SearchExhaustedError
from .model import (
    ABSENT,
    ColumnSet,
    TypedMatrix,
    column_count,
    delta_bruteforce,
    delta_endpoints,
    is_generic,
    rank,
)
from .numtheory import PI

logger = logging.getLogger(__name__)


class ThinDirection(BaseModel):
    model_config = ConfigDict(frozen=True)

    v: Tuple[int, int]
    width: int

    @field_validator("v")
    @classmethod
    def _primitive(cls, v: Tuple[int, int]) -> Tuple[int, int]:
        if gcd(*v) != 1:
            raise ValueError(f"direction {v} is not primitive")
        return v


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def width_limit(delta: int) -> int:
    """⌊2πΔ⌋ from the lower enclosure of π; width² ≤ this means width ≤ √(2πΔ)."""
    return _floor(2 * PI.lo * delta)


def type_cap(delta: int) -> int:
    """⌊√(π/2·Δ)⌋"""
    return isqrt(_floor(PI.lo * delta / 2))


def width_in_direction(A: ColumnSet, v: Tuple[int, int]) -> int:
    p, q = v
    if p == 0 and q == 0:
        raise PreconditionError("direction must be nonzero")
    return 2 * max(abs(p * x + q * y) for x, y in A)


def _shell(r: int) -> Iterator[Tuple[int, int]]:
    """Primitive directions of max-norm r, one per ± pair."""
    for p in range(0, r + 1):
        for q in range(-r, r + 1):
            if max(p, abs(q)) != r or (p == 0 and q <= 0):
                continue
            if gcd(p, q) == 1:
                yield p, q


def search_bound(A: ColumnSet, delta: int) -> int:
    """Max-norm bound on any direction of width ≤ √(2πΔ).

    With X = [x₁ x₂] for independent columns, u = Xᵀv has |uᵢ| ≤ width/2,
    so ‖v‖∞ ≤ ‖X⁻ᵀ‖∞·√(2πΔ)/2.
    """

    cols = [c for c in A if c != (0, 0)]
    if not cols:
        raise PreconditionError("column set has no nonzero column")
    x1 = cols[0]
    x2 = max(cols, key=lambda c: abs(x1[0] * c[1] - x1[1] * c[0]))
    det = x1[0] * x2[1] - x1[1] * x2[0]
    if det == 0:
        raise PreconditionError("column set has rank < 2")
    inv_norm = Fraction(max(abs(x2[1]) + abs(x1[1]), abs(x2[0]) + abs(x1[0])), abs(det))
    sqrt_upper = isqrt(_floor(2 * PI.hi * delta)) + 1
    return _floor(inv_norm * sqrt_upper / 2)


def find_thin_direction(A: ColumnSet, delta: int) -> ThinDirection:
    if len(A) < 2 or rank(A) != 2:
        raise PreconditionError("thin-direction search needs a rank-2 column set")
    limit = width_limit(delta)
    bound = search_bound(A, delta)
    for r in range(1, bound + 1):
        for v in _shell(r):
            w = width_in_direction(A, v)
            if w * w <= limit:
                logger.debug("thin direction %s with width %d (shell %d)", v, w, r)
                return ThinDirection(v=v, width=w)
    raise SearchExhaustedError(
        f"no direction with width <= sqrt(2*pi*{delta}) up to max-norm {bound}; "
        "is the input really generic and Δ-modular?"
    )


def _egcd(a: int, b: int) -> Tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        qt = a // b
        a, b = b, a - qt * b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def unimodular_completion(v: Tuple[int, int]) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """U with first row v and det U = 1."""

    p, q = v
    g, x, y = _egcd(p, q)
    if g != 1:
        raise PreconditionError(f"direction {v} is not primitive")
    return (p, q), (-y, x)


def reduce(A: ColumnSet, delta: int) -> TypedMatrix:
    """Map A to a type-m matrix with at least |A| columns and Δ(M) ≤ Δ."""

    if delta < 2:
        raise PreconditionError("reduction is defined for Δ >= 2")
    if len(A) < 2:
        raise PreconditionError("need at least two columns")
    if rank(A) != 2:
        raise PreconditionError("input matrix must have rank 2")
    if not is_generic(A):
        raise PreconditionError("input matrix is not generic")
    actual = delta_bruteforce(A)
    if actual > delta:
        raise PreconditionError(f"input has Δ(A) = {actual} > {delta}")

    thin = find_thin_direction(A, delta)
    (p, q), (r, s) = unimodular_completion(thin.v)

    reduced = set()
    for x, y in A:
        c0, c1 = p * x + q * y, r * x + s * y
        if c0 < 0 or (c0 == 0 and c1 < 0):
            c0, c1 = -c0, -c1
        g = gcd(c0, c1)
        reduced.add((c0 // g, c1 // g))
    reduced.add((0, 1))
    if len(reduced) < len(A):
        raise InternalGuardError("distinct input columns collided during reduction")

    m = max(c0 for c0, _ in reduced)
    if m < 1 or m > type_cap(delta):
        raise InternalGuardError(f"reduced type m={m} exceeds the cap {type_cap(delta)}")
    ranges: Dict[int, List[int]] = {}
    for c0, c1 in reduced:
        if c0 > 0:
            ranges.setdefault(c0, []).append(c1)
    a = tuple(min(ranges[k]) if k in ranges else ABSENT[0] for k in range(1, m + 1))
    b = tuple(max(ranges[k]) if k in ranges else ABSENT[1] for k in range(1, m + 1))
    M = TypedMatrix(m=m, a=a, b=b)

    if delta_endpoints(M) > delta:
        raise InternalGuardError("reduced matrix is not Δ-submodular")
    count = column_count(M)
    if count < len(A):
        raise InternalGuardError(f"reduced matrix lost columns ({count} < {len(A)})")
    logger.info("reduced %d columns to type %d with %d columns (v=%s)", len(A), m, count, thin.v)
    return M


def random_unimodular(rng: np.random.Generator, bound: int = 10) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Rejection-sample U with entries in [-bound, bound] and det U = ±1."""

    while True:
        p, q, r, s = (int(v) for v in rng.integers(-bound, bound + 1, size=4))
        if abs(p * s - q * r) == 1:
            return (p, q), (r, s)


def transform(A: ColumnSet, U: Tuple[Tuple[int, int], Tuple[int, int]], flips: Iterable[bool]) -> ColumnSet:
    """U·x for every column x, negating the columns whose flip is set."""

    (p, q), (r, s) = U
    out = []
    for (x, y), flip in zip(A, flips):
        c = (p * x + q * y, r * x + s * y)
        out.append((-c[0], -c[1]) if flip else c)
    return ColumnSet.from_pairs(out)
