"""Matrices of type m, explicit column sets, Δ and genericity predicates.

A ``TypedMatrix`` M(a, b) stands for the two-row matrix whose columns are
(0, 1) and every (k, j) with a_k ≤ j ≤ b_k and gcd(j, k) = 1. A row with
a_k > b_k has no columns; the canonical encoding of an absent row is
a_k = 1, b_k = 0.
"""

from __future__ import annotations

import json
from enum import Enum
from math import gcd
from typing import Iterable, Iterator, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import PreconditionError
from .numtheory import phi_interval

Column = Tuple[int, int]
ABSENT: Tuple[int, int] = (1, 0)


class TypedMatrix(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1)
    a: Tuple[int, ...]
    b: Tuple[int, ...]

    @model_validator(mode="after")
    def _lengths(self) -> "TypedMatrix":
        if len(self.a) != self.m or len(self.b) != self.m:
            raise ValueError(f"a and b must have exactly m={self.m} entries")
        return self

    def rows(self) -> Iterator[Tuple[int, int, int]]:
        """(k, a_k, b_k) for k = 1..m."""
        for k, (lo, hi) in enumerate(zip(self.a, self.b), start=1):
            yield k, lo, hi

    def present(self) -> List[int]:
        return [k for k, lo, hi in self.rows() if lo <= hi]


class ColumnSet(BaseModel):
    """Pairwise distinct integer columns, stored sorted."""

    model_config = ConfigDict(frozen=True)

    columns: Tuple[Column, ...]

    @field_validator("columns")
    @classmethod
    def _distinct(cls, cols: Tuple[Column, ...]) -> Tuple[Column, ...]:
        ordered = tuple(sorted((int(x), int(y)) for x, y in cols))
        for prev, cur in zip(ordered, ordered[1:]):
            if prev == cur:
                raise ValueError(f"duplicate column {cur}")
        return ordered

    @classmethod
    def from_pairs(cls, pairs: Iterable[Column]) -> "ColumnSet":
        return cls(columns=tuple(pairs))

    @classmethod
    def from_json(cls, text: str) -> "ColumnSet":
        data = json.loads(text)
        if isinstance(data, dict):
            data = data.get("columns", [])
        return cls.from_pairs((int(x), int(y)) for x, y in data)

    def to_json(self) -> str:
        return json.dumps([list(c) for c in self.columns])

    def __len__(self) -> int:
        return len(self.columns)

    def __iter__(self):
        return iter(self.columns)

    def __contains__(self, col) -> bool:
        return tuple(col) in set(self.columns)


class FamilyKind(str, Enum):
    F1 = "F1"
    F2 = "F2"
    F3 = "F3"


# ---------------------------------------------------------------------------
# Columns and counts
# ---------------------------------------------------------------------------


def enumerate_columns(M: TypedMatrix) -> ColumnSet:
    cols: List[Column] = [(0, 1)]
    for k, lo, hi in M.rows():
        cols.extend((k, j) for j in range(lo, hi + 1) if gcd(j, k) == 1)
    return ColumnSet.from_pairs(cols)


def column_count(M: TypedMatrix) -> int:
    return 1 + sum(phi_interval(lo, hi, k) for k, lo, hi in M.rows() if lo <= hi)


def _coprime_up(j: int, k: int, limit: int) -> int:
    while j <= limit and gcd(j, k) != 1:
        j += 1
    return j


def _coprime_down(j: int, k: int, limit: int) -> int:
    while j >= limit and gcd(j, k) != 1:
        j -= 1
    return j


def normalize(M: TypedMatrix) -> TypedMatrix:
    """Tighten every a_k up and b_k down to values coprime to k.

    Rows without columns become the canonical absent row (1, 0). The column
    set is unchanged.
    """

    a: List[int] = []
    b: List[int] = []
    for k, lo, hi in M.rows():
        lo2 = _coprime_up(lo, k, hi)
        if lo2 > hi:
            a.append(ABSENT[0])
            b.append(ABSENT[1])
            continue
        a.append(lo2)
        b.append(_coprime_down(hi, k, lo2))
    return TypedMatrix(m=M.m, a=tuple(a), b=tuple(b))


def delta_endpoints(M: TypedMatrix) -> int:
    """Δ(M(a, b)) from endpoint determinants only.

    The determinant k·j₂ − ℓ·j₁ is linear in the second coordinates, so its
    extremes over the columns of rows k and ℓ sit at the (coprime)
    endpoints; determinants against (0, 1) contribute k.
    """

    N = normalize(M)
    rows = [(k, lo, hi) for k, lo, hi in N.rows() if lo <= hi]
    if not rows:
        raise PreconditionError("rank-deficient: M(a, b) has only the column (0, 1)")
    best = 0
    for i, (k, ak, bk) in enumerate(rows):
        best = max(best, k, k * (bk - ak))
        for l, al, bl in rows[i + 1 :]:
            best = max(best, k * bl - l * ak, l * bk - k * al)
    return best


def _det_matrix(A: ColumnSet) -> np.ndarray:
    X = np.array(A.columns, dtype=object if _needs_bigint(A) else np.int64)
    return np.outer(X[:, 0], X[:, 1]) - np.outer(X[:, 1], X[:, 0])


def _needs_bigint(A: ColumnSet) -> bool:
    return any(abs(x) > 2**30 or abs(y) > 2**30 for x, y in A.columns)


def delta_bruteforce(A: ColumnSet) -> int:
    """Largest |det| over all 2-column submatrices."""

    if len(A) < 2:
        raise PreconditionError("delta_bruteforce needs at least two columns")
    return int(np.abs(_det_matrix(A)).max())


def is_generic(A: ColumnSet) -> bool:
    """No two columns are parallel (no vanishing 2×2 minor)."""

    if len(A) < 2:
        raise PreconditionError("is_generic needs at least two columns")
    dets = _det_matrix(A)
    off_diagonal = ~np.eye(len(A), dtype=bool)
    return bool(np.all(dets[off_diagonal] != 0))


def rank(A: ColumnSet) -> int:
    if not A.columns or all(c == (0, 0) for c in A.columns):
        return 0
    if len(A) >= 2 and np.any(_det_matrix(A) != 0):
        return 2
    return 1


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def family(kind: FamilyKind, delta: int) -> TypedMatrix:
    """Members of the three extremal families (Δ+2, Δ+3 and Δ+4 columns)."""

    kind = FamilyKind(kind)
    if delta < 1:
        raise PreconditionError("Δ must be positive")
    if kind is FamilyKind.F1:
        return TypedMatrix(m=1, a=(0,), b=(delta,))
    if kind is FamilyKind.F2:
        if delta % 2 == 0 or delta < 3:
            raise PreconditionError(f"F2 needs odd Δ >= 3, got {delta}")
        return TypedMatrix(m=2, a=(0, delta), b=(delta, delta))
    if delta % 12 == 2 and delta >= 14:
        s = (delta - 2) // 12
        return TypedMatrix(m=3, a=(0, 4 * s + 1, 9 * s + 1), b=(7 * s + 1, 10 * s + 1, delta))
    if delta % 12 == 8 and delta >= 20:
        s = (delta - 8) // 12
        return TypedMatrix(m=3, a=(0, 4 * s + 3, 9 * s + 7), b=(7 * s + 5, 10 * s + 7, delta))
    raise PreconditionError(f"F3 needs Δ = 12s+2 or 12s+8 with s >= 1, got {delta}")


def type3_extremal(delta: int, a3: int) -> TypedMatrix:
    """The type-3 matrices with Δ+4 columns, parametrised by a₃."""

    if delta % 6 != 2:
        raise PreconditionError(f"type-3 extremal matrices need Δ ≡ 2 mod 6, got {delta}")
    if a3 % 3 != 1:
        raise PreconditionError(f"a3 must be ≡ 1 mod 3, got {a3}")
    if not (3 * a3 >= 2 * delta and 4 * a3 <= 3 * delta + 4):
        raise PreconditionError(f"a3={a3} outside [2Δ/3, 3Δ/4 + 1] for Δ={delta}")
    if (delta + a3) % 3 or (delta + 2 * a3 - 1) % 3:
        raise PreconditionError("(Δ+a3)/3 and (Δ+2a3−1)/3 must be integers")
    return TypedMatrix(
        m=3,
        a=(0, (delta + 1) // 3, a3),
        b=((delta + a3) // 3, (delta + 2 * a3 - 1) // 3, delta),
    )


def type2_extremal(delta: int) -> TypedMatrix:
    """A type-2 matrix with Δ+2 columns for Δ = 4n. No uniqueness is claimed."""

    if delta % 4 or delta < 4:
        raise PreconditionError(f"type2_extremal needs Δ = 4n with n >= 1, got {delta}")
    n = delta // 4
    return TypedMatrix(m=2, a=(0, 2 * n - 1), b=(3 * n - 1, 4 * n - 1))


def g_tilde(delta: int) -> int:
    if delta < 1:
        raise PreconditionError("Δ must be positive")
    return 2 * ((delta + 5) // 6) + 2 * ((delta + 1) // 3) + 2


def g_tilde_cases(delta: int) -> int:
    """Three-case form: Δ+4 if Δ ≡ 2, Δ+3 if Δ odd, Δ+2 if Δ ≡ 0, 4 (mod 6)."""

    r = delta % 6
    if r == 2:
        return delta + 4
    if r % 2 == 1:
        return delta + 3
    return delta + 2
