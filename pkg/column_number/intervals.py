"""Rational interval enclosures with MPFR directed rounding.

Arithmetic between enclosures is exact (``Fraction`` endpoints). The
transcendental helpers evaluate their endpoint at a working precision
under the matching MPFR rounding mode and then step one more ulp outward,
so each result contains the true value regardless of the rounding mode
the library honoured.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import gmpy2 as gmp

from .errors import PreconditionError

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]

DEFAULT_PRECISION = 80
MAX_PRECISION = 5120


def _as_fraction(x: Number) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _mpfr_to_fraction(x) -> Fraction:
    q = gmp.mpq(x)
    return Fraction(int(q.numerator), int(q.denominator))


def _directed(value: Fraction, precision: int, upward: bool):
    """Return an mpfr that bounds ``value`` from below (or above)."""

    rnd = gmp.RoundUp if upward else gmp.RoundDown
    with gmp.context(precision=precision, round=rnd, trap_inexact=False):
        out = gmp.mpfr(gmp.mpq(value.numerator, value.denominator))
    exact = _mpfr_to_fraction(out)
    if upward and exact < value:
        out = gmp.next_above(out)
    elif not upward and exact > value:
        out = gmp.next_below(out)
    return out


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise PreconditionError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, x: Number) -> "Enclosure":
        f = _as_fraction(x)
        return cls(f, f)

    @classmethod
    def from_strings(cls, lo: str, hi: str) -> "Enclosure":
        return cls(Fraction(lo), Fraction(hi))

    @staticmethod
    def _coerce(other: Union["Enclosure", Number]) -> "Enclosure":
        if isinstance(other, Enclosure):
            return other
        return Enclosure.exact(other)

    def __add__(self, other):
        o = self._coerce(other)
        return Enclosure(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Enclosure(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "Enclosure":
        if self.lo <= 0 <= self.hi:
            raise PreconditionError("reciprocal of an enclosure containing zero")
        return Enclosure(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, n: int):
        if n < 0:
            return (self ** (-n)).reciprocal()
        if self.lo >= 0:
            return Enclosure(self.lo ** n, self.hi ** n)
        if n % 2 == 0 and self.hi <= 0:
            return Enclosure(self.hi ** n, self.lo ** n)
        out = Enclosure.exact(1)
        for _ in range(n):
            out = out * self
        return out

    def contains(self, x: Number) -> bool:
        f = _as_fraction(x)
        return self.lo <= f <= self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint_float(self) -> float:
        """Decimal rendering for log lines only."""
        return float((self.lo + self.hi) / 2)


def _unary(x: Enclosure, precision: int, fn: Callable, domain_lo: Fraction) -> Enclosure:
    if x.lo < domain_lo:
        raise PreconditionError(f"argument {x.lo} below domain bound {domain_lo}")
    lo_in = _directed(x.lo, precision, upward=False)
    hi_in = _directed(x.hi, precision, upward=True)
    with gmp.context(precision=precision, round=gmp.RoundDown, trap_inexact=False):
        lo_out = gmp.next_below(fn(lo_in))
    with gmp.context(precision=precision, round=gmp.RoundUp, trap_inexact=False):
        hi_out = gmp.next_above(fn(hi_in))
    return Enclosure(_mpfr_to_fraction(lo_out), _mpfr_to_fraction(hi_out))


def log(x: Union[Enclosure, Number], precision: int = DEFAULT_PRECISION) -> Enclosure:
    enc = Enclosure._coerce(x)
    if enc.lo <= 0:
        raise PreconditionError("log of a nonpositive enclosure")
    if enc.lo == enc.hi == 1:
        return Enclosure.exact(0)
    return _unary(enc, precision, gmp.log, Fraction(0))


def sqrt(x: Union[Enclosure, Number], precision: int = DEFAULT_PRECISION) -> Enclosure:
    enc = Enclosure._coerce(x)
    out = _unary(enc, precision, gmp.sqrt, Fraction(0))
    return Enclosure(max(out.lo, Fraction(0)), out.hi)


def root4(x: Union[Enclosure, Number], precision: int = DEFAULT_PRECISION) -> Enclosure:
    enc = Enclosure._coerce(x)
    out = _unary(enc, precision, lambda v: gmp.sqrt(gmp.sqrt(v)), Fraction(0))
    return Enclosure(max(out.lo, Fraction(0)), out.hi)


def certify_le(
    build: Callable[[int], Enclosure],
    bound: Number,
    precision: int = DEFAULT_PRECISION,
    max_precision: int = MAX_PRECISION,
) -> bool:
    """Decide ``value <= bound`` where ``build(p)`` encloses value at precision p.

    Precision doubles while the comparison is indeterminate. An answer that
    stays indeterminate at ``max_precision`` is reported as False.
    """

    target = _as_fraction(bound)
    p = precision
    while p <= max_precision:
        enc = build(p)
        if enc.hi <= target:
            return True
        if enc.lo > target:
            return False
        logger.debug("indeterminate comparison at %d bits, doubling", p)
        p *= 2
    logger.warning("comparison against %s still indeterminate at %d bits", target, max_precision)
    return False


def certify_ge(
    build: Callable[[int], Enclosure],
    bound: Number,
    precision: int = DEFAULT_PRECISION,
    max_precision: int = MAX_PRECISION,
) -> bool:
    """Decide ``value >= bound``; same precision policy as ``certify_le``."""

    return certify_le(lambda p: -build(p), -_as_fraction(bound), precision, max_precision)


def fraction_str(x: Number) -> str:
    """Always "p/q", also for integers."""
    f = _as_fraction(x)
    return f"{f.numerator}/{f.denominator}"


def parse_fraction(text: str) -> Fraction:
    """Accepts "p/q", integers and finite decimals ("0.999", "1.85")."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise PreconditionError(f"not a rational number: {text!r}") from exc
