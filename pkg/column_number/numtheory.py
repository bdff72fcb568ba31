"""Arithmetic functions, their summatory forms, and the constant enclosures.

Tables are built by a numpy sieve up to ``Settings.sieve_limit``; beyond
the sieve limit values come from per-element trial division. Every
comparison against π, γ, ζ(2) or ζ'(2) goes through ``Enclosure`` so a
``True`` answer is rigorous.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from . import intervals
from .config import get_settings, load_constants
from .errors import PreconditionError
from .intervals import Enclosure

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Constant enclosures
# ---------------------------------------------------------------------------


def _enclosure(name: str) -> Enclosure:
    entry = load_constants()["constants"][name]
    return Enclosure.from_strings(entry["lo"], entry["hi"])


PI = _enclosure("pi")
EULER_GAMMA = _enclosure("euler_gamma")
ZETA_PRIME_2 = _enclosure("zeta_prime_2")
PI_SQUARED = PI * PI
INV_PI_SQUARED = PI_SQUARED.reciprocal()
ZETA_2 = PI_SQUARED / 6
INV_ZETA_2 = ZETA_2.reciprocal()
# 2γ − 1 − 2ζ'(2)/ζ(2), shared by the τ-sum bound and the column bounds
TAU_SUM_CONSTANT = 2 * EULER_GAMMA - 1 - 2 * ZETA_PRIME_2 * INV_ZETA_2


# ---------------------------------------------------------------------------
# Sieve tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArithCache:
    """Read-only φ, μ, τ tables for 0 ≤ k ≤ limit (index 0 unused)."""

    limit: int
    phi_table: np.ndarray
    mu_table: np.ndarray
    tau_table: np.ndarray
    spf_table: np.ndarray
    phi_prefix: np.ndarray
    tau_prefix: np.ndarray

    def __post_init__(self):
        for arr in (
            self.phi_table,
            self.mu_table,
            self.tau_table,
            self.spf_table,
            self.phi_prefix,
            self.tau_prefix,
        ):
            arr.flags.writeable = False


def _sieve(limit: int) -> Tuple[np.ndarray, ...]:
    n = limit + 1
    idx = np.arange(n, dtype=np.int64)
    spf = np.zeros(n, dtype=np.int64)
    for p in range(2, isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    unmarked = spf == 0
    unmarked[:2] = False
    spf[unmarked] = idx[unmarked]

    phi = idx.copy()
    mu = np.ones(n, dtype=np.int64)
    omega = np.zeros(n, dtype=np.int64)
    primes = np.nonzero(spf[2:] == idx[2:])[0] + 2
    for p in primes.tolist():
        phi[p::p] -= phi[p::p] // p
        mu[p::p] *= -1
        if p * p < n:
            mu[p * p :: p * p] = 0
        omega[p::p] += 1
    tau = np.left_shift(np.ones(n, dtype=np.int64), omega)
    phi[0] = mu[0] = tau[0] = 0
    return phi, mu, tau, spf


def build_cache(limit: int, cache_dir: Optional[Path] = None) -> ArithCache:
    """Sieve the tables up to ``limit``, reusing an ``.npz`` file in cache_dir."""

    if limit < 1:
        raise PreconditionError("sieve limit must be positive")
    path = cache_dir / f"sieve_{limit}.npz" if cache_dir else None
    if path is not None and path.exists():
        with np.load(path) as data:
            phi, mu, tau, spf = (data[k].copy() for k in ("phi", "mu", "tau", "spf"))
        logger.debug("loaded sieve tables from %s", path)
    else:
        phi, mu, tau, spf = _sieve(limit)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            np.savez_compressed(path, phi=phi, mu=mu, tau=tau, spf=spf)
            logger.info("cached sieve tables up to %d in %s", limit, path)
    return ArithCache(
        limit=limit,
        phi_table=phi,
        mu_table=mu,
        tau_table=tau,
        spf_table=spf,
        phi_prefix=np.cumsum(phi),
        tau_prefix=np.cumsum(tau),
    )


@lru_cache(maxsize=4)
def get_cache(limit: Optional[int] = None) -> ArithCache:
    settings = get_settings()
    return build_cache(limit or settings.sieve_limit, settings.cache_dir)


# ---------------------------------------------------------------------------
# Per-element functions
# ---------------------------------------------------------------------------


def _check_positive(k: int) -> None:
    if k <= 0:
        raise PreconditionError(f"expected a positive integer, got {k}")


def distinct_primes(k: int) -> List[int]:
    """Distinct prime factors of k in increasing order."""

    _check_positive(k)
    cache = get_cache()
    out: List[int] = []
    if k <= cache.limit:
        while k > 1:
            p = int(cache.spf_table[k])
            out.append(p)
            while k % p == 0:
                k //= p
        return out
    p = 2
    while p * p <= k:
        if k % p == 0:
            out.append(p)
            while k % p == 0:
                k //= p
        p += 1 if p == 2 else 2
    if k > 1:
        out.append(k)
    return out


def squarefree_divisors(k: int) -> List[Tuple[int, int]]:
    """Pairs (d, μ(d)) over the squarefree divisors d of k."""

    divs = [(1, 1)]
    for p in distinct_primes(k):
        divs += [(d * p, -mu) for d, mu in divs]
    return divs


def phi(k: int) -> int:
    _check_positive(k)
    cache = get_cache()
    if k <= cache.limit:
        return int(cache.phi_table[k])
    out = k
    for p in distinct_primes(k):
        out -= out // p
    return out


def mobius(k: int) -> int:
    _check_positive(k)
    cache = get_cache()
    if k <= cache.limit:
        return int(cache.mu_table[k])
    primes = distinct_primes(k)
    rad = 1
    for p in primes:
        rad *= p
    return 0 if rad != k else (-1) ** len(primes)


def tau_unitary(k: int) -> int:
    """Number of unitary divisors, 2^ω(k)."""

    _check_positive(k)
    cache = get_cache()
    if k <= cache.limit:
        return int(cache.tau_table[k])
    return 1 << len(distinct_primes(k))


def phi_interval(a: int, b: int, k: int) -> int:
    """Count integers j in [a, b] with gcd(j, k) = 1 (Möbius identity)."""

    _check_positive(k)
    if a > b + 1:
        raise PreconditionError(f"interval [{a}, {b}] is inverted beyond the empty case")
    return sum(mu * (b // d - (a - 1) // d) for d, mu in squarefree_divisors(k))


def phi_interval_error(a: int, b: int, k: int) -> Fraction:
    if a > b:
        raise PreconditionError(f"interval [{a}, {b}] must satisfy a <= b")
    return phi_interval(a, b, k) - Fraction(phi(k), k) * (b - a)


# ---------------------------------------------------------------------------
# Summatory functions
# ---------------------------------------------------------------------------


def sum_phi(x: int) -> int:
    _check_positive(x)
    cache = get_cache()
    if x <= cache.limit:
        return int(cache.phi_prefix[x])
    return int(cache.phi_prefix[cache.limit]) + sum(phi(k) for k in range(cache.limit + 1, x + 1))


def sum_tau(x: int) -> int:
    _check_positive(x)
    cache = get_cache()
    if x <= cache.limit:
        return int(cache.tau_prefix[x])
    return int(cache.tau_prefix[cache.limit]) + sum(
        tau_unitary(k) for k in range(cache.limit + 1, x + 1)
    )


def sum_phi_over_k(x: int) -> Fraction:
    _check_positive(x)
    return sum((Fraction(phi(k), k) for k in range(1, x + 1)), Fraction(0))


def sum_phi_over_k2(x: int) -> Fraction:
    _check_positive(x)
    return sum((Fraction(phi(k), k * k) for k in range(1, x + 1)), Fraction(0))


def phi_range_sum(lo: int, hi: int) -> int:
    """Σ φ(k) for lo ≤ k ≤ hi (0 for an empty range)."""

    if hi < lo or hi < 1:
        return 0
    return sum_phi(hi) - (sum_phi(lo - 1) if lo > 1 else 0)


# ---------------------------------------------------------------------------
# Certified estimates
# ---------------------------------------------------------------------------


def phi_sum_main(x: int) -> Enclosure:
    """(3/π²)x²"""
    return 3 * x * x * INV_PI_SQUARED


def phi_over_k_main(x: int) -> Enclosure:
    """(6/π²)x"""
    return 6 * x * INV_PI_SQUARED


def tau_sum_bound(x: int, precision: int = intervals.DEFAULT_PRECISION) -> Enclosure:
    """(x/ζ(2))(log x + 2γ − 1 − 2ζ'(2)/ζ(2)) + 15√x log x"""

    logx = intervals.log(x, precision)
    return x * INV_ZETA_2 * (logx + TAU_SUM_CONSTANT) + 15 * intervals.sqrt(x, precision) * logx


def phi_sum_error_bound(x: int, precision: int = intervals.DEFAULT_PRECISION) -> Enclosure:
    """x(log x + 2), the bound on |Σφ(k) − 3x²/π²|."""
    return x * (intervals.log(x, precision) + 2)


def phi_over_k_error_bound(x: int, precision: int = intervals.DEFAULT_PRECISION) -> Enclosure:
    """log x + 3, the bound on |Σφ(k)/k − 6x/π²|."""
    return intervals.log(x, precision) + 3


def _within(value: Fraction, main: Enclosure, eps: Fraction) -> bool:
    lower = (1 - eps) * main
    upper = (1 + eps) * main
    return lower.hi <= value <= upper.lo


def check_lemma21(x: int, eps: Fraction) -> bool:
    """Both (1±ε) sandwich inequalities for Σφ(k) and Σφ(k)/k at x."""

    if x < 1 or eps <= 0:
        raise PreconditionError("check_lemma21 needs x >= 1 and eps > 0")
    eps = Fraction(eps)
    return _within(Fraction(sum_phi(x)), phi_sum_main(x), eps) and _within(
        sum_phi_over_k(x), phi_over_k_main(x), eps
    )


class Lemma21Row(BaseModel):
    x: int
    lhs1: Fraction
    rhs1: Fraction
    lhs2: Fraction
    rhs2: Fraction
    passed: bool

    model_config = {"arbitrary_types_allowed": True}


def lemma21_rows(x_from: int, x_to: int, eps: Fraction) -> Iterator[Lemma21Row]:
    """Rows of the Σφ sandwich check for x_from ≤ x ≤ x_to with running sums.

    ``rhs1``/``rhs2`` are the rational lower endpoints of the main terms
    (3/π²)x² and (6/π²)x.
    """

    if x_from < 1 or x_to < x_from:
        raise PreconditionError(f"bad range [{x_from}, {x_to}]")
    eps = Fraction(eps)
    s2 = sum_phi_over_k(x_from - 1) if x_from > 1 else Fraction(0)
    for x in range(x_from, x_to + 1):
        s2 += Fraction(phi(x), x)
        s1 = sum_phi(x)
        main1 = phi_sum_main(x)
        main2 = phi_over_k_main(x)
        passed = _within(Fraction(s1), main1, eps) and _within(s2, main2, eps)
        yield Lemma21Row(x=x, lhs1=Fraction(s1), rhs1=main1.lo, lhs2=s2, rhs2=main2.lo, passed=passed)


def _log_plus_le_linear(x: int, c: int, alpha: Enclosure) -> bool:
    return intervals.certify_le(lambda p: intervals.log(x, p) + c - alpha.lo * x, 0)


def analytic_threshold(eps: Fraction) -> int:
    """Least X from which the error bounds alone imply both inequalities.

    Needs log x + 2 ≤ ε(3/π²)x and log x + 3 ≤ ε(6/π²)x. Each has the form
    log x + c ≤ αx, which persists for larger x once x ≥ 1/α.
    """

    eps = Fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    alpha1 = eps * 3 * INV_PI_SQUARED
    alpha2 = eps * 6 * INV_PI_SQUARED

    def holds(x: int) -> bool:
        return _log_plus_le_linear(x, 2, alpha1) and _log_plus_le_linear(x, 3, alpha2)

    lo = max(2, int(1 / alpha1.lo) + 1)
    if holds(lo):
        return lo
    hi = lo
    while not holds(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


@lru_cache(maxsize=16)
def find_x0(eps: Fraction, scale_bits: int = 256) -> int:
    """Smallest x0 with the Σφ sandwich check true for every x ≥ x0.

    Above ``analytic_threshold`` the error bounds settle it; below, x is
    scanned downward with Σφ(k)/k enclosed by integer sums scaled by
    2^scale_bits (floor and ceiling per term), falling back to the exact
    check when the enclosure is indeterminate.
    """

    eps = Fraction(eps)
    top = analytic_threshold(eps)
    logger.info("analytic threshold for eps=%s is %d", eps, top)
    scale = 1 << scale_bits
    s2_lo = s2_hi = 0
    for k in range(1, top):
        num = phi(k) * scale
        s2_lo += num // k
        s2_hi += -((-num) // k)

    x = top - 1
    while x >= 1:
        s2 = Enclosure(Fraction(s2_lo, scale), Fraction(s2_hi, scale))
        main2 = phi_over_k_main(x)
        lower2 = ((1 - eps) * main2).hi
        upper2 = ((1 + eps) * main2).lo
        ok1 = _within(Fraction(sum_phi(x)), phi_sum_main(x), eps)
        if ok1 and lower2 <= s2.lo and s2.hi <= upper2:
            ok = True
        elif not ok1 or s2.hi < lower2 or s2.lo > upper2:
            ok = False
        else:
            ok = check_lemma21(x, eps)
        if not ok:
            return x + 1
        num = phi(x) * scale
        s2_lo -= num // x
        s2_hi -= -((-num) // x)
        x -= 1
    return 1
