"""Upper bounds on z_m and on the column number.

Three layers meet here:

* ``analytic_certificate`` builds the three-rectangle dual solution for
  large m and ``c_window`` brackets the constant C that makes it work;
* ``sweep`` covers the finite range below that, solving restricted duals
  only when the propagated bound z_{m} ≤ z_{m-1} + φ(m)/m² is too weak;
* ``column_bound``/``verify_threshold`` turn a bound on z_m into a bound
  on |M(a, b)| and compare it against Δ.

Every inequality on irrational quantities goes through ``Enclosure`` and
``certify_le``.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import cached_property
from math import isqrt
from typing import Dict, Iterator, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from . import intervals
from .errors import InternalGuardError, PreconditionError, VerificationFailure
from .intervals import Enclosure, certify_le
from .lp import (
    DualCertificate,
    Pair,
    build_approx_primal,
    check_dual_feasible,
    extract_certificate,
    solve,
)
from .model import g_tilde
from .numtheory import INV_ZETA_2, PI, TAU_SUM_CONSTANT, ZETA_2, find_x0, phi, phi_range_sum, squarefree_divisors

logger = logging.getLogger(__name__)

DEFAULT_W = Fraction(999, 1000)
DEFAULT_EPS = Fraction(1, 1000)


# ---------------------------------------------------------------------------
# Three-rectangle certificate
# ---------------------------------------------------------------------------


class AnalyticParams(BaseModel):
    """Parameters of the rectangle construction; β = √(1/3), γ = √(2/3)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: int = Field(ge=4)
    C: Fraction
    eps: Fraction = DEFAULT_EPS
    w: Fraction = DEFAULT_W

    # β² and γ² are what every membership test uses; (βm)² + (γm)² = m².
    beta_squared: Fraction = Fraction(1, 3)
    gamma_squared: Fraction = Fraction(2, 3)

    def beta(self, precision: int = intervals.DEFAULT_PRECISION) -> Enclosure:
        return intervals.sqrt(self.beta_squared, precision)

    def gamma(self, precision: int = intervals.DEFAULT_PRECISION) -> Enclosure:
        return intervals.sqrt(self.gamma_squared, precision)


def regime_ends(m: int) -> Tuple[int, int]:
    """Last k with 3k² < m² and last k with 3k² < 2m².

    βm and γm are irrational for m ≥ 1, so every k falls strictly inside
    one of the three ranges.
    """
    return isqrt((m * m - 1) // 3), isqrt((2 * m * m - 1) // 3)


class RectangleCertificate(DualCertificate):
    """Y_{k,ℓ} = C·φ(k)·φ(ℓ) on [1,βm]×[γm,m], [βm,γm]², [γm,m]×[1,βm].

    Entries are produced lazily; row sums and the objective use the
    per-regime closed forms 2Cφ(k)·Σφ(partner range) and
    2C(2·S_low·S_high + S_mid²) with S = Σ φ(k)/k over a range.
    """

    def __init__(self, m: int, C: object):
        if m < 4:
            raise PreconditionError("the rectangle construction needs m >= 4")
        C = Fraction(C)
        if C <= 0:
            raise PreconditionError("C must be positive")
        self.m = m
        self.C = C
        self.low_end, self.mid_end = regime_ends(m)

    def _ranges(self) -> Dict[str, Tuple[int, int]]:
        return {
            "low": (1, self.low_end),
            "mid": (self.low_end + 1, self.mid_end),
            "high": (self.mid_end + 1, self.m),
        }

    def regime(self, k: int) -> str:
        if k <= self.low_end:
            return "low"
        if k <= self.mid_end:
            return "mid"
        return "high"

    @staticmethod
    def partner(regime: str) -> str:
        return {"low": "high", "mid": "mid", "high": "low"}[regime]

    @cached_property
    def _phi_sums(self) -> Dict[str, int]:
        return {name: phi_range_sum(lo, hi) for name, (lo, hi) in self._ranges().items()}

    @cached_property
    def _phi_over_k_sums(self) -> Dict[str, Fraction]:
        return {
            name: sum((Fraction(phi(k), k) for k in range(lo, hi + 1)), Fraction(0))
            for name, (lo, hi) in self._ranges().items()
        }

    @property
    def entries(self) -> Dict[Pair, Fraction]:
        return dict(self.iter_entries())

    def iter_entries(self) -> Iterator[Tuple[Pair, Fraction]]:
        r = self._ranges()
        lo_a, lo_b = r["low"]
        mid_a, mid_b = r["mid"]
        hi_a, hi_b = r["high"]
        two_c = 2 * self.C
        for k in range(lo_a, mid_b + 1):
            pk = phi(k)
            if k <= lo_b:
                for l in range(hi_a, hi_b + 1):
                    yield (k, l), two_c * pk * phi(l)
            else:
                yield (k, k), self.C * pk * pk
                for l in range(k + 1, mid_b + 1):
                    yield (k, l), two_c * pk * phi(l)

    @cached_property
    def objective(self) -> Fraction:
        s = self._phi_over_k_sums
        return 2 * self.C * (2 * s["low"] * s["high"] + s["mid"] ** 2)

    def row_sums(self) -> Dict[int, Fraction]:
        sums = self._phi_sums
        factor = {name: 2 * self.C * sums[self.partner(name)] for name in sums}
        return {k: factor[self.regime(k)] * phi(k) for k in range(1, self.m + 1)}

    def regime_margins(self) -> Dict[str, Fraction]:
        """2C·Σφ(partner) per regime; the certificate is feasible iff all are ≥ 1."""
        sums = self._phi_sums
        return {name: 2 * self.C * sums[self.partner(name)] for name in sums}


def analytic_certificate(m: int, C: object) -> RectangleCertificate:
    cert = RectangleCertificate(m, C)
    logger.debug("rectangle certificate m=%d regimes end at %d, %d", m, cert.low_end, cert.mid_end)
    return cert


class AnalyticReport(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: int
    C: Fraction
    w: Fraction
    feasible: bool
    objective: Fraction

    @property
    def passed(self) -> bool:
        return self.feasible and self.objective <= self.w


def check_analytic(params: AnalyticParams) -> AnalyticReport:
    cert = analytic_certificate(params.m, params.C)
    report = AnalyticReport(
        m=params.m,
        C=params.C,
        w=params.w,
        feasible=check_dual_feasible(cert),
        objective=cert.objective,
    )
    logger.info(
        "analytic certificate m=%d feasible=%s objective≈%.6f (approx.)",
        params.m,
        report.feasible,
        float(report.objective),
    )
    return report


def _window_f(eps: Fraction, precision: int) -> Enclosure:
    beta = intervals.sqrt(Fraction(1, 3), precision)
    gamma = intervals.sqrt(Fraction(2, 3), precision)
    first = 2 * (1 + eps) * beta * ((1 + eps) - (1 - eps) * gamma)
    second = ((1 + eps) * gamma - (1 - eps) * beta) ** 2
    return first + second


def c_window_enclosures(
    m: int, eps: Fraction = DEFAULT_EPS, w: Fraction = DEFAULT_W, precision: int = intervals.DEFAULT_PRECISION
) -> Tuple[Enclosure, Enclosure]:
    eps, w = Fraction(eps), Fraction(w)
    if not 0 < eps < Fraction(1, 5):
        raise PreconditionError("eps must lie in (0, 1/5)")
    inv_m2 = Fraction(1, m * m)
    lower = ZETA_2 * inv_m2 / (Fraction(1, 3) - 5 * eps / 3)
    upper = (w / 2) * ZETA_2 * ZETA_2 * inv_m2 / _window_f(eps, precision)
    return lower, upper


def c_window(
    m: int, eps: Fraction = DEFAULT_EPS, w: Fraction = DEFAULT_W, enforce_x0: bool = True
) -> Tuple[Fraction, Fraction]:
    """Rational [lower, upper] such that every C inside works for m.

    With ``enforce_x0`` the sum estimates behind the window must be valid
    at βm, i.e. m² ≥ 3·x0(eps)².
    """
    if m < 4:
        raise PreconditionError("m must be >= 4")
    if enforce_x0:
        x0 = find_x0(Fraction(eps))
        if m * m < 3 * x0 * x0:
            raise PreconditionError(f"m={m} too small: βm < x0({eps}) = {x0}")
    lower, upper = c_window_enclosures(m, eps, w)
    lo, hi = lower.hi, upper.lo
    if lo > hi:
        raise VerificationFailure(f"empty C-window at m={m}: {float(lo):.6g} > {float(hi):.6g}")
    logger.info("C-window at m=%d: [%.6f, %.6f]/m² (approx.)", m, float(lo * m * m), float(hi * m * m))
    return lo, hi


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


class EpsPolicy(BaseModel):
    """eps = numerator/m, multiplied by ``growth`` on each retry."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    numerator: Fraction = Fraction(37, 20)
    growth: int = Field(default=2, ge=2)
    retries: int = Field(default=8, ge=0)

    def eps_for(self, m: int, attempt: int) -> Fraction:
        return self.numerator / m * self.growth**attempt


class SweepRecord(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: int
    bound: Fraction
    solved: bool
    eps_used: Optional[Fraction] = None
    attempts: int = 0
    wall_ms: float = 0.0


class SweepReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    m_lo: int
    m_hi: int
    w: Fraction
    records: List[SweepRecord] = Field(default_factory=list)
    failures: List[int] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and all(r.bound <= self.w for r in self.records)

    @property
    def solves(self) -> int:
        return sum(1 for r in self.records if r.solved)


def certify_zm(m: int, w: Fraction, policy: EpsPolicy) -> Optional[Tuple[Fraction, Fraction, int]]:
    """(bound, eps, attempts) from a verified restricted dual, or None."""
    for attempt in range(policy.retries + 1):
        eps = policy.eps_for(m, attempt)
        lp = build_approx_primal(m, eps)
        if lp.uncovered:
            logger.debug("m=%d eps=%s: %d rows uncovered, enlarging", m, eps, len(lp.uncovered))
            continue
        solution = solve(lp)
        if not solution.optimal:
            logger.debug("m=%d eps=%s: restricted primal %s", m, eps, solution.status.value)
            continue
        cert = extract_certificate(m, lp, solution)
        if not check_dual_feasible(cert):
            raise InternalGuardError(f"extracted dual at m={m} is not feasible")
        if cert.objective != solution.value:
            raise InternalGuardError(f"duality gap at m={m}: {cert.objective} != {solution.value}")
        if cert.objective <= w:
            return cert.objective, eps, attempt + 1
        logger.debug("m=%d eps=%s: bound %.6f above w", m, eps, float(cert.objective))
    return None


def _sweep_range(m_lo: int, m_hi: int, w: Fraction, policy: EpsPolicy) -> SweepReport:
    report = SweepReport(m_lo=m_lo, m_hi=m_hi, w=w)
    bound: Optional[Fraction] = None
    for m in range(m_lo, m_hi + 1):
        start = time.perf_counter()
        if bound is not None:
            step = bound + Fraction(phi(m), m * m)
            if step <= w:
                bound = step
                report.records.append(
                    SweepRecord(m=m, bound=bound, solved=False, wall_ms=(time.perf_counter() - start) * 1000)
                )
                continue
        outcome = certify_zm(m, w, policy)
        elapsed = (time.perf_counter() - start) * 1000
        if outcome is None:
            logger.warning("m=%d: no eps within %d retries certified z_m <= %s", m, policy.retries, w)
            report.failures.append(m)
            bound = None
            continue
        bound, eps, attempts = outcome
        report.records.append(
            SweepRecord(m=m, bound=bound, solved=True, eps_used=eps, attempts=attempts, wall_ms=elapsed)
        )
        logger.debug("m=%d solved: z_m <= %.6f (eps=%s, %.0f ms)", m, float(bound), eps, elapsed)
    return report


def _partitions(m_lo: int, m_hi: int, jobs: int) -> List[Tuple[int, int]]:
    total = m_hi - m_lo + 1
    parts = max(1, min(jobs, total))
    size, extra = divmod(total, parts)
    out = []
    start = m_lo
    for i in range(parts):
        end = start + size - 1 + (1 if i < extra else 0)
        out.append((start, end))
        start = end + 1
    return out


def sweep(
    m_lo: int,
    m_hi: int,
    w: Fraction = DEFAULT_W,
    policy: Optional[EpsPolicy] = None,
    jobs: int = 1,
) -> SweepReport:
    if not 4 <= m_lo <= m_hi:
        raise PreconditionError(f"need 4 <= m_lo <= m_hi, got {m_lo}..{m_hi}")
    w = Fraction(w)
    policy = policy or EpsPolicy()
    parts = _partitions(m_lo, m_hi, jobs)
    if len(parts) == 1:
        reports = [_sweep_range(m_lo, m_hi, w, policy)]
    else:
        with ProcessPoolExecutor(max_workers=len(parts)) as pool:
            futures = [pool.submit(_sweep_range, lo, hi, w, policy) for lo, hi in parts]
            reports = [f.result() for f in futures]

    merged = SweepReport(m_lo=m_lo, m_hi=m_hi, w=w)
    for part in reports:
        merged.records.extend(part.records)
        merged.failures.extend(part.failures)
    logger.info(
        "sweep %d..%d: %d solves, %d propagated, %d failures",
        m_lo,
        m_hi,
        merged.solves,
        len(merged.records) - merged.solves,
        len(merged.failures),
    )
    return merged


# ---------------------------------------------------------------------------
# Column bounds and the threshold
# ---------------------------------------------------------------------------

_SMALL_TYPE_BOUND = {1: 2, 2: 3, 3: 4}


def column_bound_enclosure(
    m: int, delta: int, z: Fraction, precision: int = intervals.DEFAULT_PRECISION
) -> Enclosure:
    log_m = intervals.log(m, precision)
    main = Fraction(z) * delta + 1 + m * INV_ZETA_2 * (log_m + TAU_SUM_CONSTANT)
    return main + 15 * intervals.sqrt(m, precision) * log_m


def column_bound(m: int, delta: int, z: object) -> Fraction:
    """Upper bound on |M(a, b)| for a Δ-submodular matrix of type m with z_m ≤ z."""
    if m < 1 or delta < 1:
        raise PreconditionError("m and Δ must be positive")
    z = Fraction(z)
    if z < 0:
        raise PreconditionError("z must be nonnegative")
    if m in _SMALL_TYPE_BOUND:
        return Fraction(delta + _SMALL_TYPE_BOUND[m])
    return column_bound_enclosure(m, delta, z).hi


def refined_small_type_bound(m: int, delta: int) -> int:
    if m not in _SMALL_TYPE_BOUND:
        raise PreconditionError(f"refined bound covers m in {{1, 2, 3}}, got {m}")
    if delta < 1:
        raise PreconditionError("Δ must be positive")
    if m == 1:
        return delta + 2
    if m == 2:
        return delta + 3 if delta % 2 else delta + 2
    return g_tilde(delta)


def small_m_error(m: int) -> Fraction:
    """1 + Σ_{k≤m} (1 + Σ_{d|k, d>1 squarefree} (d−2)/d)."""
    if m < 1:
        raise PreconditionError("m must be positive")
    total = Fraction(1)
    for k in range(1, m + 1):
        total += 1 + sum((Fraction(d - 2, d) for d, _ in squarefree_divisors(k) if d > 1), Fraction(0))
    return total


def refined_column_bound(m: int, delta: int, z: object) -> Fraction:
    """zΔ + small_m_error(m); with m = 5, z = 119/120 this is 119Δ/120 + 104/15."""
    return Fraction(z) * delta + small_m_error(m)


def threshold_enclosure(delta: int, w: Fraction, precision: int = intervals.DEFAULT_PRECISION) -> Enclosure:
    s_squared = PI * delta / 2
    s = intervals.sqrt(s_squared, precision)
    log_s = intervals.log(s, precision)
    tail = 15 * intervals.root4(s_squared, precision) * log_s
    return Fraction(w) * delta + 1 + s * INV_ZETA_2 * (log_s + TAU_SUM_CONSTANT) + tail


def verify_threshold(delta: int, w: object = DEFAULT_W) -> bool:
    if delta < 1:
        raise PreconditionError("Δ must be positive")
    w = Fraction(w)
    verdict = certify_le(lambda p: threshold_enclosure(delta, w, p), delta)
    logger.debug("threshold at Δ=%d: %s", delta, verdict)
    return verdict


def threshold_search(w: object = DEFAULT_W, lo: int = 10_000, hi: int = 10**10) -> Optional[int]:
    """Smallest Δ on the doubling grid lo, 2lo, 4lo, … ≤ hi that verifies."""
    if lo < 1 or hi < lo:
        raise PreconditionError("need 1 <= lo <= hi")
    delta = lo
    while delta <= hi:
        if verify_threshold(delta, w):
            logger.info("threshold verified at Δ=%d", delta)
            return delta
        delta *= 2
    return None
