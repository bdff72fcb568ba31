"""Exact rational linear programs for z_m and its duals.

Problems are kept as sparse rows of ``Fraction`` coefficients and solved by
a two-phase primal simplex on a sparse tableau. Entering columns are
priced by the largest reduced cost; after a degenerate pivot the solver
switches to Bland's rule until it makes progress again, and ratio-test
ties always go to the smallest basic index, so the method terminates.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from math import isqrt
from types import MappingProxyType
from typing import Dict, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import InternalGuardError, PreconditionError
from .intervals import fraction_str, parse_fraction
from .numtheory import phi

logger = logging.getLogger(__name__)

Key = Hashable
Pair = Tuple[int, int]

ONE = Fraction(1)
DEFAULT_MAX_PIVOTS = 2_000_000


class Sense(str, Enum):
    MAX = "max"
    MIN = "min"


class Relation(str, Enum):
    LE = "<="
    GE = ">="


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Constraint:
    coeffs: Tuple[Tuple[Key, Fraction], ...]
    relation: Relation
    rhs: Fraction
    tag: Optional[Hashable] = field(default=None, compare=False)

    def lhs(self, point: Mapping[Key, Fraction]) -> Fraction:
        return sum((a * point.get(key, 0) for key, a in self.coeffs), Fraction(0))

    def holds(self, point: Mapping[Key, Fraction]) -> bool:
        value = self.lhs(point)
        return value <= self.rhs if self.relation is Relation.LE else value >= self.rhs


def constraint(
    coeffs: Mapping[Key, object], relation: Relation, rhs: object, tag: Optional[Hashable] = None
) -> Constraint:
    items = tuple(sorted((key, Fraction(a)) for key, a in coeffs.items() if a))
    return Constraint(coeffs=items, relation=Relation(relation), rhs=Fraction(rhs), tag=tag)


@dataclass(frozen=True)
class RationalLP:
    """max/min c·x subject to the constraints and x ≥ 0."""

    sense: Sense
    variables: Tuple[Key, ...]
    objective: Tuple[Tuple[Key, Fraction], ...]
    constraints: Tuple[Constraint, ...]
    # rows of an approximate dual that received no variable
    uncovered: Tuple[int, ...] = ()

    @classmethod
    def build(
        cls,
        sense: Sense,
        objective: Mapping[Key, object],
        constraints: Iterable[Constraint],
        variables: Optional[Iterable[Key]] = None,
        uncovered: Iterable[int] = (),
    ) -> "RationalLP":
        cons = list(constraints)
        if variables is None:
            keys = set(objective)
            for con in cons:
                keys.update(key for key, _ in con.coeffs)
            universe = tuple(sorted(keys))
        else:
            universe = tuple(variables)
        known = set(universe)
        if len(known) != len(universe):
            raise PreconditionError("duplicate variable keys")
        for key in objective:
            if key not in known:
                raise PreconditionError(f"objective uses unknown variable {key!r}")

        seen = set()
        unique: List[Constraint] = []
        for con in cons:
            for key, _ in con.coeffs:
                if key not in known:
                    raise PreconditionError(f"constraint uses unknown variable {key!r}")
            if con in seen:
                continue
            seen.add(con)
            unique.append(con)

        obj = tuple(sorted((key, Fraction(c)) for key, c in objective.items() if c))
        return cls(
            sense=Sense(sense),
            variables=universe,
            objective=obj,
            constraints=tuple(unique),
            uncovered=tuple(uncovered),
        )

    def objective_at(self, point: Mapping[Key, Fraction]) -> Fraction:
        return sum((c * point.get(key, 0) for key, c in self.objective), Fraction(0))


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    value: Optional[Fraction] = None
    assignment: Mapping[Key, Fraction] = field(default_factory=dict)
    # one dual value per constraint of the solved RationalLP, same order
    duals: Tuple[Fraction, ...] = ()
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


# ---------------------------------------------------------------------------
# Sparse tableau
# ---------------------------------------------------------------------------


def _axpy(target: Dict[int, Fraction], source: Mapping[int, Fraction], f: Fraction) -> None:
    """target -= f * source, dropping entries that cancel."""
    for col, a in source.items():
        nv = target.get(col, 0) - f * a
        if nv:
            target[col] = nv
        else:
            target.pop(col, None)


class _Tableau:
    def __init__(self, rows: List[Dict[int, Fraction]], rhs: List[Fraction], basis: List[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.cost: Dict[int, Fraction] = {}
        self.value = Fraction(0)
        self.pivots = 0

    def set_objective(self, c: Mapping[int, Fraction]) -> None:
        cost = {j: v for j, v in c.items() if v}
        value = Fraction(0)
        for i, j in enumerate(self.basis):
            cb = c.get(j)
            if not cb:
                continue
            _axpy(cost, self.rows[i], cb)
            value += cb * self.rhs[i]
        self.cost = cost
        self.value = value

    def pivot(self, r: int, j: int) -> None:
        prow = self.rows[r]
        piv = prow[j]
        if piv != 1:
            prow = {col: a / piv for col, a in prow.items()}
            self.rows[r] = prow
            self.rhs[r] /= piv
        b = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(j)
            if f is None:
                continue
            _axpy(row, prow, f)
            self.rhs[i] -= f * b
        f = self.cost.get(j)
        if f is not None:
            _axpy(self.cost, prow, f)
            self.value += f * b
        self.basis[r] = j
        self.pivots += 1

    def _entering(self, bland: bool) -> Optional[int]:
        candidates = [j for j, d in self.cost.items() if d > 0]
        if not candidates:
            return None
        if bland:
            return min(candidates)
        return min(candidates, key=lambda j: (-self.cost[j], j))

    def _leaving(self, j: int) -> Optional[int]:
        best: Optional[int] = None
        best_ratio = Fraction(0)
        for i, row in enumerate(self.rows):
            a = row.get(j)
            if a is None or a <= 0:
                continue
            ratio = self.rhs[i] / a
            if (
                best is None
                or ratio < best_ratio
                or (ratio == best_ratio and self.basis[i] < self.basis[best])
            ):
                best, best_ratio = i, ratio
        return best

    def optimize(self, max_pivots: int) -> LpStatus:
        bland = False
        while True:
            j = self._entering(bland)
            if j is None:
                return LpStatus.OPTIMAL
            r = self._leaving(j)
            if r is None:
                return LpStatus.UNBOUNDED
            degenerate = self.rhs[r] == 0
            self.pivot(r, j)
            bland = degenerate
            if self.pivots > max_pivots:
                raise InternalGuardError(f"simplex exceeded {max_pivots} pivots")

    def drive_out(self, artificial: set) -> None:
        """Pivot zero-level artificials out of the basis; drop redundant rows."""
        keep = []
        for r, j in enumerate(self.basis):
            if j not in artificial:
                keep.append(r)
                continue
            cols = [c for c in self.rows[r] if c not in artificial]
            if cols:
                self.pivot(r, min(cols))
                keep.append(r)
            else:
                logger.debug("dropping redundant row %d", r)
        self.rows = [self.rows[r] for r in keep]
        self.rhs = [self.rhs[r] for r in keep]
        self.basis = [self.basis[r] for r in keep]
        for row in self.rows:
            for a in artificial:
                row.pop(a, None)


def solve(lp: RationalLP, max_pivots: int = DEFAULT_MAX_PIVOTS) -> LpSolution:
    n = len(lp.variables)
    index = {key: i for i, key in enumerate(lp.variables)}
    sign = 1 if lp.sense is Sense.MAX else -1

    rows: List[Dict[int, Fraction]] = []
    rhs: List[Fraction] = []
    basis: List[int] = []
    row_sign: List[int] = []
    slack: List[Tuple[int, int]] = []
    artificial: List[int] = []
    ncols = n
    for con in lp.constraints:
        row = {index[key]: a for key, a in con.coeffs}
        b = con.rhs
        le = con.relation is Relation.LE
        sigma = 1
        if (le and b < 0) or (not le and b <= 0):
            row = {c: -a for c, a in row.items()}
            b, le, sigma = -b, not le, -1
        s = ncols
        ncols += 1
        if le:
            row[s] = ONE
            basis.append(s)
            slack.append((s, 1))
        else:
            row[s] = -ONE
            slack.append((s, -1))
            art = ncols
            ncols += 1
            row[art] = ONE
            basis.append(art)
            artificial.append(art)
        rows.append(row)
        rhs.append(b)
        row_sign.append(sigma)

    tab = _Tableau(rows, rhs, basis)
    if artificial:
        art_set = set(artificial)
        tab.set_objective({a: -ONE for a in artificial})
        tab.optimize(max_pivots)
        if tab.value < 0:
            logger.debug("phase one ended at %s: infeasible", tab.value)
            return LpSolution(status=LpStatus.INFEASIBLE, pivots=tab.pivots)
        tab.drive_out(art_set)

    tab.set_objective({index[key]: sign * c for key, c in lp.objective})
    status = tab.optimize(max_pivots)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status=status, pivots=tab.pivots)

    x = [Fraction(0)] * n
    for i, j in enumerate(tab.basis):
        if j < n:
            x[j] = tab.rhs[i]
    assignment = {key: x[i] for i, key in enumerate(lp.variables)}
    for con in lp.constraints:
        if not con.holds(assignment):
            raise InternalGuardError(f"simplex returned a point violating constraint {con.tag!r}")
    value = sign * tab.value
    if lp.objective_at(assignment) != value:
        raise InternalGuardError("simplex objective does not match its assignment")

    duals = tuple(
        sign * sigma * (-tab.cost.get(s, 0) * eps)
        for (s, eps), sigma in zip(slack, row_sign)
    )
    logger.debug("optimal value %s after %d pivots", value, tab.pivots)
    return LpSolution(
        status=LpStatus.OPTIMAL,
        value=value,
        assignment=MappingProxyType(assignment),
        duals=duals,
        pivots=tab.pivots,
    )


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


class DualCertificate:
    """A nonnegative Y on pairs k ≤ ℓ ≤ m, feasible or not.

    Y_{k,ℓ} and Y_{ℓ,k} cost the same and feed the same rows, so entries are
    stored on unordered pairs; a diagonal entry counts twice in its row.
    """

    def __init__(self, m: int, entries: Mapping[Pair, object]):
        if m < 1:
            raise PreconditionError("certificate needs m >= 1")
        canon: Dict[Pair, Fraction] = {}
        for (k, l), raw in entries.items():
            y = Fraction(raw)
            if y < 0:
                raise PreconditionError(f"negative entry at ({k}, {l})")
            if not (1 <= k <= m and 1 <= l <= m):
                raise PreconditionError(f"entry ({k}, {l}) outside [1, {m}]^2")
            if y:
                key = (min(k, l), max(k, l))
                canon[key] = canon.get(key, 0) + y
        self.m = m
        self._entries = MappingProxyType(canon)

    @property
    def entries(self) -> Mapping[Pair, Fraction]:
        return self._entries

    def iter_entries(self) -> Iterator[Tuple[Pair, Fraction]]:
        return iter(sorted(self._entries.items()))

    @cached_property
    def objective(self) -> Fraction:
        return sum((Fraction(2, k * l) * y for (k, l), y in self.iter_entries()), Fraction(0))

    def row_sums(self) -> Dict[int, Fraction]:
        sums = {k: Fraction(0) for k in range(1, self.m + 1)}
        for (k, l), y in self.iter_entries():
            sums[k] += y
            sums[l] += y
        return sums

    def to_json(self) -> str:
        payload = {
            "m": self.m,
            "entries": [[k, l, fraction_str(y)] for (k, l), y in self.iter_entries()],
            "objective": fraction_str(self.objective),
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "DualCertificate":
        data = json.loads(text)
        cert = cls(int(data["m"]), {(int(k), int(l)): parse_fraction(y) for k, l, y in data["entries"]})
        stated = data.get("objective")
        if stated is not None and parse_fraction(stated) != cert.objective:
            raise PreconditionError("stated objective does not match the entries")
        return cert


def check_dual_feasible(cert: DualCertificate) -> bool:
    sums = cert.row_sums()
    for k in range(1, cert.m + 1):
        if sums.get(k, 0) < phi(k):
            logger.debug("row %d short: %s < %d", k, sums.get(k, 0), phi(k))
            return False
    return True


def extract_certificate(m: int, lp: RationalLP, solution: LpSolution) -> DualCertificate:
    """Y from an optimal dual (its assignment) or primal (its row duals)."""
    if not solution.optimal:
        raise PreconditionError(f"cannot extract a certificate from a {solution.status.value} LP")
    if lp.sense is Sense.MIN:
        return DualCertificate(m, {key: y for key, y in solution.assignment.items() if y})
    entries = {con.tag: y for con, y in zip(lp.constraints, solution.duals) if y}
    return DualCertificate(m, entries)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def _require(m: int, minimum: int) -> None:
    if m < minimum:
        raise PreconditionError(f"m must be >= {minimum}, got {m}")


def _pair_primal(m: int, pairs: Sequence[Pair], uncovered: Iterable[int] = ()) -> RationalLP:
    cons = [
        constraint({k: 2} if k == l else {k: 1, l: 1}, Relation.LE, Fraction(2, k * l), tag=(k, l))
        for k, l in pairs
    ]
    return RationalLP.build(
        Sense.MAX,
        {k: phi(k) for k in range(1, m + 1)},
        cons,
        variables=range(1, m + 1),
        uncovered=uncovered,
    )


def _pair_dual(m: int, pairs: Sequence[Pair], uncovered: Iterable[int] = ()) -> RationalLP:
    rows: Dict[int, Dict[Pair, int]] = {k: {} for k in range(1, m + 1)}
    for k, l in pairs:
        if k == l:
            rows[k][(k, l)] = 2
        else:
            rows[k][(k, l)] = 1
            rows[l][(k, l)] = 1
    cons = [constraint(rows[k], Relation.GE, phi(k), tag=k) for k in range(1, m + 1)]
    objective = {(k, l): Fraction(2, k * l) for k, l in pairs}
    return RationalLP.build(Sense.MIN, objective, cons, variables=pairs, uncovered=uncovered)


def all_pairs(m: int) -> List[Pair]:
    return [(k, l) for k in range(1, m + 1) for l in range(k, m + 1)]


def build_primal(m: int) -> RationalLP:
    """max Σ φ(k)x_k s.t. x_k + x_ℓ ≤ 2/(kℓ) for 1 ≤ k ≤ ℓ ≤ m."""
    _require(m, 1)
    return _pair_primal(m, all_pairs(m))


def build_dual(m: int) -> RationalLP:
    _require(m, 1)
    return _pair_dual(m, all_pairs(m))


def _ceil_sqrt(n: int) -> int:
    r = isqrt(n)
    return r if r * r == n else r + 1


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def approx_support(m: int, eps: object) -> Tuple[Tuple[Pair, ...], Tuple[int, ...]]:
    """Pairs k ≤ ℓ ≤ m with (1−ε)m² ≤ k² + ℓ² ≤ (1+ε)m², and rows they miss.

    ℓ is clamped to m even where the annulus reaches beyond it.
    """
    _require(m, 2)
    eps = Fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    lower = (1 - eps) * m * m
    upper = (1 + eps) * m * m
    pairs: List[Pair] = []
    for k in range(1, m + 1):
        hi_sq = upper - k * k
        if hi_sq < k * k:
            break
        lo_sq = lower - k * k
        first = k if lo_sq <= k * k else max(k, _ceil_sqrt(_ceil(lo_sq)))
        last = min(m, isqrt(_floor(hi_sq)))
        pairs.extend((k, l) for l in range(first, last + 1))
    covered = {k for pair in pairs for k in pair}
    uncovered = tuple(k for k in range(1, m + 1) if k not in covered)
    return tuple(pairs), uncovered


def build_approx_dual(m: int, eps: object) -> RationalLP:
    """The dual restricted to ``approx_support``; ``uncovered`` rows make it infeasible."""
    pairs, uncovered = approx_support(m, eps)
    if uncovered:
        logger.debug("approximate dual m=%d eps=%s leaves rows %s uncovered", m, eps, uncovered[:8])
    return _pair_dual(m, pairs, uncovered)


def build_approx_primal(m: int, eps: object) -> RationalLP:
    """LP dual of ``build_approx_dual``; unbounded exactly when that one is infeasible."""
    pairs, uncovered = approx_support(m, eps)
    return _pair_primal(m, pairs, uncovered)
