"""Brute-force baselines for small Δ and small m.

``best_typed_matrix`` maximises the column count over Δ-submodular
matrices of type m by depth-first search over rows k = 1, 2, …, each
either absent or a pair of endpoints prime to k. Endpoint determinants
against the rows already fixed bound the next row's range, so every leaf
is Δ-submodular by construction.

``vertex_enumerate_lp_value`` recomputes z_m without the simplex solver.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import InternalGuardError, PreconditionError
from .lp import build_primal
from .model import ABSENT, TypedMatrix, column_count, delta_endpoints
from .numtheory import phi_interval
from .reduction import type_cap

logger = logging.getLogger(__name__)

EXHAUSTIVE_DELTA_LIMIT = 30
CAVEAT = (
    "maximum over matrices of type m with endpoints in the window; "
    "equality with g(Δ,2) is not asserted"
)

Row = Tuple[int, int, int]
SearchKey = Tuple[int, int, Tuple[int, ...], Tuple[int, ...]]


class SearchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: int = Field(ge=1)
    m_max: Optional[int] = None
    window: Optional[int] = None
    normalize_a1: bool = True
    allow_large: bool = False

    @model_validator(mode="after")
    def _limits(self) -> "SearchConfig":
        cap = type_cap(self.delta)
        if self.m_max is not None and not 1 <= self.m_max <= cap:
            raise ValueError(f"m_max must lie in [1, {cap}] for Δ={self.delta}")
        if self.window is not None and self.window < 0:
            raise ValueError("window must be nonnegative")
        if self.delta > EXHAUSTIVE_DELTA_LIMIT and not self.allow_large:
            raise ValueError(f"Δ > {EXHAUSTIVE_DELTA_LIMIT} needs allow_large")
        return self

    @property
    def rows(self) -> int:
        return self.m_max if self.m_max is not None else max(1, type_cap(self.delta))

    @property
    def bound(self) -> int:
        return self.window if self.window is not None else 2 * self.delta


class OracleResult(BaseModel):
    delta: int
    m_max: int
    window: int
    count: int
    witness: TypedMatrix
    nodes_explored: int
    caveat: str = CAVEAT


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class _Search:
    def __init__(self, cfg: SearchConfig):
        self.delta = cfg.delta
        self.m_max = cfg.rows
        self.window = cfg.bound
        self.normalize = cfg.normalize_a1
        self.rest_cap = [0] * (self.m_max + 2)
        for k in range(self.m_max, 0, -1):
            self.rest_cap[k] = self.rest_cap[k + 1] + self.delta // k + 1
        self.best: Optional[SearchKey] = None
        self.nodes = 0

    def options(self, k: int, rows: Sequence[Row]) -> List[Tuple[int, int]]:
        d = self.delta
        lo, hi = -self.window, self.window
        for l, al, bl in rows:
            lo = max(lo, _ceil_div(k * bl - d, l))
            hi = min(hi, (d + k * al) // l)
        a_lo, a_hi = lo, hi
        if self.normalize and not rows:
            # shear (k, j) -> (k, j + tk) fixes the first present row's a into [0, k)
            a_lo, a_hi = max(lo, 0), min(hi, k - 1)
        span = d // k
        out = []
        for a in range(a_lo, a_hi + 1):
            if gcd(a, k) != 1:
                continue
            for b in range(a, min(hi, a + span) + 1):
                if gcd(b, k) == 1:
                    out.append((a, b))
        return out

    def _key(self, rows: Sequence[Row], count: int) -> SearchKey:
        m = rows[-1][0]
        fixed = {k: (a, b) for k, a, b in rows}
        a = tuple(fixed.get(k, ABSENT)[0] for k in range(1, m + 1))
        b = tuple(fixed.get(k, ABSENT)[1] for k in range(1, m + 1))
        return (-count, m, a, b)

    def offer(self, rows: Sequence[Row], count: int) -> None:
        if not rows:
            return
        key = self._key(rows, count)
        if self.best is None or key < self.best:
            self.best = key

    def dfs(self, k: int, rows: List[Row], count: int) -> None:
        self.nodes += 1
        if k > self.m_max:
            self.offer(rows, count)
            return
        if self.best is not None and count + self.rest_cap[k] < -self.best[0]:
            return
        for a, b in self.options(k, rows):
            rows.append((k, a, b))
            self.dfs(k + 1, rows, count + phi_interval(a, b, k))
            rows.pop()
        self.dfs(k + 1, rows, count)

    def roots(self) -> List[Optional[Tuple[int, int]]]:
        return [*self.options(1, []), None]

    def explore(self, root: Optional[Tuple[int, int]]) -> None:
        self.nodes += 1
        if root is None:
            self.dfs(2, [], 1)
        else:
            a, b = root
            self.dfs(2, [(1, a, b)], 1 + phi_interval(a, b, 1))


def _explore_root(cfg: SearchConfig, root: Optional[Tuple[int, int]]) -> Tuple[Optional[SearchKey], int]:
    search = _Search(cfg)
    search.explore(root)
    return search.best, search.nodes


def best_typed_matrix(cfg: SearchConfig, jobs: int = 1) -> OracleResult:
    search = _Search(cfg)
    roots = search.roots()
    if jobs > 1 and len(roots) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(roots))) as pool:
            results = list(pool.map(_explore_root, [cfg] * len(roots), roots))
        keys = [key for key, _ in results if key is not None]
        best = min(keys) if keys else None
        nodes = sum(n for _, n in results)
    else:
        for root in roots:
            search.explore(root)
        best, nodes = search.best, search.nodes
    if best is None:
        raise InternalGuardError(f"search for Δ={cfg.delta} produced no matrix")

    neg_count, m, a, b = best
    witness = TypedMatrix(m=m, a=a, b=b)
    if column_count(witness) != -neg_count or delta_endpoints(witness) > cfg.delta:
        raise InternalGuardError("oracle witness does not reproduce its count")
    logger.info(
        "Δ=%d m<=%d window=%d: best count %d at type %d (%d nodes)",
        cfg.delta,
        search.m_max,
        search.window,
        -neg_count,
        m,
        nodes,
    )
    return OracleResult(
        delta=cfg.delta,
        m_max=search.m_max,
        window=search.window,
        count=-neg_count,
        witness=witness,
        nodes_explored=nodes,
    )


# ---------------------------------------------------------------------------
# Vertex enumeration for z_m
# ---------------------------------------------------------------------------

VERTEX_LIMIT = 6
FLOAT_TOL = 1e-9
CHUNK = 20_000


def _solve_exact(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Optional[List[Fraction]]:
    n = len(b)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            return None
        M[col], M[pivot] = M[pivot], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [v - f * w for v, w in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def vertex_enumerate_lp_value(m: int) -> Fraction:
    """z_m as the best objective over all basic feasible points."""
    if not 1 <= m <= VERTEX_LIMIT:
        raise PreconditionError(f"vertex enumeration supports 1 <= m <= {VERTEX_LIMIT}")
    lp = build_primal(m)
    exact_rows: List[List[Fraction]] = []
    exact_rhs: List[Fraction] = []
    for con in lp.constraints:
        row = [Fraction(0)] * m
        for key, a in con.coeffs:
            row[key - 1] = a
        exact_rows.append(row)
        exact_rhs.append(con.rhs)
    for j in range(m):
        row = [Fraction(0)] * m
        row[j] = Fraction(-1)
        exact_rows.append(row)
        exact_rhs.append(Fraction(0))
    cost = [Fraction(0)] * m
    for key, c in lp.objective:
        cost[key - 1] = c

    A = np.array(exact_rows, dtype=float)
    b = np.array(exact_rhs, dtype=float)
    c = np.array(cost, dtype=float)
    combos = np.array(list(itertools.combinations(range(len(b)), m)), dtype=np.int64)

    candidates: List[Tuple[float, Tuple[int, ...]]] = []
    for start in range(0, len(combos), CHUNK):
        chunk = combos[start : start + CHUNK]
        mats = A[chunk]
        regular = np.abs(np.linalg.det(mats)) > FLOAT_TOL
        if not regular.any():
            continue
        chunk = chunk[regular]
        xs = np.linalg.solve(mats[regular], b[chunk][..., None])[..., 0]
        feasible = np.all(xs @ A.T <= b + FLOAT_TOL, axis=1)
        candidates.extend(zip((xs[feasible] @ c).tolist(), map(tuple, chunk[feasible].tolist())))
    if not candidates:
        raise InternalGuardError(f"no basic feasible point found for m={m}")

    top = max(v for v, _ in candidates)
    best: Optional[Fraction] = None
    seen = set()
    for value, combo in candidates:
        if value < top - 1e-7:
            continue
        x = _solve_exact([exact_rows[i] for i in combo], [exact_rhs[i] for i in combo])
        if x is None or tuple(x) in seen:
            continue
        seen.add(tuple(x))
        if any(sum(r * v for r, v in zip(row, x)) > rhs for row, rhs in zip(exact_rows, exact_rhs)):
            continue
        z = sum(ci * xi for ci, xi in zip(cost, x))
        if best is None or z > best:
            best = z
    if best is None:
        raise InternalGuardError(f"no exact vertex confirmed near the float optimum for m={m}")
    logger.debug("vertex enumeration m=%d: %d candidates, z=%s", m, len(seen), best)
    return best
