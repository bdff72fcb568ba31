"""Finite residue checks behind the type-2 and type-3 column bounds.

Each claim reduces to a system of congruences modulo 6 over residues of
the endpoint data together with nonnegative slacks e = (e₁, …, e₄) tied
by a weighted equation Σ wᵢeᵢ = t. Every equation in the system holds
over the integers, so an unsatisfiable residue system rules out the
integer configuration.

Type 3 (a matrix with |M| = Δ + d, d ∈ {3, 4}, a₁ = 0, a₂ and b₂ odd,
a₃ and b₃ prime to 3) gives, from the endpoint determinants and the
exact coprime counts on each row:

    Δ ≡ b₃ + e₁,  Δ ≡ 3b₁ − a₃ + e₂,  Δ ≡ 2b₃ − 3a₂ + e₃,  Δ ≡ 3b₂ − 2a₃ + e₄,
    2e₁ + 2e₂ + e₃ + e₄ = 6((4 − d) − c(a₃, b₃)),

where c depends only on (a₃ mod 3, b₃ mod 3).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, Field

from .errors import PreconditionError

logger = logging.getLogger(__name__)

MODULUS = 6
WITNESS_CAP = 50

ODD = (1, 3, 5)
EVEN = (0, 2, 4)
ALL = tuple(range(MODULUS))
PRIME_TO_3 = tuple(r for r in ALL if r % 3)

# c(a₃, b₃, 3) by (a₃ mod 3, b₃ mod 3)
C_TABLE: Dict[Tuple[int, int], Fraction] = {
    (2, 1): Fraction(1, 3),
    (1, 1): Fraction(0),
    (2, 2): Fraction(0),
    (1, 2): Fraction(-1, 3),
}


@dataclass(frozen=True)
class Congruence:
    """lhs ≡ Σ coeff·var + e[slack] (mod modulus); slack is an index or None."""

    lhs: str
    terms: Tuple[Tuple[str, int], ...]
    slack: Optional[int] = None

    def holds(self, values: Mapping[str, int], e: Sequence[int], modulus: int) -> bool:
        rhs = sum(c * values[v] for v, c in self.terms)
        if self.slack is not None:
            rhs += e[self.slack]
        return (values[self.lhs] - rhs) % modulus == 0


@dataclass(frozen=True)
class ResidueSystem:
    modulus: int
    unknowns: Tuple[Tuple[str, Tuple[int, ...]], ...]
    congruences: Tuple[Congruence, ...]
    weights: Tuple[int, ...] = ()
    target: int = 0

    def slack_tuples(self) -> List[Tuple[int, ...]]:
        """All e ≥ 0 with Σ wᵢeᵢ = target; each eᵢ ≤ target/wᵢ."""
        if self.target < 0:
            return []
        ranges = [range(self.target // w + 1) for w in self.weights]
        return [
            e
            for e in itertools.product(*ranges)
            if sum(w * x for w, x in zip(self.weights, e)) == self.target
        ]

    def assignments(self) -> Iterator[Tuple[Dict[str, int], Tuple[int, ...]]]:
        names = [name for name, _ in self.unknowns]
        for e in self.slack_tuples():
            for combo in itertools.product(*(residues for _, residues in self.unknowns)):
                yield dict(zip(names, combo)), e

    def satisfied(self, values: Mapping[str, int], e: Sequence[int]) -> bool:
        return all(c.holds(values, e, self.modulus) for c in self.congruences)


class Witness(BaseModel):
    residues: Dict[str, int]
    e: Tuple[int, ...] = ()


class CaseReport(BaseModel):
    claim: str
    d: Optional[int] = None
    relaxed: List[str] = Field(default_factory=list)
    assignments_tested: int = 0
    solutions_found: int = 0
    witnesses: List[Witness] = Field(default_factory=list)
    # distinct (e, (a₃ mod 3, b₃ mod 3)) among solutions
    configurations: List[Tuple[Tuple[int, ...], Tuple[int, int]]] = Field(default_factory=list)

    def absorb(self, system: ResidueSystem) -> None:
        configs = set(self.configurations)
        for values, e in system.assignments():
            self.assignments_tested += 1
            if not system.satisfied(values, e):
                continue
            self.solutions_found += 1
            if len(self.witnesses) < WITNESS_CAP:
                self.witnesses.append(Witness(residues=values, e=e))
            if "a3" in values:
                configs.add((e, (values["a3"] % 3, values["b3"] % 3)))
        self.configurations = sorted(configs)


def _check_relaxations(relax: Iterable[str], allowed: Sequence[str]) -> List[str]:
    out = sorted(set(relax))
    for name in out:
        if name not in allowed:
            raise PreconditionError(f"cannot relax {name!r}; choose from {', '.join(allowed)}")
    return out


def check_type2(relax: Iterable[str] = ()) -> CaseReport:
    """A type-2 matrix with even Δ and Δ + 3 columns forces b₂ = Δ with b₂ odd.

    Relaxing ``b2`` drops its parity and revives solutions b₂ ≡ Δ.
    """
    relaxed = _check_relaxations(relax, ("b2",))
    system = ResidueSystem(
        modulus=MODULUS,
        unknowns=(("delta", EVEN), ("b2", ALL if "b2" in relaxed else ODD)),
        congruences=(Congruence("delta", (("b2", 1),)),),
    )
    report = CaseReport(claim="type2", relaxed=relaxed)
    report.absorb(system)
    logger.info("type2: %d assignments, %d solutions", report.assignments_tested, report.solutions_found)
    return report


def _type3_congruences() -> Tuple[Congruence, ...]:
    return (
        Congruence("delta", (("b3", 1),), slack=0),
        Congruence("delta", (("b1", 3), ("a3", -1)), slack=1),
        Congruence("delta", (("b3", 2), ("a2", -3)), slack=2),
        Congruence("delta", (("b2", 3), ("a3", -2)), slack=3),
    )


def type3_target(d: int, c: Fraction) -> Fraction:
    return 6 * ((4 - d) - c)


def check_type3(d: int, relax: Iterable[str] = ()) -> CaseReport:
    """No type-3 matrix has Δ + d columns for the excluded residues of Δ.

    d = 3 admits Δ ≡ 0, 4 (mod 6); d = 4 admits every Δ ≢ 2 (mod 6).
    Relaxing ``delta`` admits all residues, ``a2``/``b2`` drop parity.
    """
    if d not in (3, 4):
        raise PreconditionError(f"d must be 3 or 4, got {d}")
    relaxed = _check_relaxations(relax, ("delta", "a2", "b2"))
    if "delta" in relaxed:
        deltas = ALL
    else:
        deltas = (0, 4) if d == 3 else (0, 1, 3, 4, 5)

    report = CaseReport(claim="type3", d=d, relaxed=relaxed)
    for (r3a, r3b), c in sorted(C_TABLE.items()):
        t = type3_target(d, c)
        if t < 0:
            logger.debug("d=%d c=%s: target %s negative, class impossible", d, c, t)
            continue
        system = ResidueSystem(
            modulus=MODULUS,
            unknowns=(
                ("delta", deltas),
                ("b1", ALL),
                ("a2", ALL if "a2" in relaxed else ODD),
                ("b2", ALL if "b2" in relaxed else ODD),
                ("a3", tuple(r for r in PRIME_TO_3 if r % 3 == r3a)),
                ("b3", tuple(r for r in PRIME_TO_3 if r % 3 == r3b)),
            ),
            congruences=_type3_congruences(),
            weights=(2, 2, 1, 1),
            target=int(t),
        )
        report.absorb(system)
    logger.info(
        "type3 d=%d: %d assignments, %d solutions", d, report.assignments_tested, report.solutions_found
    )
    return report
