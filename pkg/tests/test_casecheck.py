import pytest

from column_number import casecheck
from column_number.casecheck import Congruence, ResidueSystem
from column_number.errors import PreconditionError


def test_type2_claim_has_no_solutions():
    report = casecheck.check_type2()

    assert report.assignments_tested == 9
    assert report.solutions_found == 0
    assert report.witnesses == []


def test_type2_relaxing_parity_revives_solutions():
    report = casecheck.check_type2(relax=["b2"])

    assert report.relaxed == ["b2"]
    assert report.assignments_tested == 18
    assert report.solutions_found == 3
    assert all(w.residues["delta"] == w.residues["b2"] for w in report.witnesses)


@pytest.mark.parametrize("d, tested", [(3, 55728), (4, 7560)])
def test_type3_claims_have_no_solutions(d, tested):
    report = casecheck.check_type3(d)

    assert report.assignments_tested == tested
    assert report.solutions_found == 0
    assert report.configurations == []


def test_type3_relaxed_delta_only_allows_two_mod_six():
    report = casecheck.check_type3(4, relax=["delta"])

    assert report.solutions_found == 54
    assert report.configurations == [((0, 0, 1, 1), (1, 2))]
    assert len(report.witnesses) == casecheck.WITNESS_CAP
    assert {w.residues["delta"] % 6 for w in report.witnesses} == {2}


def test_relaxations_are_recorded_sorted():
    report = casecheck.check_type3(3, relax=["b2", "a2", "b2"])

    assert report.relaxed == ["a2", "b2"]
    assert report.assignments_tested == 55728 * 4


def test_invalid_requests_are_rejected():
    with pytest.raises(PreconditionError):
        casecheck.check_type3(5)
    with pytest.raises(PreconditionError):
        casecheck.check_type3(4, relax=["b1"])
    with pytest.raises(PreconditionError):
        casecheck.check_type2(relax=["delta"])


def test_slack_tuples():
    system = ResidueSystem(modulus=6, unknowns=(), congruences=(), weights=(2, 2, 1, 1), target=2)

    assert sorted(system.slack_tuples()) == [(0, 0, 0, 2), (0, 0, 1, 1), (0, 0, 2, 0), (0, 1, 0, 0), (1, 0, 0, 0)]
    assert ResidueSystem(modulus=6, unknowns=(), congruences=(), weights=(1,), target=-1).slack_tuples() == []


def test_congruence_with_slack():
    c = Congruence("delta", (("b3", 2), ("a2", -3)), slack=2)

    assert c.holds({"delta": 4, "b3": 1, "a2": 1}, (0, 0, 0), 6) is False
    assert c.holds({"delta": 4, "b3": 1, "a2": 1}, (0, 0, 5), 6)
    assert c.holds({"delta": 2, "b3": 1, "a2": 0}, (0, 0, 0), 6)


def test_type3_target():
    assert casecheck.type3_target(4, casecheck.C_TABLE[(1, 2)]) == 2
    assert casecheck.type3_target(3, casecheck.C_TABLE[(2, 1)]) == 4
