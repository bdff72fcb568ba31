from fractions import Fraction
from math import gcd

import numpy as np
import pytest

from column_number import numtheory as nt
from column_number.errors import PreconditionError


def test_phi_mobius_tau_small_values():
    assert [nt.phi(k) for k in range(1, 11)] == [1, 1, 2, 2, 4, 2, 6, 4, 6, 4]
    assert [nt.mobius(k) for k in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    assert [nt.tau_unitary(k) for k in (1, 12, 30, 64)] == [1, 4, 8, 2]


def test_nonpositive_arguments_are_rejected():
    with pytest.raises(PreconditionError):
        nt.phi(0)
    with pytest.raises(PreconditionError):
        nt.sum_phi(-3)


def test_trial_division_agrees_with_brute_force(small_sieve):
    assert small_sieve.limit == 100

    for k in range(95, 320):
        brute = sum(1 for j in range(1, k + 1) if gcd(j, k) == 1)
        assert nt.phi(k) == brute
    assert nt.distinct_primes(1_000_003 * 2) == [2, 1_000_003]
    assert nt.mobius(2 * 3 * 101) == -1
    assert nt.sum_phi(150) == sum(nt.phi(k) for k in range(1, 151))


def test_squarefree_divisors_carry_mobius_signs():
    divs = dict(nt.squarefree_divisors(12))

    assert divs == {1: 1, 2: -1, 3: -1, 6: 1}


def test_phi_interval_matches_brute_force(rng):
    for _ in range(1000):
        k = int(rng.integers(1, 10_001))
        a = int(rng.integers(-100_000, 100_001))
        b = int(rng.integers(a - 1, 100_001))

        brute = int(np.count_nonzero(np.gcd(np.arange(a, b + 1, dtype=np.int64), k) == 1))

        assert nt.phi_interval(a, b, k) == brute


def test_phi_interval_empty_and_inverted():
    assert nt.phi_interval(5, 4, 3) == 0
    with pytest.raises(PreconditionError):
        nt.phi_interval(6, 4, 3)


def test_phi_interval_error_bounded_by_unitary_divisors(rng):
    for _ in range(1000):
        k = int(rng.integers(1, 5000))
        a = int(rng.integers(-10_000, 10_000))
        b = a + int(rng.integers(0, 10_000))

        assert abs(nt.phi_interval_error(a, b, k)) <= nt.tau_unitary(k)


def test_summatory_values():
    assert nt.sum_phi(10) == 32
    assert nt.sum_tau(6) == 1 + 2 + 2 + 2 + 2 + 4
    assert nt.sum_phi_over_k(4) == Fraction(1) + Fraction(1, 2) + Fraction(2, 3) + Fraction(2, 4)
    assert nt.phi_range_sum(3, 5) == 2 + 2 + 4
    assert nt.phi_range_sum(6, 5) == 0


def test_reciprocal_sums_exact():
    assert nt.sum_phi_over_k(5) == Fraction(52, 15)
    assert nt.sum_phi_over_k2(1) == 1
    assert nt.sum_phi_over_k2(3) == Fraction(53, 36)
    assert nt.sum_phi_over_k2(4) == Fraction(53, 36) + Fraction(2, 16)


def test_check_lemma21_fails_at_one():
    assert nt.check_lemma21(1, Fraction(1, 1000)) is False


def test_constant_enclosures_are_consistent():
    assert nt.PI.contains(Fraction("3.14159265358979323846264338"))
    assert nt.ZETA_2.contains(Fraction("1.64493406684822643647241516"))
    assert nt.TAU_SUM_CONSTANT.lo > Fraction("1.2943")
    assert nt.TAU_SUM_CONSTANT.hi < Fraction("1.2944")


def test_zeta_prime_enclosure_against_mpmath():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40

    value = Fraction(str(mpmath.zeta(2, 1, 1)))

    assert abs(value - nt.ZETA_PRIME_2.lo) < Fraction(1, 10**23)


def test_tau_sum_bound_fails_at_one_only():
    assert nt.sum_tau(1) > nt.tau_sum_bound(1).hi


@pytest.mark.slow
def test_tau_sum_bound_holds_up_to_ten_thousand():
    for x in range(2, 10_001):
        assert nt.sum_tau(x) <= nt.tau_sum_bound(x).lo, x


@pytest.mark.slow
def test_phi_sum_error_bounds_hold_up_to_ten_thousand():
    running = Fraction(0)
    for x in range(1, 10_001):
        running += Fraction(nt.phi(x), x)
        s = nt.sum_phi(x)
        main1, main2 = nt.phi_sum_main(x), nt.phi_over_k_main(x)
        err1, err2 = nt.phi_sum_error_bound(x), nt.phi_over_k_error_bound(x)

        assert s - main1.lo <= err1.lo and main1.hi - s <= err1.lo, x
        assert running - main2.lo <= err2.lo and main2.hi - running <= err2.lo, x


@pytest.mark.slow
def test_lemma21_rows_pass_from_1880_to_5000():
    rows = list(nt.lemma21_rows(1880, 5000, Fraction(1, 1000)))

    assert len(rows) == 3121
    assert all(r.passed for r in rows)
    assert rows[0].lhs1 == nt.sum_phi(1880)
    assert rows[-1].lhs2 == nt.sum_phi_over_k(5000)


def test_check_lemma21_agrees_with_rows():
    eps = Fraction(1, 1000)

    row = next(nt.lemma21_rows(2000, 2000, eps))

    assert row.passed == nt.check_lemma21(2000, eps)


def test_analytic_threshold_for_one_thousandth():
    assert nt.analytic_threshold(Fraction(1, 1000)) == 41568


@pytest.mark.slow
def test_find_x0_is_tight_and_valid():
    eps = Fraction(1, 1000)

    x0 = nt.find_x0(eps)

    assert x0 <= 1880
    assert nt.check_lemma21(x0, eps)
    assert not nt.check_lemma21(x0 - 1, eps)
