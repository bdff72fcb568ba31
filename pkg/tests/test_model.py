import pytest

from column_number import model
from column_number.errors import PreconditionError
from column_number.model import ColumnSet, FamilyKind, TypedMatrix


@pytest.mark.parametrize("delta", range(1, 201))
def test_family_f1_has_delta_plus_two_columns(delta):
    M = model.family(FamilyKind.F1, delta)

    assert model.column_count(M) == delta + 2
    assert model.delta_endpoints(M) == delta
    assert model.is_generic(model.enumerate_columns(M))


@pytest.mark.parametrize("delta", range(3, 201, 2))
def test_family_f2_has_delta_plus_three_columns(delta):
    M = model.family(FamilyKind.F2, delta)

    assert model.column_count(M) == delta + 3
    assert model.delta_endpoints(M) == delta
    assert model.is_generic(model.enumerate_columns(M))


@pytest.mark.parametrize("delta", [d for d in range(14, 201) if d % 12 in (2, 8)])
def test_family_f3_has_delta_plus_four_columns(delta):
    M = model.family(FamilyKind.F3, delta)
    A = model.enumerate_columns(M)

    assert model.column_count(M) == len(A) == delta + 4
    assert model.delta_endpoints(M) == model.delta_bruteforce(A) == delta
    assert model.is_generic(A)


@pytest.mark.parametrize(
    "kind, delta",
    [(FamilyKind.F2, 8), (FamilyKind.F2, 1), (FamilyKind.F3, 2), (FamilyKind.F3, 15), (FamilyKind.F1, 0)],
)
def test_family_rejects_unsupported_delta(kind, delta):
    with pytest.raises(PreconditionError):
        model.family(kind, delta)


def test_family_accepts_string_kind():
    assert model.family("F1", 4) == TypedMatrix(m=1, a=(0,), b=(4,))


def test_enumerate_columns_skips_non_coprime_entries():
    M = TypedMatrix(m=2, a=(0, 1), b=(2, 5))

    A = model.enumerate_columns(M)

    assert A.columns == ((0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 3), (2, 5))
    assert model.column_count(M) == len(A)


def test_normalize_tightens_ends_and_marks_absent_rows():
    M = TypedMatrix(m=3, a=(0, 2, 3), b=(4, 2, 8))

    N = model.normalize(M)

    assert N == TypedMatrix(m=3, a=(0, 1, 4), b=(4, 0, 8))
    assert N.present() == [1, 3]
    assert model.enumerate_columns(N) == model.enumerate_columns(M)


def test_random_typed_matrices_count_generic_and_delta(rng):
    checked = 0
    while checked < 1000:
        m = int(rng.integers(1, 11))
        a = [int(v) for v in rng.integers(-50, 51, size=m)]
        b = [int(rng.integers(lo - 1, 51)) for lo in a]
        M = TypedMatrix(m=m, a=tuple(a), b=tuple(b))
        if not model.normalize(M).present():
            continue
        A = model.enumerate_columns(M)

        assert model.column_count(M) == len(A)
        assert model.is_generic(A)
        assert model.delta_endpoints(M) == model.delta_bruteforce(A)
        checked += 1


def test_delta_endpoints_needs_a_present_row():
    with pytest.raises(PreconditionError):
        model.delta_endpoints(TypedMatrix(m=2, a=(1, 2), b=(0, 2)))


def test_typed_matrix_validates_lengths():
    with pytest.raises(ValueError):
        TypedMatrix(m=2, a=(0,), b=(1, 1))


def test_column_set_rejects_duplicates_and_sorts():
    A = ColumnSet.from_pairs([(2, 1), (0, 1), (1, 0)])

    assert A.columns == ((0, 1), (1, 0), (2, 1))
    assert (2, 1) in A
    with pytest.raises(ValueError):
        ColumnSet.from_pairs([(1, 1), (1, 1)])


def test_column_set_json_forms():
    assert ColumnSet.from_json('{"columns": [[1, 2], [0, 1]]}') == ColumnSet.from_json("[[0, 1], [1, 2]]")
    assert ColumnSet.from_pairs([(3, -1), (0, 1)]).to_json() == "[[0, 1], [3, -1]]"


def test_generic_and_rank():
    assert model.is_generic(ColumnSet.from_pairs([(1, 0), (0, 1), (1, 1)]))
    assert not model.is_generic(ColumnSet.from_pairs([(1, 0), (0, 1), (-2, 0)]))
    assert model.rank(ColumnSet.from_pairs([(1, 2), (2, 4)])) == 1
    assert model.rank(ColumnSet.from_pairs([(0, 0)])) == 0
    assert model.rank(ColumnSet.from_pairs([(1, 2), (0, 1)])) == 2
    with pytest.raises(PreconditionError):
        model.is_generic(ColumnSet.from_pairs([(1, 0)]))


def test_delta_bruteforce_handles_large_entries():
    big = 2**40
    A = ColumnSet.from_pairs([(big, 1), (0, 1), (1, big)])

    assert model.delta_bruteforce(A) == big * big - 1


def test_g_tilde_agrees_with_case_form():
    for delta in range(1, 1001):
        assert model.g_tilde(delta) == model.g_tilde_cases(delta)


def test_type3_extremal_examples():
    M = model.type3_extremal(14, 10)

    assert M == TypedMatrix(m=3, a=(0, 5, 10), b=(8, 11, 14))
    assert model.column_count(M) == 18
    assert model.delta_endpoints(M) == 14
    assert model.column_count(model.type3_extremal(20, 16)) == 24


@pytest.mark.parametrize("delta, a3", [(15, 10), (14, 11), (14, 7), (20, 19)])
def test_type3_extremal_rejects_bad_parameters(delta, a3):
    with pytest.raises(PreconditionError):
        model.type3_extremal(delta, a3)


def test_type2_extremal():
    M = model.type2_extremal(8)

    assert M == TypedMatrix(m=2, a=(0, 3), b=(5, 7))
    assert model.column_count(M) == 10
    assert model.delta_endpoints(M) == 8
    with pytest.raises(PreconditionError):
        model.type2_extremal(6)
