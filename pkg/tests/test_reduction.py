import pytest

from column_number import model, reduction
from column_number.errors import PreconditionError
from column_number.model import ColumnSet, FamilyKind


def _det(U):
    (p, q), (r, s) = U
    return p * s - q * r


@pytest.mark.parametrize("v", [(1, 0), (0, 1), (3, 5), (-4, 7), (12, -5)])
def test_unimodular_completion_has_determinant_one(v):
    U = reduction.unimodular_completion(v)

    assert U[0] == v
    assert _det(U) == 1


def test_unimodular_completion_rejects_imprimitive():
    with pytest.raises(PreconditionError):
        reduction.unimodular_completion((2, 4))


def test_caps():
    assert reduction.type_cap(2) == 1
    assert reduction.type_cap(7) == 3
    assert reduction.type_cap(100) == 12
    assert reduction.width_limit(1) == 6


def test_width_in_direction():
    A = ColumnSet.from_pairs([(0, 1), (1, 0), (1, 1)])

    assert reduction.width_in_direction(A, (1, 0)) == 2
    assert reduction.width_in_direction(A, (1, 1)) == 4
    with pytest.raises(PreconditionError):
        reduction.width_in_direction(A, (0, 0))


def test_thin_direction_is_within_limit():
    A = model.enumerate_columns(model.family(FamilyKind.F2, 7))

    thin = reduction.find_thin_direction(A, 7)

    assert thin.width == reduction.width_in_direction(A, thin.v)
    assert thin.width**2 <= reduction.width_limit(7)


def test_reduce_family_member_keeps_columns():
    A = model.enumerate_columns(model.family(FamilyKind.F2, 7))

    M = reduction.reduce(A, 7)

    assert model.column_count(M) >= len(A)
    assert model.delta_endpoints(M) <= 7
    assert M.m <= reduction.type_cap(7)


def test_reduce_sheared_input():
    A = model.enumerate_columns(model.type3_extremal(14, 10))
    B = reduction.transform(A, ((2, 1), (1, 1)), [k % 2 == 0 for k in range(len(A))])

    M = reduction.reduce(B, 14)

    assert model.column_count(M) >= 18
    assert model.delta_endpoints(M) <= 14


def test_random_unimodular_is_unimodular(rng):
    for _ in range(50):
        assert abs(_det(reduction.random_unimodular(rng))) == 1


@pytest.mark.slow
def test_reduce_survives_random_unimodular_transforms(rng):
    samples = [(FamilyKind.F1, d) for d in range(2, 40)]
    samples += [(FamilyKind.F2, d) for d in range(3, 40, 2)]
    samples += [(FamilyKind.F3, d) for d in (14, 20, 26, 32, 38)]

    for _ in range(200):
        kind, delta = samples[int(rng.integers(len(samples)))]
        A = model.enumerate_columns(model.family(kind, delta))
        U = reduction.random_unimodular(rng)
        flips = rng.integers(0, 2, size=len(A)).astype(bool)
        B = reduction.transform(A, U, flips)

        M = reduction.reduce(B, delta)

        assert model.column_count(M) >= len(A)
        assert model.delta_endpoints(M) <= delta
        assert M.m <= reduction.type_cap(delta)


def test_reduce_rejects_bad_inputs():
    generic = model.enumerate_columns(model.family(FamilyKind.F1, 5))

    with pytest.raises(PreconditionError):
        reduction.reduce(generic, 1)
    with pytest.raises(PreconditionError):
        reduction.reduce(generic, 4)
    with pytest.raises(PreconditionError):
        reduction.reduce(ColumnSet.from_pairs([(1, 0), (0, 1), (2, 0)]), 10)
    with pytest.raises(PreconditionError):
        reduction.reduce(ColumnSet.from_pairs([(1, 2), (2, 4)]), 10)
