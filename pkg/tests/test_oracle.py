from fractions import Fraction

import pytest

from column_number import lp, model, oracle
from column_number.errors import PreconditionError
from column_number.oracle import SearchConfig
from column_number.reduction import type_cap


def test_search_config_limits():
    with pytest.raises(ValueError):
        SearchConfig(delta=7, m_max=4)
    with pytest.raises(ValueError):
        SearchConfig(delta=31)
    with pytest.raises(ValueError):
        SearchConfig(delta=5, window=-1)
    cfg = SearchConfig(delta=31, m_max=1, allow_large=True)
    assert cfg.rows == 1
    assert cfg.bound == 62


def test_delta_two_gives_four_columns():
    result = oracle.best_typed_matrix(SearchConfig(delta=2))

    assert result.count == 4
    assert result.m_max == 1
    assert model.column_count(result.witness) == 4


def test_delta_seven_reaches_the_odd_family():
    result = oracle.best_typed_matrix(SearchConfig(delta=7))

    assert result.count >= 10
    assert model.delta_endpoints(result.witness) <= 7
    assert "not asserted" in result.caveat


@pytest.mark.parametrize("delta", range(3, 13))
def test_counts_reach_the_conjectured_value(delta):
    result = oracle.best_typed_matrix(SearchConfig(delta=delta))

    assert result.count >= model.g_tilde(delta)


@pytest.mark.parametrize("delta", range(3, 13))
def test_counts_up_to_type_three_match_the_conjectured_value(delta):
    cfg = SearchConfig(delta=delta, m_max=min(3, type_cap(delta)))

    assert oracle.best_typed_matrix(cfg).count == model.g_tilde(delta)


def test_delta_eight_witness_is_type_three():
    result = oracle.best_typed_matrix(SearchConfig(delta=8, m_max=3))

    assert result.count == 12
    assert result.witness == model.type3_extremal(8, 7)


@pytest.mark.parametrize("delta", [5, 8])
def test_wider_window_does_not_change_the_count(delta):
    narrow = oracle.best_typed_matrix(SearchConfig(delta=delta))
    wide = oracle.best_typed_matrix(SearchConfig(delta=delta, window=3 * delta))

    assert wide.count == narrow.count


def test_normalization_does_not_change_the_count():
    plain = oracle.best_typed_matrix(SearchConfig(delta=5, normalize_a1=False))
    normalized = oracle.best_typed_matrix(SearchConfig(delta=5))

    assert plain.count == normalized.count
    assert plain.nodes_explored > normalized.nodes_explored


def test_parallel_search_matches_serial():
    serial = oracle.best_typed_matrix(SearchConfig(delta=6))
    parallel = oracle.best_typed_matrix(SearchConfig(delta=6), jobs=2)

    assert parallel.count == serial.count
    assert parallel.witness == serial.witness


@pytest.mark.parametrize("m", range(1, 7))
def test_vertex_enumeration_matches_simplex(m):
    assert oracle.vertex_enumerate_lp_value(m) == lp.solve(lp.build_primal(m)).value


def test_vertex_enumeration_known_value():
    assert oracle.vertex_enumerate_lp_value(5) == Fraction(119, 120)


def test_vertex_enumeration_is_limited():
    with pytest.raises(PreconditionError):
        oracle.vertex_enumerate_lp_value(7)
