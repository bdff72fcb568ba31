import numpy as np
import pytest

from column_number.config import get_settings
from column_number.numtheory import get_cache


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def small_sieve(monkeypatch):
    """Sieve tables up to 100 so larger arguments take the trial-division path."""

    monkeypatch.setenv("COLNUM_SIEVE_LIMIT", "100")
    monkeypatch.delenv("COLNUM_CACHE_DIR", raising=False)
    get_settings.cache_clear()
    get_cache.cache_clear()
    yield get_cache()
    get_settings.cache_clear()
    get_cache.cache_clear()


@pytest.fixture
def ledger_path(tmp_path):
    return tmp_path / "ledger" / "runs.sqlite"
