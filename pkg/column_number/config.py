import json
import logging
import os
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field


BASE_DIR = Path(__file__).resolve().parent
CONSTANTS_PATH = BASE_DIR / "constants.json"

logger = logging.getLogger(__name__)

_FALLBACK_CONSTANTS: Dict[str, Any] = {
    "version": "builtin",
    "constants": {
        "pi": {"lo": "3.14159265358979323846", "hi": "3.14159265358979323847"},
        "euler_gamma": {"lo": "0.57721566490153286060", "hi": "0.57721566490153286061"},
        "zeta_prime_2": {"lo": "-0.93754825431584375371", "hi": "-0.93754825431584375370"},
    },
}


class Settings(BaseModel):
    sieve_limit: int = Field(default=1_000_000, ge=1)
    cache_dir: Optional[Path] = None
    ledger_path: Optional[Path] = None
    log_level: str = "INFO"
    jobs: int = Field(default=1, ge=1)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Read settings from the environment (and a ``.env`` file if present)."""

    load_dotenv()
    cache_dir = os.getenv("COLNUM_CACHE_DIR")
    ledger_path = os.getenv("COLNUM_LEDGER_PATH")
    return Settings(
        sieve_limit=int(os.getenv("COLNUM_SIEVE_LIMIT", "1000000")),
        cache_dir=Path(cache_dir) if cache_dir else None,
        ledger_path=Path(ledger_path) if ledger_path else None,
        log_level=os.getenv("COLNUM_LOG_LEVEL", "INFO"),
        jobs=int(os.getenv("COLNUM_JOBS", "1")),
    )


def load_constants() -> Dict[str, Any]:
    """Load the constant enclosures from constants.json.

    Falls back to 20-digit built-in enclosures if the file is missing or
    malformed.
    """

    if not CONSTANTS_PATH.exists():
        logger.warning("constants file %s missing, using built-in enclosures", CONSTANTS_PATH)
        return _FALLBACK_CONSTANTS
    try:
        with open(CONSTANTS_PATH, "r", encoding="utf-8") as f:
            data = json.load(f)
        for name in ("pi", "euler_gamma", "zeta_prime_2"):
            entry = data["constants"][name]
            if Fraction(entry["lo"]) > Fraction(entry["hi"]):
                raise ValueError(f"inverted enclosure for {name}")
        return data
    except Exception as exc:
        logger.warning("could not read %s (%s), using built-in enclosures", CONSTANTS_PATH, exc)
        return _FALLBACK_CONSTANTS


def constants_version() -> str:
    return str(load_constants().get("version", "builtin"))
