import hashlib
import json
from datetime import datetime
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional

from sqlalchemy import Column, DateTime, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

Base = declarative_base()


class RunLedgerEntry(Base):
    """One CLI run, hash-chained to the run recorded before it."""

    __tablename__ = "run_ledger"

    id = Column(Integer, primary_key=True, index=True)
    timestamp = Column(DateTime, default=datetime.utcnow, index=True)
    command = Column(String(32), nullable=False)
    exit_code = Column(Integer, nullable=False)
    constants_version = Column(String(64), nullable=True)
    manifest = Column(Text, nullable=False)
    previous_hash = Column(String(64), nullable=True)
    output_hash = Column(String(64), nullable=False, unique=True)


@lru_cache(maxsize=8)
def _session_factory(db_path: str):
    Path(db_path).parent.mkdir(parents=True, exist_ok=True)
    engine = create_engine(f"sqlite:///{db_path}", connect_args={"check_same_thread": False})
    Base.metadata.create_all(bind=engine)
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)


def compute_sha256(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _chain_payload(command: str, exit_code: int, constants_version: Optional[str], manifest: str, previous_hash: Optional[str]) -> str:
    return json.dumps(
        {
            "command": command,
            "exit_code": exit_code,
            "constants_version": constants_version,
            "manifest": manifest,
            "previous_hash": previous_hash,
        },
        sort_keys=True,
    )


def get_last_hash(session) -> Optional[str]:
    last = session.query(RunLedgerEntry).order_by(RunLedgerEntry.id.desc()).first()
    return last.output_hash if last else None


def record_run(
    db_path: Path,
    command: str,
    manifest: Dict[str, Any],
    exit_code: int,
    constants_version: Optional[str] = None,
) -> str:
    """Append a run to the ledger and return its chain hash."""

    session = _session_factory(str(db_path))()
    try:
        manifest_str = json.dumps(manifest, sort_keys=True)
        previous_hash = get_last_hash(session)
        output_hash = compute_sha256(
            _chain_payload(command, exit_code, constants_version, manifest_str, previous_hash)
        )
        session.add(
            RunLedgerEntry(
                command=command,
                exit_code=exit_code,
                constants_version=constants_version,
                manifest=manifest_str,
                previous_hash=previous_hash,
                output_hash=output_hash,
            )
        )
        session.commit()
        return output_hash
    finally:
        session.close()


def list_runs(db_path: Path, limit: int = 100) -> List[Dict[str, Any]]:
    """Most recent runs first."""

    session = _session_factory(str(db_path))()
    try:
        q = session.query(RunLedgerEntry).order_by(RunLedgerEntry.id.desc()).limit(limit)
        return [
            {
                "id": row.id,
                "timestamp": row.timestamp.isoformat() + "Z",
                "command": row.command,
                "exitCode": row.exit_code,
                "constantsVersion": row.constants_version,
                "previousHash": row.previous_hash,
                "outputHash": row.output_hash,
                "manifest": json.loads(row.manifest or "{}"),
            }
            for row in q
        ]
    finally:
        session.close()


def verify_run_chain(db_path: Path) -> bool:
    """Recompute every hash and check each row links to its predecessor."""

    session = _session_factory(str(db_path))()
    try:
        rows = session.query(RunLedgerEntry).order_by(RunLedgerEntry.id.asc()).all()
        last_hash: Optional[str] = None
        for row in rows:
            expected = compute_sha256(
                _chain_payload(row.command, row.exit_code, row.constants_version, row.manifest, row.previous_hash)
            )
            if expected != row.output_hash or row.previous_hash != last_hash:
                return False
            last_hash = row.output_hash
        return True
    finally:
        session.close()
