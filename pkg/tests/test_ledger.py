import sqlite3

from column_number.services import ledger


def test_record_and_list_runs(ledger_path):
    first = ledger.record_run(ledger_path, "zm", {"command": "zm", "m": 5}, 0, "enclosures_v1")
    second = ledger.record_run(ledger_path, "claims", {"command": "claims"}, 1)

    runs = ledger.list_runs(ledger_path)

    assert [r["command"] for r in runs] == ["claims", "zm"]
    assert runs[0]["outputHash"] == second
    assert runs[0]["previousHash"] == first
    assert runs[1]["previousHash"] is None
    assert runs[1]["manifest"] == {"command": "zm", "m": 5}
    assert runs[0]["exitCode"] == 1


def test_chain_verifies_until_tampered(ledger_path):
    for code in (0, 1, 2):
        ledger.record_run(ledger_path, "sweep", {"exit": code}, code)
    assert ledger.verify_run_chain(ledger_path)

    with sqlite3.connect(ledger_path) as conn:
        conn.execute("UPDATE run_ledger SET exit_code = 0 WHERE id = 2")

    assert not ledger.verify_run_chain(ledger_path)


def test_empty_ledger_verifies(ledger_path):
    assert ledger.list_runs(ledger_path) == []
    assert ledger.verify_run_chain(ledger_path)


def test_hash_is_stable():
    assert ledger.compute_sha256("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
