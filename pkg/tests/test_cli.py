import io
import json

import pandas as pd
import pytest

from column_number import cli
from column_number.model import ColumnSet, TypedMatrix, enumerate_columns, family
from column_number.services import ledger


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_zm_prints_exact_value(workdir, capsys):
    code = cli.run(["zm", "--m", "5"])

    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[0] == "119/120"
    assert out[1].startswith("approx. 0.9916666")


def test_zm_writes_certificate_and_manifest(workdir):
    code = cli.run(["--out-dir", str(workdir / "out"), "zm", "--m", "4", "--certificate", "cert.json", "--vertex"])

    cert = json.loads((workdir / "out" / "cert.json").read_text())
    manifest = json.loads((workdir / "out" / "manifest.json").read_text())
    assert code == 0
    assert cert["objective"] == "35/36"
    assert manifest["command"] == "zm"
    assert set(manifest["artifacts"]) == {"cert.json"}


def test_zm_approx_with_thin_annulus_fails(workdir):
    assert cli.run(["zm", "--m", "10", "--mode", "approx", "--eps-num", "1/100"]) == 1


def test_threshold(workdir, capsys):
    assert cli.run(["threshold", "--delta", "100000000"]) == 0
    assert capsys.readouterr().out.strip() == "true"
    assert cli.run(["threshold", "--delta", "10000"]) == 1
    assert capsys.readouterr().out.strip() == "false"
    assert cli.run(["threshold"]) == 2


def test_claims(workdir, capsys):
    assert cli.run(["claims", "--which", "type2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["solutions_found"] == 0

    assert cli.run(["claims", "--which", "type3", "--d", "4", "--relax", "delta"]) == 0
    relaxed = json.loads(capsys.readouterr().out)
    assert relaxed["solutions_found"] == 54
    assert relaxed["relaxed"] == ["delta"]


def test_sweep_csv_is_deterministic(workdir):
    manifests = []
    for name in ("a", "b"):
        code = cli.run(["--out-dir", name, "sweep", "--from", "4", "--to", "12", "--out", "sweep.csv"])
        assert code == 0
        manifests.append(json.loads((workdir / name / "manifest.json").read_text()))

    frame = pd.read_csv(workdir / "a" / "sweep.csv")
    assert list(frame.columns) == ["m", "bound_num", "bound_den", "solved", "eps_num", "eps_den"]
    assert frame["m"].tolist() == list(range(4, 13))
    assert manifests[0]["artifacts"] == manifests[1]["artifacts"]


def test_sweep_timings_and_chart(workdir):
    code = cli.run(["sweep", "--from", "4", "--to", "8", "--out", "s.csv", "--with-timings", "--chart", "s.html"])

    assert code == 0
    assert "wall_ms" in pd.read_csv(workdir / "s.csv").columns
    assert 'id="sweep-chart"' in (workdir / "s.html").read_text()


def test_usage_errors_exit_with_two(workdir):
    assert cli.run(["bogus"]) == 2
    assert cli.run(["family", "--kind", "F2", "--delta", "8"]) == 2
    assert cli.run(["family", "--kind", "type3", "--delta", "14"]) == 2
    assert cli.run(["oracle", "--delta", "7", "--m-max", "9"]) == 2


def test_family_emits_matrix(workdir, capsys):
    code = cli.run(["family", "--kind", "type3", "--delta", "14", "--a3", "10", "--out", "m.json"])

    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["column_count"] == 18
    assert payload["delta_endpoints"] == 14
    assert payload["generic"] is True
    assert TypedMatrix.model_validate_json((workdir / "m.json").read_text()).a == (0, 5, 10)


def test_reduce_reads_column_json(workdir, capsys):
    A = enumerate_columns(family("F2", 9))
    (workdir / "cols.json").write_text(A.to_json())

    code = cli.run(["reduce", "--input", "cols.json"])

    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["delta"] == 9
    assert payload["column_count"] >= len(A)


def test_family_columns_feed_reduce(workdir, capsys):
    assert cli.run(["family", "--kind", "F3", "--delta", "14", "--emit", "columns"]) == 0
    (workdir / "cols.json").write_text(capsys.readouterr().out)

    code = cli.run(["reduce", "--input", "cols.json", "--delta", "14", "--output", "mab.json"])

    payload = json.loads(capsys.readouterr().out)
    M = TypedMatrix.model_validate_json((workdir / "mab.json").read_text())
    assert code == 0
    assert payload["input_columns"] == 18
    assert TypedMatrix.model_validate(payload["matrix"]) == M


def test_reduce_rejects_non_generic_input(workdir):
    (workdir / "cols.json").write_text(ColumnSet.from_pairs([(1, 0), (0, 1), (2, 0)]).to_json())

    assert cli.run(["reduce", "--input", "cols.json"]) == 2


def test_oracle_emits_witness(workdir, capsys):
    code = cli.run(["oracle", "--delta", "4", "--emit", "w.json"])

    result = json.loads(capsys.readouterr().out)
    witness = TypedMatrix.model_validate_json((workdir / "w.json").read_text())
    assert code == 0
    assert result["count"] == 6
    assert witness == TypedMatrix.model_validate(result["witness"])


def test_numtheory_x0_and_rows(workdir, capsys):
    code = cli.run(["numtheory", "check-lemma21", "--from", "1880", "--to", "1890", "--out", "rows.csv"])

    payload = json.loads(capsys.readouterr().out)
    rows = pd.read_csv(workdir / "rows.csv")
    assert code == 0
    assert payload["checked"] == 11
    assert payload["passed"] is True
    assert rows["pass"].all()
    assert list(rows.columns) == ["x", "lhs1", "rhs1", "lhs2", "rhs2", "pass"]


def test_runs_are_recorded_in_ledger(workdir, ledger_path):
    cli.run(["--ledger", str(ledger_path), "claims", "--which", "type2"])
    cli.run(["--ledger", str(ledger_path), "family", "--kind", "F2", "--delta", "8"])

    runs = ledger.list_runs(ledger_path)
    assert [(r["command"], r["exitCode"]) for r in runs] == [("family", 2), ("claims", 0)]
    assert ledger.verify_run_chain(ledger_path)


@pytest.mark.slow
def test_verify_all_passes_every_check(workdir, capsys):
    code = cli.run(["--jobs", "2", "verify-all"])

    verdict = json.loads(capsys.readouterr().out)
    assert code == 0
    assert verdict["passed"] is True
    assert set(verdict["checks"]) == {
        "lp_values",
        "vertex_oracle",
        "sweep",
        "analytic_certificate",
        "lemma21",
        "families",
        "claims",
        "reduction",
        "threshold",
        "small_delta",
    }
    assert all(verdict["checks"].values())


@pytest.mark.slow
def test_analytic_command(workdir, capsys):
    code = cli.run(["analytic", "--m", "3257", "--c", "4.96"])

    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["feasible"] is True
    assert payload["c_in_window"] is True


def test_numtheory_rows_go_to_stdout_without_out(workdir, capsys):
    code = cli.run(["numtheory", "check-lemma21", "--from", "1880", "--to", "1884"])

    rows = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert code == 0
    assert list(rows.columns) == ["x", "lhs1", "rhs1", "lhs2", "rhs2", "pass"]
    assert rows["x"].tolist() == [1880, 1881, 1882, 1883, 1884]
    assert rows["pass"].all()


def test_manifest_keys_keep_subdirectories(workdir):
    code = cli.run(
        ["--out-dir", "out", "sweep", "--from", "4", "--to", "6", "--out", "csv/sweep", "--chart", "html/sweep"]
    )

    manifest = json.loads((workdir / "out" / "manifest.json").read_text())
    assert code == 0
    assert set(manifest["artifacts"]) == {"csv/sweep", "html/sweep"}


def test_ledger_list_and_verify(workdir, ledger_path, capsys):
    cli.run(["--ledger", str(ledger_path), "claims", "--which", "type2"])
    capsys.readouterr()

    assert cli.run(["--ledger", str(ledger_path), "ledger", "list"]) == 0
    runs = json.loads(capsys.readouterr().out)
    assert [r["command"] for r in runs] == ["claims"]

    assert cli.run(["--ledger", str(ledger_path), "ledger", "verify"]) == 0
    assert json.loads(capsys.readouterr().out)["intact"] is True
    assert len(ledger.list_runs(ledger_path)) == 1


def test_ledger_command_needs_an_existing_ledger(workdir, monkeypatch):
    monkeypatch.delenv("COLNUM_LEDGER_PATH", raising=False)
    cli.get_settings.cache_clear()

    assert cli.run(["ledger", "verify"]) == 2
    assert cli.run(["--ledger", str(workdir / "missing.sqlite"), "ledger", "list"]) == 2
