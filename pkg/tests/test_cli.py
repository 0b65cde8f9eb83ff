import csv
import io
import json

import pytest

from zerosum_khintchine import cli


def run(*argv):
    status, text, cfg = cli.run(list(argv), timestamp="T")
    return status, text, cfg


def test_verify_main_small_suite():
    status, text, _ = run("verify-main", "--N", "4", "--count", "100", "--p", "2,4,6", "--seed", "7")
    doc = json.loads(text)
    assert status == 0
    assert len(doc["reports"]) == 100 * 3 * 2
    assert all(r["satisfied"] for r in doc["reports"])
    assert doc["config"]["seed"] == 7
    assert set(doc) == {"version", "timestamp", "config", "reports"}


def test_verify_main_constant_weights_equality_rows():
    status, text, _ = run("verify-main", "--weights", "1,1,1,1", "--p", "2,5", "--seed", "0")
    doc = json.loads(text)
    assert status == 0
    assert all(r["slack"].startswith("0.0") for r in doc["reports"])


def test_exact_rationals_serialized():
    _, text, _ = run("verify-main", "--weights", "1,-1,0,0", "--p", "4", "--seed", "0")
    first = json.loads(text)["reports"][0]
    assert first["id"] == "eq4-chain-1"
    assert first["extra"]["moment_exact"] == "32/3"
    assert first["params"]["a"] == ["1", "-1", "0", "0"]


def test_weights_file(tmp_path):
    path = tmp_path / "a.txt"
    path.write_text("1/2\n-3\n# comment\n2\n0\n")
    _, text, _ = run("verify-main", "--weights", str(path), "--p", "2", "--seed", "0")
    assert json.loads(text)["reports"][0]["params"]["a"] == ["1/2", "-3", "2", "0"]


def test_odd_n_is_usage_error(capsys):
    assert cli.main(["verify-main", "--N", "3", "--seed", "1"]) == 2
    assert "even" in capsys.readouterr().err


def test_bad_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.run(["verify-main", "--p", "x"])
    assert exc.value.code == 2


def test_exact_cap_is_usage_error():
    assert cli.main(["verify-main", "--N", "26", "--count", "1", "--seed", "1"]) == 2


def test_missing_seed_is_generated_and_echoed():
    _, text, cfg = run("combinatorics", "--n", "1", "--x", "2")
    assert json.loads(text)["config"]["seed"] == cfg.seed


def test_verify_main_violation_sets_exit_status(monkeypatch):
    from zerosum_khintchine.reports import BoundReport

    def broken(cfg):
        return [BoundReport("eq4-chain-1", 2, 1, False)]

    monkeypatch.setitem(cli.COMMANDS, "verify-main", broken)
    status, _, _ = run("verify-main", "--seed", "1")
    assert status == 1


def test_mc_inconsistency_never_changes_status():
    from zerosum_khintchine.reports import BoundReport

    rep = BoundReport("eq7", 2, 1, False, method="monte-carlo")
    assert cli.exit_status([rep]) == 0
    info = BoundReport("rem35-bound", 2, 1, False, applicable=False)
    assert cli.exit_status([info]) == 0


def test_verify_main_mc_mode():
    status, text, _ = run("verify-main", "--N", "30", "--count", "1", "--p", "2,4", "--mode", "mc", "--trials", "3000", "--seed", "5")
    doc = json.loads(text)
    assert status == 0
    assert all(r["method"] == "monte-carlo" and r["samples"] == 3000 and r["seed"] == 5 for r in doc["reports"])


def test_hypergeom_sweep():
    status, text, _ = run("hypergeom", "--n", "1-10", "--p", "2,4,6", "--seed", "1")
    doc = json.loads(text)
    assert status == 0
    ids = {r["id"] for r in doc["reports"]}
    assert {"prop31-sqrt2", "prop31-const2", "cor33", "identity-qk-pk", "eq11-psi2", "rem35-bound"} <= ids
    claimed = [r for r in doc["reports"] if r.get("applicable", True)]
    assert all(r["satisfied"] for r in claimed)


def test_hypergeom_degenerate_rows():
    _, text, _ = run("hypergeom", "--n", "3", "--ell", "0", "--p", "2,4", "--seed", "1")
    reps = json.loads(text)["reports"]
    moments = [r for r in reps if r["id"] == "rem35-bound"]
    assert moments and all(r["lhs"].startswith("0.0") for r in moments)


def test_hypergeom_general_population():
    status, text, _ = run("hypergeom", "--n", "2", "--N", "5,9", "--p", "2", "--seed", "1")
    reps = json.loads(text)["reports"]
    assert status == 0
    assert all(r["id"] == "rem35-bound" and r["extra"]["ratio_condition"] for r in reps)


def test_concentration_exact_and_mc():
    status, text, _ = run("concentration", "--N", "6", "--count", "2", "--p", "2,4", "--seed", "3")
    reps = json.loads(text)["reports"]
    assert status == 0
    assert {r["id"] for r in reps} == {"cor52-lipschitz", "eq7", "eq10", "eq10-chained"}
    assert all(r["method"] == "exact" for r in reps)
    status, text, _ = run("concentration", "--N", "100", "--count", "1", "--p", "2", "--t", "1,2,4",
                          "--trials", "5000", "--seed", "3")
    reps = json.loads(text)["reports"]
    assert status == 0
    assert all(r["method"] == "monte-carlo" and r["seed"] == 3 for r in reps)
    assert all("consistent at 4 sigma" in r["notes"] for r in reps)


def test_combinatorics_csv():
    status, text, _ = run("combinatorics", "--n", "1-3", "--x", "1,3.5", "--format", "csv", "--seed", "0")
    lines = text.splitlines()
    assert lines[0].startswith("# zsk-csv format=1")
    assert lines[1].split(",") == cli.CSV_COLUMNS
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert {r["statement_id"] for r in rows} >= {"stirling-lower", "stirling-upper", "eq12-ratio", "gamma-bound"}
    assert status == 0


def test_sweep_moments_monotone():
    _, text, _ = run("sweep", "--N", "6", "--p", "2-10", "--seed", "4")
    lines = text.splitlines()
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert lines[1].split(",") == cli.SWEEP_COLUMNS
    assert len(rows) == 9
    lhs = [float(r["lhs"]) for r in rows]
    assert lhs == sorted(lhs)


def test_sweep_empty_grid_header_only():
    _, text, _ = run("sweep", "--p", "", "--seed", "4")
    assert text.splitlines()[1:] == [",".join(cli.SWEEP_COLUMNS)]


def test_sweep_orourke_ratio():
    import math

    _, text, _ = run("sweep", "--kind", "orourke", "--N", "100", "--p", "4", "--seed", "0")
    row = list(csv.DictReader(io.StringIO("\n".join(text.splitlines()[1:]))))[0]
    expected = math.sqrt(8) / (math.sqrt(100) * 4 / math.log(100))
    assert float(row["ratio"]) == pytest.approx(expected)
    assert row["satisfied"] == "n/a"


def test_sweep_m_explorer():
    _, text, _ = run("sweep", "--kind", "m-explorer", "--N", "4,12", "--p", "2,4", "--trials", "2000", "--seed", "0")
    rows = list(csv.DictReader(io.StringIO("\n".join(text.splitlines()[1:]))))
    assert [r["method"] for r in rows] == ["exact", "exact", "monte-carlo", "monte-carlo"]
    assert float(rows[0]["ratio"]) == pytest.approx(1.0)


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    assert cli.main(["combinatorics", "--n", "1", "--x", "2", "--seed", "1"]) == 0
    assert json.loads((tmp_path / "combinatorics.json").read_text())["config"]["seed"] == 1


def test_out_flag(tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["sweep", "--seed", "1", "--out", str(out)]) == 0
    assert out.read_text().startswith("# zsk-csv")


def test_precision_bits_changes_digits():
    _, lo, _ = run("combinatorics", "--n", "1", "--x", "3.5", "--seed", "0")
    _, hi, _ = run("combinatorics", "--n", "1", "--x", "3.5", "--seed", "0", "--precision-bits", "200")
    g_lo = [r for r in json.loads(lo)["reports"] if r["id"] == "gamma-bound"][0]["lhs"]
    g_hi = [r for r in json.loads(hi)["reports"] if r["id"] == "gamma-bound"][0]["lhs"]
    assert len(g_hi) > len(g_lo) + 30
