import csv
import io
import json

import pytest

from strahler import cli, verification


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_expect_exact_row(capsys):
    code, out, _ = run_cli(capsys, "expect", "--n", "12", "--r", "2", "--f", "S1")
    assert code == 0
    rows = parse_csv(out)
    assert rows == [
        {
            "n": "12",
            "r": "2",
            "f": "S1",
            "value": "22/7",
            "value_decimal": "3.14285714286",
            "mode": "exact",
        }
    ]


def test_expect_trivial_and_square(capsys):
    code, out, _ = run_cli(capsys, "expect", "--n", "5", "--r", "1", "--f", "S1")
    assert parse_csv(out)[0]["value"] == "5"
    code, out, _ = run_cli(capsys, "expect", "--n", "5", "--r", "2", "--f", "S1^2")
    assert parse_csv(out)[0]["value"] == "16/7"


def test_expect_grid_ordering(capsys):
    code, out, _ = run_cli(capsys, "expect", "--n-grid", "4,8,12", "--r", "2")
    rows = parse_csv(out)
    assert [row["n"] for row in rows] == ["4", "8", "12"]


def test_output_is_byte_identical_across_runs(capsys, tmp_path):
    argv = ["sample", "--n", "30", "--r", "2", "--trials", "50", "--seed", "42"]
    code1, out1, _ = run_cli(capsys, *argv)
    code2, out2, _ = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2
    path = tmp_path / "table.csv"
    code3, _, _ = run_cli(capsys, *argv, "--out", str(path))
    assert path.read_text() == out1
    assert out1.endswith("\n") and "\r" not in out1


def test_csv_and_json_carry_identical_values(capsys):
    _, out_csv, _ = run_cli(capsys, "dist", "--n", "5", "--r", "2")
    _, out_json, _ = run_cli(capsys, "dist", "--n", "5", "--r", "2", "--format", "json")
    csv_rows = parse_csv(out_csv)
    json_rows = json.loads(out_json)
    assert len(csv_rows) == len(json_rows) == 2
    for c_row, j_row in zip(csv_rows, json_rows):
        for key, value in c_row.items():
            assert str(j_row[key]) == value
    assert [row["probability"] for row in csv_rows] == ["4/7", "3/7"]


def test_dist_example_r3(capsys):
    _, out, _ = run_cli(capsys, "dist", "--n", "4", "--r", "3")
    rows = parse_csv(out)
    assert [(row["s"], row["probability"]) for row in rows] == [
        ("0", "4/5"),
        ("1", "1/5"),
    ]


def test_ratio_table(capsys):
    code, out, _ = run_cli(capsys, "ratio", "--n", "100", "--r", "1", "--f", "S1")
    row = parse_csv(out)[0]
    assert row["ratio"] == "394/99"
    assert row["asymptotic"] == "199/50"
    assert row["limit"] == "4"


def test_ratio_moment_observable(capsys):
    code, out, _ = run_cli(capsys, "ratio", "--n", "1000", "--r", "1", "--f", "S1^2")
    row = parse_csv(out)[0]
    assert row["asymptotic_decimal"] == "15.968"
    assert row["limit"] == "16"


def test_ratio_constant_observable(capsys):
    code, out, _ = run_cli(capsys, "ratio", "--n-grid", "5,9", "--f", "1")
    rows = parse_csv(out)
    assert all(row["ratio"] == "1" for row in rows)


def test_enumerate_all_shapes(capsys):
    code, out, _ = run_cli(capsys, "enumerate", "--n", "4")
    rows = parse_csv(out)
    assert len(rows) == 5
    assert rows[0]["tree"] == "(* (* (* *)))"  # canonical order: left magnitude first
    assert {row["profile"] for row in rows} == {"4 1", "4 2 1"}


def test_sample_reports_reference(capsys):
    code, out, _ = run_cli(
        capsys, "sample", "--n", "1", "--trials", "5", "--seed", "3", "--f", "S1"
    )
    row = parse_csv(out)[0]
    assert code == 0
    assert row["mean"] == "1"
    assert row["stderr"] == "0"
    assert row["reference"] == "1"


def test_asympt_table(capsys):
    code, out, _ = run_cli(
        capsys, "asympt", "--n-grid", "50,100,200", "--r", "2", "--f", "S1"
    )
    rows = parse_csv(out)
    assert code == 0
    assert rows[1]["asymptotic"] == "201/8"
    assert rows[0]["k"] == "1"
    slope = float(rows[0]["fitted_slope"])
    assert slope <= -0.7


def test_exit_code_usage_errors(capsys):
    code, _, err = run_cli(capsys, "expect", "--n", "5", "--f", "S1++")
    assert code == 2
    assert "offset" in err
    code, _, err = run_cli(capsys, "expect", "--f", "S1")
    assert code == 2
    with pytest.raises(SystemExit) as excinfo:
        run_cli(capsys, "expect", "--n-grid", "5,4")
    assert excinfo.value.code == 2


def test_exit_code_resource_limit(capsys):
    code, _, err = run_cli(capsys, "expect", "--n", "400", "--mode", "exact")
    assert code == 3
    code, _, err = run_cli(capsys, "enumerate", "--n", "20")
    assert code == 3
    code, _, _ = run_cli(
        capsys, "expect", "--n", "400", "--mode", "exact", "--max-n", "400"
    )
    assert code == 0


def test_verify_reduced_run_reports_known_failures(capsys):
    # The horton-law and moment-ratio bounds are tighter than the true
    # second-order constants, so a faithful verify run reports exactly those
    # two checks red (see README).
    code, out, err = run_cli(capsys, "verify", "--max-n", "8", "--trials", "2000")
    assert code == 1
    summary = json.loads(out)
    failing = {c["name"] for c in summary["checks"] if not c["passed"]}
    assert failing == {"horton-law", "moment-ratio-law"}
    assert summary["passed"] is False
    assert len(summary["checks"]) == 10
    assert "PASS  oracle-equivalence" in err


def test_verify_corruption_hook_names_failing_check(capsys, monkeypatch):
    def broken(engine, max_n, trials):
        return verification.CheckResult("multiplicity", False, "induced corruption", 0.0)

    monkeypatch.setitem(verification.CHECKS, "multiplicity", broken)
    code, out, _ = run_cli(capsys, "verify", "--max-n", "6", "--trials", "500")
    assert code == 1
    summary = json.loads(out)
    named = {c["name"]: c for c in summary["checks"]}
    assert named["multiplicity"]["passed"] is False
    assert named["multiplicity"]["detail"] == "induced corruption"


def test_verify_subset_passes_cleanly():
    results = verification.run_all(
        max_n=8, trials=500, names=["multiplicity", "expansion-reproduction"]
    )
    assert all(r.passed for r in results)
