import json
import subprocess
import sys

import pytest

from eprga.cli import run


def test_simulate_csv(capsys):
    assert run(["simulate", "--trials", "500", "--angles", "0:90:45"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("theta_deg,n,standard_scalar")
    assert len(lines) == 4
    assert lines[1].split(",")[2] == "-1"


def test_simulate_json(capsys):
    assert run(["simulate", "--trials", "200", "--a", "0", "--b", "1,1,0", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["format_version"] == 1 and doc["seed"] == 0
    (row,) = doc["rows"]
    assert row["theta_deg"] == pytest.approx(45.0)
    assert row["raw_lambda"] == -1


def test_record_then_analyze_matches_simulate(tmp_path, capsys):
    log = tmp_path / "r.log"
    assert run(["record", "--trials", "1000", "--seed", "42", "--out", str(log)]) == 0
    assert run(["analyze", str(log), "--angles", "0:180:30", "--format", "json"]) == 0
    analyzed = capsys.readouterr().out
    assert run(["simulate", "--trials", "1000", "--seed", "42", "--angles", "0:180:30",
                "--format", "json"]) == 0
    assert capsys.readouterr().out == analyzed


def test_analyze_truncated_log(tmp_path, capsys):
    log = tmp_path / "r.log"
    run(["record", "--trials", "10", "--out", str(log)])
    log.write_bytes(log.read_bytes()[:-25])
    assert run(["analyze", str(log)]) == 2
    err = capsys.readouterr().err
    assert "expected 10 records, found 9" in err and "byte offset" in err


def test_workers_do_not_change_output(tmp_path):
    outs = []
    for w in ("1", "8"):
        out = tmp_path / f"w{w}.csv"
        assert run(["simulate", "--trials", "140000", "--angles", "0:180:45",
                    "--workers", w, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_chsh_command(capsys):
    assert run(["chsh", "--trials", "1000", "--a", "0", "--a-prime", "90",
                "--b", "225", "--b-prime", "135", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["chsh_separate_standard"] == pytest.approx(2 * 2 ** 0.5, abs=1e-9)


@pytest.mark.parametrize("argv", [
    ["chsh", "--a", "0", "--b", "45"],
    ["simulate", "--angles", "0:10"],
    ["simulate", "--a", "0"],
    ["simulate", "--a", "0,0,0", "--b", "1"],
    ["simulate", "--pipelines", "nope"],
    ["simulate", "--trials", "0"],
    ["simulate", "--angles", "0:10:1", "--a", "0", "--b", "1"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_suite_exits_2():
    with pytest.raises(SystemExit) as e:
        run(["verify", "nonsense"])
    assert e.value.code == 2


@pytest.mark.parametrize("suite", ["subalgebra", "bivector-identity", "torsion",
                                   "appendix-c", "gill-claims", "sigma"])
def test_verify_suites_pass(suite, capsys):
    assert run(["verify", suite, "--samples", "50"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True and doc["failures"] == []


def test_verify_subalgebra_counts_18_cases(capsys):
    run(["verify", "subalgebra"])
    assert json.loads(capsys.readouterr().out)["cases"] == 18


def test_verify_dispute_suite_values(capsys):
    run(["verify", "gill-claims", "--samples", "20"])
    rows = json.loads(capsys.readouterr().out)["dispute"]
    assert len(rows) == 6
    for r in rows:
        assert r["naive_residual"] == pytest.approx(2.0)
        assert r["oriented_residual"] <= 1e-12
        assert r["zero_claim_norm"] == pytest.approx(2.0)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "eprga", "verify", "torsion", "--samples", "5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["suite"] == "torsion"
