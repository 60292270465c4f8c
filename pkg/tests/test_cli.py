import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from multiquad import cli
from multiquad.errors import ConfigError
from multiquad.measures import shipped_system

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SYS_A = str(CONFIGS / "sysA.json")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_rule_json_sys_a(capsys):
    code, out, _ = run(capsys, "rule", "-i", SYS_A, "-n", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["nodes"] == pytest.approx([0.21132486540518713, 0.78867513459481287], abs=1e-12)
    assert doc["weights"][0] == pytest.approx([0.5, 0.5], abs=1e-12)


def test_rule_rational_backend(capsys):
    code, out, _ = run(capsys, "rule", "-i", SYS_A, "-n", "2", "--backend", "rational")
    assert code == 0
    doc = json.loads(out)
    assert doc["node_polynomial"] == ["1/6", "-1", "1"]
    assert all(isinstance(x, float) for x in doc["nodes"])


def test_rule_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(capsys, "rule", "-i", "jacobi-pineiro-3", "-n", "12", "-o", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_rule_csv_format(capsys):
    code, out, _ = run(capsys, "rule", "-i", "angelesco-2", "-n", "3", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "node,w1,w2" and len(out.splitlines()) == 4


def test_bad_json_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "rule", "-i", str(bad))
    assert code == 1 and "invalid JSON" in err


def test_missing_input_exits_one(capsys):
    code, _, err = run(capsys, "rule", "-i", "no-such-file.json")
    assert code == 1 and "no such file" in err


def test_argument_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["rule"])
    assert exc.value.code == 1
    code, _, _ = run(capsys, "rule", "-i", SYS_A, "-n", "0")
    assert code == 1
    code, _, _ = run(capsys, "rule", "-i", SYS_A, "--tol-w", "-1")
    assert code == 1


def test_unwritable_output_exits_one(tmp_path, capsys):
    code, _, _ = run(capsys, "rule", "-i", SYS_A, "-n", "2", "-o", str(tmp_path / "missing" / "x.json"))
    assert code == 1


def test_non_normal_rule_request_exits_one(capsys):
    code, _, err = run(capsys, "rule", "-i", SYS_A, "-n", "3")
    assert code == 1 and "not normal" in err


def test_verify_sys_a_all_pass(capsys):
    code, out, _ = run(capsys, "verify", "-i", SYS_A, "-n", "2")
    assert code == 0
    lines = out.splitlines()
    assert all(line.startswith("PASS") for line in lines)
    assert any("gamma_n = -12" in line for line in lines)
    scan = next(line for line in lines if "degree scan j=2" in line)
    assert "first failure at degree 3" in scan


def test_verify_rational_and_custom_ladder(capsys):
    code, out, _ = run(capsys, "verify", "-i", "angelesco-3", "-n", "5", "--backend", "rational",
                       "--seed-ladder", "0,1/2,-1/3,2/5,3,-7/4,5/6,1/7,-2,9/4,11/3")
    assert code == 0, out
    assert "11 points" in out


def test_verify_reports_not_normal(capsys):
    code, _, err = run(capsys, "verify", "-i", str(CONFIGS / "duplicated.json"), "-n", "2")
    assert code == 1 and "not normal" in err


def test_verify_failure_exits_two(capsys):
    # JP-4 at n = 20 fails the float round trip (shared-support conditioning)
    code, out, _ = run(capsys, "verify", "-i", "jacobi-pineiro-4", "-n", "20")
    assert code == 2
    assert any(line.startswith("FAIL") and "round trip" in line for line in out.splitlines())


def test_compare_square_on_sys_a(capsys):
    code, out, _ = run(capsys, "compare", "-i", SYS_A, "-n", "2", "--integrand", "poly:2", "--format", "csv")
    assert code == 0
    assert "function evaluations shared 2, separate 4" in out
    rows = [line.split(",") for line in out.splitlines()[2:]]
    for row in rows:
        assert float(row[3]) <= 1e-14 and float(row[4]) <= 1e-14


def test_compare_n_one(capsys):
    code, out, _ = run(capsys, "compare", "-i", "angelesco-2", "-n", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["evaluations"] == {"shared": 1, "separate": 2}
    assert len(doc["measures"]) == 2


def test_compare_exp_shared_within_ten_times_separate():
    rows = cli.compare(shipped_system("angelesco-2"), 5, math.exp)
    for row in rows:
        assert row["shared_error"] <= 10 * row["separate_error"]


def test_integrand_parsing():
    assert cli.integrand("poly:3")(2.0) == 8.0
    assert cli.integrand("runge")(1.0) == 0.5
    for bad in ("poly:x", "poly:-1", "sin"):
        with pytest.raises(ConfigError):
            cli.integrand(bad)


def test_moments_subcommand(capsys):
    code, out, _ = run(capsys, "moments", "-i", SYS_A, "-n", "3", "--backend", "rational", "--format", "csv")
    assert code == 0 and out.splitlines()[1:] == ["0,1,1/2", "1,1/2,1/3", "2,1/3,1/4"]


def test_log_level_from_environment(monkeypatch):
    monkeypatch.setenv("MULTIQUAD_LOG", "debug")
    assert cli._verbosity() == 10
    monkeypatch.setenv("MULTIQUAD_LOG", "30")
    assert cli._verbosity() == 30
    monkeypatch.setenv("MULTIQUAD_LOG", "chatty")
    assert cli._verbosity() == 30


def test_console_script_entry_point():
    env = dict(os.environ, MULTIQUAD_LOG="info")
    proc = subprocess.run([sys.executable, "-m", "multiquad.cli", "rule", "-i", "lebesgue", "-n", "3"],
                          capture_output=True, text=True, env=env, timeout=60)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["n"] == 3
