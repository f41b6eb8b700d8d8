import json
import subprocess
import sys

import pytest

from lgglue import cli
from lgglue.series import POWER, Trunc, VarSet


def run(*args):
    return subprocess.run([sys.executable, "-m", "lgglue", *args], capture_output=True, text=True)


def test_verify_example_suite_passes(capsys):
    assert cli.main(["verify", "example1", "--order", "3"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_unknown_suite_exit_code():
    r = run("verify", "nope")
    assert r.returncode == 2
    assert r.stderr.startswith("error UNKNOWN_SUITE")


def test_bad_config_exit_code(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    r = run("verify", str(p))
    assert r.returncode == 2 and "CONFIG_PARSE" in r.stderr


def test_order_zero_is_accepted(capsys):
    assert cli.main(["verify", "example2", "--order", "0"]) == 0


def test_json_report_and_out_dir(tmp_path, capsys):
    assert cli.main(["verify", "normal_cone", "--order", "3", "--json", "--stable", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["verdict"] and all(r["runtime_ms"] == 0 for r in report["members"])
    assert (tmp_path / "report.txt").read_text().strip()


def test_parallel_and_serial_reports_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    base = ["verify", "toric", "--order", "3", "--instances", "3", "--stable", "--json"]
    assert cli.main(base + ["--out", str(a)]) == 0
    assert cli.main(base + ["--out", str(b), "--jobs", "3"]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_toric_config_file(tmp_path, capsys):
    from lgglue import toric
    p = tmp_path / "data.json"
    p.write_text(json.dumps(toric.builtin("quintic_step1").to_json()))
    assert cli.main(["verify", str(p), "--order", "3"]) == 0


def test_euler_config_file(tmp_path, capsys):
    p = tmp_path / "d.json"
    p.write_text(json.dumps({"dim": 3, "strata": {"X": -200, "X1": 4, "X2": -156, "D0": 24}}))
    assert cli.main(["euler", str(p)]) == 0
    p.write_text(json.dumps({"dim": 3, "strata": {"X": -198, "X1": 4, "X2": -156, "D0": 24}}))
    assert cli.main(["euler", str(p)]) == 1


def test_solve_command(tmp_path, capsys):
    p = tmp_path / "d.json"
    p.write_text(json.dumps({"dim": 3, "strata": {"X": None, "X1": 4, "X2": -156, "D0": 24}}))
    assert cli.main(["solve", str(p)]) == 0
    assert json.loads(capsys.readouterr().out)["strata"]["X"] == -200


def test_classify_command(tmp_path, capsys):
    p = tmp_path / "inv.json"
    p.write_text(json.dumps({"invariant": "q1/x0", "chart": ["x0", "y"],
                             "table": {"zero": [["\\{x_0=\\infty\\}", "I3"]], "infty": [["\\{x_0=0\\}", "IV*"]],
                                       "one_27": [["x_0=3^3q_1", "I1"]]}}))
    assert cli.main(["classify", str(p)]) == 0
    assert json.loads(capsys.readouterr().out)["comparison"]["match"]


def test_emit_quintic_period(capsys):
    assert cli.main(["emit", "quintic-period", "--order", "2"]) == 0
    assert capsys.readouterr().out == "1\n120\n113400\n"


@pytest.mark.parametrize("target", ["quintic-period", "period:example1_P4xP1:X1", "gluing:example1:rhs"])
@pytest.mark.parametrize("as_json", [False, True])
def test_emit_round_trip(target, as_json):
    s = cli.emit_target(target, 3)
    text = cli.render_series(s, as_json)
    assert cli.ingest_series(text, s.vars, s.trunc) == s


def test_emit_bless_writes_into_golden_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LGGLUE_GOLDEN_DIR", str(tmp_path))
    assert cli.main(["emit", "quintic-period", "--order", "2", "--bless"]) == 0
    assert (tmp_path / "series" / "quintic-period_order2.txt").read_text() == "1\n120\n113400\n"


def test_emit_unknown_target():
    assert run("emit", "nothing").returncode == 2


def test_console_script_entry_point():
    r = subprocess.run(["lgglue", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "verify" in r.stdout


def test_ingest_requires_vars_for_text():
    from lgglue.errors import LgError
    with pytest.raises(LgError):
        cli.ingest_series("1\n2\n")
    s = cli.ingest_series("1\n2\n", VarSet(("q",), (POWER,)), Trunc.at(1))
    assert s.coeff((1,)) == 2
