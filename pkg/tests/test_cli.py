import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import jsonschema
import pytest

from intprob.cli import load_schema, run


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def envelope(capsys, *argv):
    code, out, err = call(capsys, *argv)
    assert code == 0, err
    env = json.loads(out)
    jsonschema.validate(env, load_schema())
    return env


def test_shape_example(capsys):
    env = envelope(capsys, "asymptotics", "shape", "--tau", 1, "--nu", 1, "--eta", 1)
    assert env["command"] == "asymptotics shape"
    assert env["value"]["label"] == "liquid"
    assert abs(env["value"]["rho"] - 1 / 3) < 1e-12
    assert env["wall_time"] is None


def test_qmoment_example(capsys):
    env = envelope(capsys, "observables", "qmoments", "--q", 0.5, "--t", 2, "--levels", "1")
    assert abs(env["value"] - math.exp(-1)) < 1e-7


def test_timing_flag_records_wall_time(capsys):
    env = envelope(capsys, "asymptotics", "constants", "--kappa", 1.5, "--timing")
    assert env["wall_time"] >= 0


def test_tiling_svg_has_one_polygon_per_lozenge(capsys, tmp_path):
    path = tmp_path / "t.svg"
    code, _, err = call(capsys, "tilings", "sample", "--a", 20, "--b", 20, "--c", 20, "--seed", 7,
                        "--format", "svg", "--out", path)
    assert code == 0, err
    root = ET.parse(path).getroot()
    polys = [e for e in root.iter() if e.tag.endswith("polygon")]
    assert len(polys) == 1200


def test_same_seed_is_byte_identical(capsys):
    argv = ("polymer", "simulate", "--N", 3, "--t", 1, "--replicas", 50, "--seed", 99)
    a = call(capsys, *argv)[1]
    b = call(capsys, *argv)[1]
    c = call(capsys, *argv[:-1], 100)[1]
    assert a == b and a != c


def test_tw_negative_list_argument(capsys):
    env = envelope(capsys, "asymptotics", "tw", "--r=-2,0")
    assert env["value"]["r"] == [-2.0, 0.0]
    assert abs(env["value"]["F"][0] - 0.41322414) < 1e-7


@pytest.mark.parametrize("argv", [
    ("asymptotics", "shape", "--tau", 1, "--nu", 1),          # missing option
    ("asymptotics", "constants", "--kappa", -1),              # invalid value
    ("observables", "mellin", "--q", 0.5, "--t", 1, "--zeta", 0.3),  # divergent integrand
    ("nosuch", "command"),
    ("asymptotics", "constants", "--kappa", 1, "--format", "svg"),
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 2 and out == ""
    msg = json.loads(err.strip().splitlines()[-1])
    assert msg["exit_code"] == 2 and msg["message"]


def test_runtime_failure_exits_1(capsys):
    code, _, err = call(capsys, "observables", "qlaplace", "--q", 0.5, "--t", 1, "--N", 1,
                        "--zeta", "1.5", "--n-max", 60)
    assert code == 1
    assert json.loads(err.strip())["exit_code"] == 1


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tau": 1, "nu": 1, "eta": 1}))
    env = envelope(capsys, "asymptotics", "shape", "--config", cfg)
    assert env["params"]["nu"] == 1
    env = envelope(capsys, "asymptotics", "shape", "--config", cfg, "--nu", 5.0)
    assert env["params"]["nu"] == 5.0 and env["value"]["label"] == "frozen_empty"


def test_output_dir_for_relative_paths(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path))
    code, out, _ = call(capsys, "asymptotics", "lyapunov", "--p", 3, "--out", "sub/l.json")
    assert code == 0 and out == ""
    env = json.loads((tmp_path / "sub" / "l.json").read_text())
    assert env["value"]["semidiscrete"][0] == pytest.approx(1.5)


def test_report_merges_union_of_columns(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    call(capsys, "asymptotics", "constants", "--kappa", 1.2, "--out", a)
    call(capsys, "tilings", "enumerate", "--a", 2, "--b", 2, "--c", 2, "--out", b)
    csv1, csv2 = tmp_path / "m1.csv", tmp_path / "m2.csv"
    assert call(capsys, "report", a, b, "--csv", csv1)[0] == 0
    assert call(capsys, "report", a, b, "--csv", csv2)[0] == 0
    assert csv1.read_bytes() == csv2.read_bytes()
    header, row1, row2 = csv1.read_text().strip().splitlines()
    cols = header.split(",")
    assert {"command", "kappa", "a", "count"} <= set(cols)
    assert len(row1.split(",")) == len(row2.split(",")) == len(cols)


def test_report_rejects_non_envelope(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"value": 1}))
    assert call(capsys, "report", bad)[0] == 2


def test_report_figures(capsys, tmp_path):
    a = tmp_path / "tw.json"
    call(capsys, "asymptotics", "tw", "--r=-3,-1,1", "--out", a)
    code, out, _ = call(capsys, "report", a, "--figures", tmp_path / "figs")
    assert code == 0
    assert (tmp_path / "figs" / "tracy_widom.png").stat().st_size > 0


def test_validate_algebra_suite(capsys):
    code, out, _ = call(capsys, "validate", "--suite", "algebra", "--seed", 42)
    assert code == 0
    assert json.loads(out)["value"]["passed"] is True


def test_validate_budget_exhaustion_fails(capsys):
    code, out, _ = call(capsys, "validate", "--suite", "asymptotics", "--budget", "0s")
    assert code == 1


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "intprob.cli", "asymptotics", "constants",
                        "--kappa", "1.6449340668482264"], capture_output=True, text=True)
    assert r.returncode == 0
    assert abs(json.loads(r.stdout)["value"]["s"] - 1) < 1e-10
