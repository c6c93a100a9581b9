import json
import subprocess
import sys

import pytest

from degenheat.cli import main, num, parse_grid_override
from degenheat.errors import SpecParseError

HEAT = """\
[coefficient]
kind = constant
value = 1.0,0.0

[phi]
kind = gaussian
a = 1.0
"""

DEGENERATE = HEAT.replace("1.0,0.0", "0.0,1.0")

DISCRIMINATOR = """\
[coefficient]
kind = constant
value = 2.0

[phi]
kind = zero

[source]
kind = const
value = 1.0

[grid]
t = 0.5:1.0:3
x = -1.0:1.0:5
"""


@pytest.fixture
def spec(tmp_path):
    def write(text, name="spec.ini"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


def _data_rows(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


def _last_error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_num_formatting():
    assert num(0.1) == "0.10000000000000001"
    assert num(True) == "true"
    assert num(None) == ""


def test_check_constant_one(spec, tmp_path):
    out = tmp_path / "out"
    assert main(["check", "--spec", spec(HEAT), "--out", str(out)]) == 0
    rows = dict(r.split(",", 1) for r in _data_rows(out / "conditions.csv"))
    assert rows["positive_segments"] == "0:1"
    assert rows["passed"] == "true"
    assert (out / "lemmas.csv").exists()


def test_check_constant_i_fails(spec, tmp_path):
    out = tmp_path / "out"
    assert main(["check", "--spec", spec(DEGENERATE), "--out", str(out), "--format", "json"]) == 1
    data = json.loads((out / "conditions.json").read_text())
    assert data["conditions"]["repart_ok"] is False and data["passed"] is False


def test_solve_writes_t_major_field(spec, tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--spec", spec(HEAT), "--out", str(out),
                 "--grid", "0.5:1:2,-1:1:3"]) == 0
    rows = _data_rows(out / "field.csv")
    assert rows[0] == "t,x,re_u,im_u,abs_u"
    coords = [tuple(map(float, r.split(",")[:2])) for r in rows[1:]]
    assert coords == [(0.5, -1), (0.5, 0), (0.5, 1), (1, -1), (1, 0), (1, 1)]
    header = (out / "field.csv").read_text()
    assert "# command = solve" in header and "# kind = gaussian" in header


def test_solve_json(spec, tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--spec", spec(HEAT), "--out", str(out), "--format", "json",
                 "--grid", "1:1:1,0:0:1"]) == 0
    data = json.loads((out / "field.json").read_text())
    (rec,) = data["records"]
    assert rec["re_u"] == pytest.approx(5 ** -0.5, abs=1e-12)
    assert "[coefficient]" in data["header"]["spec"]


def test_solve_degenerate_names_t(spec, tmp_path, capsys):
    status = main(["solve", "--spec", spec(DEGENERATE), "--out", str(tmp_path)])
    assert status == 2
    err = _last_error(capsys)
    assert err["error"] == "DegenerateRegimeError"
    assert err["t"] == 0.1 and "t=0.1" in err["message"]


def test_verify_heat_benchmark(spec, tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "--spec", spec(HEAT), "--out", str(out), "--format", "json"]) == 0
    data = json.loads((out / "verify.json").read_text())
    checks = {c["check"]: c for c in data["checks"]}
    assert checks["residual"]["value"] < 1e-3
    assert checks["oracle"]["passed"] and checks["initial_trace"]["passed"]


def test_verify_discriminator_forms(spec, tmp_path):
    path = spec(DISCRIMINATOR)
    assert main(["verify", "--spec", path, "--out", str(tmp_path / "a")]) == 0
    assert main(["verify", "--spec", path, "--out", str(tmp_path / "b"),
                 "--duhamel-form", "paper"]) == 1
    rows = _data_rows(tmp_path / "b" / "verify.csv")
    residual = next(r for r in rows if r.startswith("residual"))
    assert float(residual.split(",")[2]) == pytest.approx(1.0, abs=1e-3)
    assert "skipped" in (tmp_path / "b" / "verify.csv").read_text()


def test_sweep(spec, tmp_path):
    out = tmp_path / "out"
    assert main(["sweep", "--spec", spec(HEAT), "--out", str(out),
                 "--grid", "0.5:1:2,-2:2:5"]) == 0
    rows = _data_rows(out / "sweep.csv")[1:]
    assert len(rows) == 6
    errors = [float(r.split(",")[4]) for r in rows]
    assert max(errors) < 1e-5


def test_overrides(spec, tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--spec", spec(HEAT), "--out", str(out), "--tol", "1e-6",
                 "--rho-min", "1e-9", "--eps-split", "1e-5", "--grid", "1:1:1,0:0:1"]) == 0
    text = (out / "field.csv").read_text()
    assert "# quad_tol = 1e-06" in text and "# rho_min = 1e-09" in text
    assert "# eps_split = 1e-05" in text


@pytest.mark.parametrize("argv", [
    ["solve", "--spec", "nope.ini"],
    ["solve", "--spec", "{spec}", "--grid", "1:2:3"],
    ["solve", "--spec", "{spec}", "--tol", "-1"],
])
def test_input_errors_exit_3(spec, tmp_path, capsys, argv):
    path = spec(HEAT)
    argv = [a.replace("{spec}", path) for a in argv] + ["--out", str(tmp_path)]
    assert main(argv) == 3
    assert _last_error(capsys)["status"] == 3


def test_usage_error_exits_3(capsys):
    with pytest.raises(SystemExit) as info:
        main(["launch", "--spec", "x"])
    assert info.value.code == 3
    assert _last_error(capsys)["error"] == "UsageError"


def test_grid_override_parsing():
    g = parse_grid_override("0.1:1:4,-2:2:5")
    assert (g.nt, g.nx, g.x0) == (4, 5, -2.0)
    with pytest.raises(SpecParseError):
        parse_grid_override("0.1:1:4")


def test_console_entry_point(spec, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "degenheat.cli", "solve", "--spec", spec(DEGENERATE),
         "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stderr.strip())["status"] == 2


def test_threads_do_not_change_output(spec, tmp_path, monkeypatch):
    path = spec(HEAT)
    main(["solve", "--spec", path, "--out", str(tmp_path / "a")])
    monkeypatch.setenv("DEGENHEAT_THREADS", "3")
    main(["solve", "--spec", path, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "field.csv").read_bytes() == (tmp_path / "b" / "field.csv").read_bytes()
