import json

from maxvel.cli import execute, main
from maxvel.config import parse_config

SMALL = """[experiment]
name = maxvel
output = {out}

[grid]
n = 512
L = 64.0

[run]
R = 1.1
a = 1.3
T = 16.0
samples_per_octave = 2
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_is_deterministic(tmp_path, monkeypatch):
    monkeypatch.setenv("MAXVEL_OUTPUT_ROOT", str(tmp_path))
    cfg = _write(tmp_path, "a.ini", SMALL.format(out="one"))
    assert main(["run", cfg]) == 0
    assert main(["run", cfg, "-o", "two"]) == 0
    a = (tmp_path / "one" / "maxvel.csv").read_bytes()
    assert a == (tmp_path / "two" / "maxvel.csv").read_bytes()
    assert a.startswith(b"t,tail_norm,norm,boundary_mass\n")
    summary = json.loads((tmp_path / "one" / "summary.json").read_text())
    assert summary["status"] == "ok" and summary["anchor"] == "maximal-velocity-tail"
    assert all("anchor" in r for r in summary["records"])
    assert (tmp_path / "one" / "maxvel_final.phmv").exists()
    assert main(["report", str(tmp_path)]) == 0


def test_config_error_exit(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.ini", "[experiment]\nname = maxvel\n[run]\nR = 2\na = 1\npotental = 1\n")
    assert main(["validate", cfg]) == 2
    err = capsys.readouterr().err
    assert "1 < R < a" in err and "potental" in err
    assert main(["run", cfg]) == 2


def test_validate_prints_config(tmp_path, capsys):
    cfg = _write(tmp_path, "ok.ini", SMALL.format(out="x"))
    assert main(["validate", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["grid"]["n"] == 512 and out["run"]["a"] == 1.3


def test_numeric_failure_exit(tmp_path, monkeypatch):
    monkeypatch.setenv("MAXVEL_OUTPUT_ROOT", str(tmp_path))
    cfg = parse_config(SMALL.format(out="bad") + "dt = 0.5\n")
    assert execute(cfg) == 3
    summary = json.loads((tmp_path / "bad" / "summary.json").read_text())
    assert summary["status"] == "numeric_failure" and summary["partial"]
    assert summary["error"].startswith("maxvel:")
    assert main(["report", str(tmp_path)]) == 3


def test_violated_trend_exit(tmp_path, monkeypatch):
    monkeypatch.setenv("MAXVEL_OUTPUT_ROOT", str(tmp_path))
    text = SMALL.format(out="short").replace("T = 16.0", "T = 1.5")
    assert execute(parse_config(text)) == 4
    assert main(["report", str(tmp_path)]) == 4


def test_report_missing_dir(tmp_path):
    assert main(["report", str(tmp_path / "nope")]) == 2


def test_free_inequality_suite_holds(tmp_path, monkeypatch):
    monkeypatch.setenv("MAXVEL_OUTPUT_ROOT", str(tmp_path))
    cfg = parse_config("[experiment]\nname = inequality-suite\noutput = suite\n")
    assert execute(cfg) == 0
    rec = json.loads((tmp_path / "suite" / "inequalities.json").read_text())
    verdicts = {r["name"]: r["verdict"] for r in rec["reports"]}
    assert set(verdicts.values()) == {"holds"}
    dom = [r for r in rec["reports"] if r["name"] == "domination_H_over_p"][0]
    assert abs(dom["constants"]["m"] - 1) < 1e-6 and abs(dom["constants"]["delta"] - 1) < 1e-6
