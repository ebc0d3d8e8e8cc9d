from __future__ import annotations

import io
import subprocess
import sys

import pytest

from platelab import __version__
from platelab.cli import parse_grid, parse_model, run
from platelab.csvout import CsvReport, fmt, read_body, read_footer

SHORT = ["--lambda-max", "4096", "--threads", "2"]


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_resolvent_scan_schema_and_footer():
    code, text, _ = call("resolvent-scan", "--sigma", "1", "--omega", "0", *SHORT)
    assert code == 0
    body = read_body(text)
    assert body[0] == "lambda,norm,argmax_mode,identity_residual"
    assert len(body) == 1 + 33
    foot = read_footer(text)
    assert abs(float(foot["phi_est"]) - 1.0) <= 0.05
    assert foot["verdict"] == "match"
    lines = text.splitlines()
    assert lines[0] == f"# platelab {__version__}"
    assert "# seed: 0" in lines
    assert "# config sigma=1.0000000000000000e+00" in lines


def test_determinism(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path, threads in ((a, "1"), (b, "4")):
        code, _, _ = call("witness", "--sigma", "0.75", "-o", str(path), "--threads", threads)
        assert code == 0
    assert read_body(a.read_text()) == read_body(b.read_text())
    code, x, _ = call("inequalities", "--sigma", "0.8", "--items", "L3.4-iii", "--lambda-max", "512", "--seed", "3")
    code2, y, _ = call("inequalities", "--sigma", "0.8", "--items", "L3.4-iii", "--lambda-max", "512", "--seed", "3")
    assert code == code2 == 0 and x == y and "# seed: 3" in x


def test_region_map_rows():
    code, text, _ = call("region-map", "--omega", "0", "--sigma-grid", "0.6:1.0:0.2")
    body = read_body(text)
    assert body[0] == "sigma,omega,predicted_regularity,phi_theory,phi_measured,r_squared,verdict"
    assert [row.split(",")[2] for row in body[1:]] == ["gevrey", "gevrey", "analytic"]
    assert code == 0


def test_region_map_open_question_regime_exits_zero():
    code, text, _ = call("region-map", "--omega", "0", "--sigma-grid", "1.1,1.3", *SHORT)
    assert code == 0
    assert all(row.endswith(",unclassified") for row in read_body(text)[1:])


def test_witness_table():
    code, text, _ = call("witness", "--sigma", "1.1", "--omega", "1")
    assert code == 0
    body = read_body(text)
    assert body[0] == "n,eta,lambda,abs_mu,abs_nu,lower_bound,ratio"
    assert len(body) == 14
    assert read_footer(text)["converged"] == "true"


def test_evolve_worst_case_verdict():
    code, text, _ = call("evolve", "--sigma", "0.25", "--omega", "0", "--init", "worst-case", "--modes", "2000",
                         "--t-max", "2000")
    foot = read_footer(text)
    assert read_body(text)[0] == "t,norm"
    assert foot["monotone"] == "true"
    assert code == (0 if foot["verdict"] == "match" else 2)


def test_evolve_exponential():
    code, text, _ = call("evolve", "--sigma", "1", "--kind", "exponential", "--t-max", "50", "--modes", "8")
    assert code == 0
    assert float(read_footer(text)["decay_rate"]) > 0


def test_inequalities_mismatch_exit_code():
    code, text, _ = call("inequalities", "--sigma", "1", "--items", "L3.4-viii", "--lambda-max", "65536")
    assert code == 2
    assert read_footer(text)["L3.4-viii bounded"] == "false"


def test_inequalities_default_items():
    code, text, _ = call("inequalities", "--sigma", "1.2", "--omega", "1", "--lambda-max", "4096")
    foot = read_footer(text)
    assert {k.split()[0] for k in foot if " " in k} == {"base", "L3.6-i", "L3.6-iv"}
    assert code == 0


def test_verify_small():
    code, text, _ = call("verify", "--draws", "200")
    assert code == 0
    lines = text.splitlines()
    assert len(lines) >= 8 and all(l.startswith("PASS ") for l in lines)


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# short sweep\nsigma = 0.75\nlambda_max = 1024\nseed = 11\n")
    code, text, _ = call("resolvent-scan", "--config", str(cfg), "--seed", "5")
    assert code == 0
    assert "# seed: 5" in text
    assert len(read_body(text)) == 1 + 25
    assert "# config sigma=7.5000000000000000e-01" in text


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["resolvent-scan"],
        ["resolvent-scan", "--sigma", "1", "--frobnicate"],
        ["region-map", "--sigma-grid", "1:0:0.1"],
        ["region-map", "--sigma-grid", "a,b"],
        ["resolvent-scan", "--sigma", "1", "--model", "cubic:3"],
        ["resolvent-scan", "--sigma", "1", "--lambda-min", "100", "--lambda-max", "10"],
        ["resolvent-scan", "--sigma", "2"],
        ["inequalities", "--sigma", "1", "--items", "L0"],
        ["inequalities", "--sigma", "1", "--items", "L3.6-i"],
        ["resolvent-scan", "--sigma", "1", "--config", "/nonexistent/x.cfg"],
    ],
)
def test_usage_errors(argv):
    code, _, err = call(*argv)
    assert code == 1
    assert err.startswith("error:")


def test_unwritable_output(tmp_path):
    code, _, err = call("witness", "--sigma", "0.75", "-o", str(tmp_path / "missing" / "x.csv"))
    assert code == 1 and "error" in err


def test_file_model(tmp_path):
    f = tmp_path / "eig.txt"
    f.write_text("# squares\n" + "\n".join(str(n * n) for n in range(1, 41)) + "\n")
    code, text, _ = call("resolvent-scan", "--sigma", "1", "--model", f"file:{f}", "--lambda-max", "1024")
    assert code in (0, 2)
    assert len(read_body(text)) == 1 + 25
    bad = tmp_path / "bad.txt"
    bad.write_text("1\n4\n3\n")
    code, _, err = call("resolvent-scan", "--sigma", "1", "--model", f"file:{bad}")
    assert code == 1 and "bad.txt:3" in err


def test_parse_helpers():
    assert parse_grid("0.1:0.5:0.1") == [0.1, 0.2, 0.3, 0.4, 0.5]
    assert parse_grid("1,2.5") == [1.0, 2.5]
    assert parse_grid("3") == [3.0]
    assert parse_model("power:2,4").p == 4.0
    assert parse_model("list:1,4,9").size == 3


def test_csv_format():
    assert fmt(0.1) == "1.0000000000000001e-01"
    assert fmt(True) == "true" and fmt(None) == "" and fmt(7) == "7"
    rep = CsvReport("x", {"b": 2.0, "a": "s"}, 9, ["c1", "c2"])
    rep.add(1, 2.0)
    rep.note("k", 0.5)
    with pytest.raises(ValueError):
        rep.add(1)
    text = rep.render()
    assert text.splitlines()[3:5] == ["# config a=s", "# config b=2.0000000000000000e+00"]
    assert read_body(text) == ["c1,c2", "1,2.0000000000000000e+00"]
    assert read_footer(text) == {"command": "x", "seed": "9", "k": "5.0000000000000000e-01"}


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "platelab.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and __version__ in r.stdout
