import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qetphase.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- protocol -------------------------------------------------------------------------

def test_protocol_values(capsys):
    code, out, _ = run(capsys, "protocol", "--h", "1", "--k", "1")
    assert code == 0
    d = json.loads(out)
    assert d["E_A"] == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert d["E_B"] == pytest.approx(math.sqrt(5) - 3 / math.sqrt(2), abs=1e-12)
    assert max(d["residuals"].values()) <= 1e-10
    assert list(d) == ["params", "E_A", "E_B", "H_expect", "no_signalling", "negativity", "residuals"]


def test_protocol_limit_mode(capsys):
    code, out, _ = run(capsys, "protocol", "--h", "1", "--k", "0", "--limit-mode")
    d = json.loads(out)
    assert code == 0
    assert d["E_A"] == pytest.approx(1, abs=1e-12) and abs(d["E_B"]) <= 1e-12


@pytest.mark.parametrize("argv,needle", [
    (["protocol", "--h", "-1", "--k", "1"], "h > 0"),
    (["protocol", "--k", "0"], "k > 0"),
    (["protocol", "--grid", "axb"], "--grid"),
    (["bogus"], "invalid choice"),
])
def test_usage_errors_exit_2(capsys, argv, needle):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert needle in capsys.readouterr().err


def test_protocol_tolerance_failure(capsys):
    code, _, err = run(capsys, "protocol", "--tol", "1e-30")
    assert code == 1 and "disagree" in err


def test_protocol_out_file(tmp_path, capsys):
    path = tmp_path / "p.json"
    assert main(["protocol", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["params"] == {"h": 1.0, "k": 1.0}


def test_unwritable_out(tmp_path, capsys):
    code, _, err = run(capsys, "protocol", "--out", str(tmp_path / "missing" / "x.json"))
    assert code == 1 and "missing" in err


# -- sweep ----------------------------------------------------------------------------

def test_sweep_grid(tmp_path, capsys):
    path = tmp_path / "sweep.csv"
    assert main(["sweep", "--h-range", "0.25:4:5", "--k-range", "0.25:4:5", "--out", str(path)]) == 0
    text = path.read_text()
    assert text.split("\n")[0] == "h,k,E_A,E_B,neg_ground,neg_final,S_ground,S_post,S_final"
    data = rows(text)
    assert len(data) == 25
    for r in data:
        assert 0 <= float(r["E_B"]) <= float(r["E_A"])
    hs = [float(r["h"]) for r in data]
    assert hs == sorted(hs)


def test_sweep_rejects_single_point(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--h-range", "1:2:1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["sweep", "--k-range", "2:1:3"])


def test_sweep_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--h-range", "0.5:2:2", "--k-range", "0.5:2:2"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


# -- wigner ---------------------------------------------------------------------------

def test_wigner_ground_slice(capsys):
    code, out, _ = run(capsys, "wigner", "--stage", "ground", "--grid", "9x8", "--slice", "theta2=0,phi2=0")
    assert code == 0
    data = rows(out)
    assert len(data) == 72
    first = data[0]
    assert float(first["theta1"]) == 0 and float(first["theta2"]) == 0
    assert float(first["value"]) == pytest.approx(1 - math.sqrt(6) / 4, abs=1e-11)


def test_wigner_has_negative_values(capsys):
    _, out, _ = run(capsys, "wigner", "--stage", "ground", "--grid", "5x4")
    assert min(float(r["value"]) for r in rows(out)) < 0


def test_wigner_final_stage(capsys):
    _, out, _ = run(capsys, "wigner", "--stage", "final", "--grid", "3x2")
    hit = [r for r in rows(out)
           if r["theta1"] == r["theta2"] == f"{math.pi / 2:.12g}" and float(r["phi1"]) == float(r["phi2"]) == 0]
    assert len(hit) == 1
    assert float(hit[0]["value"]) == pytest.approx(0.25 - 3 / (2 * math.sqrt(5)), abs=1e-11)


def test_wigner_unknown_stage(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["wigner", "--stage", "middle"])
    assert exc.value.code == 2


# -- entropy and verify ---------------------------------------------------------------

def test_entropy_command(capsys):
    code, out, _ = run(capsys, "entropy", "--h", "1", "--k", "1")
    assert code == 0
    r = rows(out)[0]
    assert r["monotone"] == "true"
    assert float(r["S_ground"]) <= float(r["S_post_feedback"])


def test_entropy_grid_too_small(capsys):
    code, _, err = run(capsys, "entropy", "--quad-theta", "8", "--quad-phi", "8")
    assert code == 1 and "error" in err


def test_verify_default(capsys):
    code, out, err = run(capsys, "verify")
    d = json.loads(out)
    assert code == 0
    assert len(d["checks"]) >= 30 and d["summary"]["status"] == "pass"
    assert all({"name", "paper_anchor", "expected", "computed", "residual", "pass"} <= set(c) for c in d["checks"])
    assert "printed_ground_wigner_coefficients" in [c["name"] for c in d["flagged_discrepancies"]]
    assert "checks passed" in err


def test_verify_forced_failure(capsys):
    code, _, err = run(capsys, "verify", "--tol", "1e-30")
    assert code == 1 and "FAIL" in err and "residual" in err


# -- config ---------------------------------------------------------------------------

def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"h": 2.0, "k": 0.5}))
    _, out, _ = run(capsys, "protocol", "--config", str(cfg))
    assert json.loads(out)["params"] == {"h": 2.0, "k": 0.5}
    _, out, _ = run(capsys, "protocol", "--config", str(cfg), "--k", "1")
    assert json.loads(out)["params"] == {"h": 2.0, "k": 1.0}


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(SystemExit) as exc:
        main(["protocol", "--config", str(cfg)])
    assert exc.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qetphase", "protocol", "--h", "-1"], capture_output=True, text=True)
    assert res.returncode == 2 and "h > 0" in res.stderr
