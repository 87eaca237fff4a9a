import json
import subprocess
import sys

import pytest

from preimdyn.cli import EXIT_HYPOTHESIS, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_preim(capsys):
    code, out, _ = run(capsys, "preim", "--map", "x^2-1", "--target", "0", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["count"] == 3 and sorted(doc["preimages"]) == ["-1", "0", "1"]


def test_preim_at_infinity(capsys):
    code, out, _ = run(capsys, "preim", "--map", "x^2", "--target", "inf")
    assert code == 0 and "|Preim| = 1" in out


def test_orbit_and_height(capsys):
    code, out, _ = run(capsys, "orbit", "--map", "x^2-1", "--point", "0")
    assert code == 0 and out.startswith("preperiodic tail=0 cycle=2")
    code, out, _ = run(capsys, "height", "--map", "x^2", "--point", "2", "--eps", "1e-9")
    lo, hi = (float(v) for v in out.strip().strip("[]").split(","))
    assert lo <= 0.6931471805599453 <= hi


def test_curve_and_places(capsys):
    code, out, _ = run(capsys, "curve", "--family", "polyquad", "--b", "0", "--c", "t", "--level", "2")
    assert code == 0 and out.startswith("N2:ee deg_x=4")
    code, out, _ = run(capsys, "curve", "--family", "polyquad", "--b", "0", "--c", "t", "--stable-upto", "2")
    assert "stable at level 2: 1 curve" in out
    code, out, _ = run(capsys, "places", "--family", "polyquad", "--b", "0", "--c", "t", "--level", "2", "--json")
    doc = json.loads(out)
    assert doc["orbit_count"] == 2 and doc["runge_r"] == 2


def test_sweep_writes_csv(capsys, tmp_path):
    out_csv = tmp_path / "s.csv"
    code, out, _ = run(
        capsys, "sweep", "--family", "polyquad", "--b", "0", "--c", "t", "--height-cap", "5", "--out", str(out_csv)
    )
    assert code == 0 and "histogram" in out
    assert out_csv.read_text().splitlines()[0] == "t_num,t_den,s_t,preim_count,max_depth,skipped_reason"


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--d", "2", "--s", "1")
    assert code == 0
    assert "2^296" in out and "(1536, 4096)" in out and "27.725887" in out


@pytest.mark.parametrize("suite", ["example21", "swap", "tr-bounds"])
def test_check_suites(capsys, suite):
    code, out, _ = run(capsys, "check", "--suite", suite)
    assert code == 0 and "FAIL" not in out


def test_hypothesis_exit_code(capsys):
    code, _, err = run(capsys, "curve", "--family", "polyquad", "--b", "2*t", "--c", "t^2-t", "--level", "1")
    assert code == EXIT_HYPOTHESIS and "hypothesis violated" in err


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"map": "x^2-1", "target": "0", "family": "polyquad", "b": "0", "c": "t"}))
    code, out, _ = run(capsys, "--config", str(cfg), "preim")
    assert code == 0 and "|Preim| = 3" in out
    code, out, _ = run(capsys, "--config", str(cfg), "preim", "--target", "3")
    assert "|Preim| = 2" in out
    code, out, _ = run(capsys, "--config", str(cfg), "curve", "--level", "1")
    assert out.startswith("N1:e")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "preimdyn", "preim", "--map", "x^2", "--target", "4"], capture_output=True, text=True)
    assert res.returncode == 0 and "-2, 2" in res.stdout
