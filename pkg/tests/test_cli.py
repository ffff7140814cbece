import io
import subprocess
import sys

import numpy as np
import pytest

from fracthermo.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def report(text):
    return dict(line.split(" = ", 1) for line in text.splitlines())


def test_classify_case2():
    code, out, _ = run("classify", "examples/case2.prob")
    assert code == 0
    r = report(out)
    assert r["case"] == "Case2"
    assert abs(float(r["beta_K"]) - 0.5158) < 1e-4
    assert abs(float(r["beta_gamma"]) - 0.3673) < 1e-4


def test_classify_case3_b_override():
    code, out, _ = run("classify", "examples/case3.prob", "--b", "0.502")
    assert code == 0 and report(out)["b"] == "0.502"


def test_solve_degenerate(tmp_path):
    target = tmp_path / "eig.csv"
    code, out, _ = run("solve", "examples/degenerate_f1.prob", "--rho", "1", "--out", str(target))
    assert code == 0
    r = report(out)
    assert abs(float(r["lambda"]) - 0.78991342468971881) < 1e-10
    assert r["residuals_ok"] == "true" and r["cone_satisfied"] == "true"
    lines = target.read_text().splitlines()
    assert lines[0] == "t,u" and len(lines) == 1026

    code, out, _ = run("verify", "examples/degenerate_f1.prob", str(target))
    assert code == 0
    v = report(out)
    assert v["verified"] == "true"
    assert float(v["lambda"]) == pytest.approx(float(r["lambda"]), rel=1e-14)


def test_verify_detects_corruption(tmp_path):
    target = tmp_path / "eig.csv"
    run("solve", "examples/case3.prob", "--rho", "1", "--n", "257", "--out", str(target))
    data = np.loadtxt(target, delimiter=",", skiprows=1)
    data[100, 1] += 0.1
    np.savetxt(target, data, delimiter=",", header="t,u", comments="", fmt="%.17g")
    code, out, _ = run("verify", "examples/case3.prob", str(target))
    assert code == 1
    assert report(out)["fp_ok"] == "false"


def test_verify_rejects_bad_csv(tmp_path):
    target = tmp_path / "eig.csv"
    target.write_text("x,y\n0,1\n")
    code, _, err = run("verify", "examples/case3.prob", str(target))
    assert code == 2 and err.startswith("ERROR 2 ")


def test_bounds_list():
    code, out, _ = run("bounds", "examples/case2.prob", "--rho-list", "0.5,1")
    assert code == 0
    assert out.count("L = ") == 2
    assert "L = 0.5863858413477092" in out


def test_sweep_stdout():
    code, out, _ = run("sweep", "examples/case3.prob", "--rho-range", "0.5", "2", "4")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "rho,L,U,lambda,converged,cone_ok,in_interval"
    assert len(lines) == 5 and lines[1].endswith(",,,,")


def test_sweep_files(tmp_path):
    csv_path, svg_path = tmp_path / "rows.csv", tmp_path / "band.svg"
    code, out, _ = run("sweep", "examples/case3.prob", "--rho-range", "0.25", "4", "16",
                       "--solve", "--csv", str(csv_path), "--svg", str(svg_path))
    assert code == 0 and out == ""
    rows = csv_path.read_text().splitlines()
    assert len(rows) == 17
    assert all(r.endswith("true,true,true") for r in rows[1:])
    assert svg_path.read_text().startswith("<svg")


def test_plot(tmp_path):
    svg_path = tmp_path / "band.svg"
    code, _, _ = run("plot", "examples/case2.prob", "--rho-list", "0.5,1,2", "--svg", str(svg_path))
    assert code == 0 and "<polygon" in svg_path.read_text()
    code, _, err = run("plot", "examples/case2.prob", "--rho", "1")
    assert code == 2


@pytest.mark.parametrize("argv, code", [
    (["classify", "nowhere/missing.prob"], 5),
    (["frobnicate", "examples/case2.prob"], 2),
    (["solve", "examples/case2.prob"], 2),
    (["solve", "examples/case2.prob", "--rho", "1", "--n", "64"], 2),
    (["solve", "examples/case2.prob", "--rho", "1", "--n", "33"], 2),
    (["solve", "examples/case2.prob", "--rho", "-1"], 2),
    (["solve", "examples/case2.prob", "--rho", "1", "--max-iter", "2"], 3),
    (["sweep", "examples/case2.prob", "--rho", "1", "--rho-list", "1,2"], 2),
    (["sweep", "examples/case2.prob"], 2),
    (["bounds", "examples/case2.prob", "--rho-range", "1", "2", "0"], 2),
    (["classify", "examples/case3.prob", "--b", "0.9"], 2),
])
def test_exit_codes(argv, code):
    got, out, err = run(*argv)
    assert got == code
    assert err.startswith(f"ERROR {code} ") and err.count("\n") == 1


def test_parse_error_exit(tmp_path):
    bad = tmp_path / "bad.prob"
    bad.write_text("alpha = 2.5\neta = 0.5\nbeta = 1\nf = 1\nH1 = 0\nH2 = 0\n")
    code, _, err = run("classify", str(bad))
    assert code == 2 and "line 1" in err


def test_hypothesis_fail_exit(tmp_path):
    spec = tmp_path / "zero.prob"
    spec.write_text("alpha = 1.5\neta = 0.5\nbeta = 1\nf = 0\nH1 = 0\nH2 = 0\n")
    assert run("bounds", str(spec), "--rho", "1")[0] == 4


def test_io_error_exit(tmp_path):
    code, _, err = run("solve", "examples/degenerate_f1.prob", "--rho", "1",
                       "--out", str(tmp_path / "no" / "dir" / "eig.csv"))
    assert code == 5 and err.startswith("ERROR 5 ")


def test_stdout_deterministic():
    a = run("solve", "examples/case3.prob", "--rho", "1", "--n", "129")
    b = run("solve", "examples/case3.prob", "--rho", "1", "--n", "129")
    assert a == b


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracthermo", "classify", "examples/case1.prob"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "case = Case1" in proc.stdout
