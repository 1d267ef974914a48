import subprocess
import sys

import pytest

from hardyfem.cli import main


def test_solve(capsys):
    assert main(["solve", "--n", "1", "--N", "1000"]) == 0
    out = capsys.readouterr().out
    assert "S_h = 0.3" in out


def test_calibrate(capsys):
    assert main(["calibrate", "--n", "3", "--h", "1e-3"]) == 0
    out = capsys.readouterr().out
    assert "delta = 0.2638" in out and "np.float64" not in out


def test_upper(capsys):
    assert main(["upper", "--n", "1", "--N", "1000"]) == 0
    assert "epsilon = 0.329" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["solve", "--n", "2", "--N", "10"],
    ["solve", "--n", "1", "--N", "0"],
    ["solve", "--n", "1"],
    ["calibrate", "--n", "1", "--h", "2"],
    ["upper", "--n", "1", "--N", "10"],
    ["sweep", "--n", "1", "--n-min", "1", "--n-max", "10", "--points", "3", "--out", "x.csv"],
    ["frobnicate"],
    [],
])
def test_bad_arguments(argv, capsys):
    assert main(argv) == 2


def test_solver_failure_exit_code(capsys):
    # h = 0.6 has no radial calibration
    assert main(["calibrate", "--n", "3", "--h", "0.6"]) == 1


def test_io_failure_exit_code(tmp_path, capsys):
    out = tmp_path / "missing" / "s.csv"
    assert main(["sweep", "--n", "1", "--n-min", "10", "--n-max", "20", "--points", "2",
                 "--out", str(out)]) == 1
    assert str(out) in capsys.readouterr().err


def test_sweep_and_plot(tmp_path, capsys):
    out, svg = tmp_path / "s.csv", tmp_path / "s.svg"
    assert main(["sweep", "--n", "3", "--n-min", "10", "--n-max", "1000", "--points", "4",
                 "--out", str(out), "--plot", str(svg)]) == 0
    assert out.read_text().startswith("N,h,S_h,gap,mu,ub,ratio_lb,ratio_asym,ratio_ub,eig_residual\n")
    assert svg.read_text().startswith("<svg")


def test_eigfun(tmp_path, capsys):
    out = tmp_path / "e.csv"
    assert main(["eigfun", "--n", "1", "--N", "100", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,u_h,u_analytic,diff" and len(lines) == 1002


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "hardyfem", "solve", "--n", "3", "--N", "50"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "S_h" in r.stdout
    r = subprocess.run([sys.executable, "-m", "hardyfem", "solve", "--n", "2", "--N", "50"],
                       capture_output=True, text=True)
    assert r.returncode == 2
