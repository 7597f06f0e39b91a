import csv
import io
import math

import pytest

from hausdorff_approx import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, list(csv.reader(io.StringIO(out))), err


def test_apply_cesaro_indicator(capsys):
    code, rows, _ = run(capsys, "apply", "--operator", "cesaro", "--function", "indicator01", "--x", "2")
    assert code == 0
    assert rows == [["x", "value"], ["2", "0.5"]]


def test_apply_constant(capsys):
    code, rows, _ = run(capsys, "apply", "--operator", "cesaro", "--function", "const1", "--x=-3,0.5,7")
    assert code == 0
    assert [r[1] for r in rows[1:]] == ["1", "1", "1"]


def test_apply_bellman_log_two(capsys):
    code, rows, _ = run(capsys, "apply", "--operator", "bellman", "--function", "indicator12", "--x", "1")
    assert code == 0
    assert rows[1][0] == "1"
    assert float(rows[1][1]) == pytest.approx(math.log(2), abs=1e-10)
    assert rows[1][1].startswith("0.693147")


def test_approximate_band_limited(capsys):
    code, rows, _ = run(capsys, "approximate", "--function", "fejer", "--N", "2", "--x=-3,-1,0,0.5,2,5")
    assert code == 0
    assert rows[0] == ["x", "N", "approximant", "target", "abs_error", "tail_error_estimate"]
    assert all(float(r[4]) <= 1e-3 for r in rows[1:])


def test_approximate_zero(capsys):
    code, rows, _ = run(capsys, "approximate", "--function", "zero", "--N", "4,8", "--x", "0.5,1")
    assert code == 0
    assert all(float(v) == 0 for r in rows[1:] for v in r[2:5])


def test_approximate_forward_mollified(capsys):
    code, rows, _ = run(capsys, "approximate", "--function", "mollified12", "--target", "forward",
                        "--N", "256", "--x", "1")
    assert code == 0
    assert float(rows[1][4]) <= 5e-2


def test_study_bellman_column_grows(capsys):
    code, rows, _ = run(capsys, "study", "--study", "bellman", "--function", "tent", "--S", "4,16,64,256")
    assert code == 0
    assert rows[0][0] == "S"
    bounds = [float(r[2]) for r in rows[1:]]
    assert all(b > a for a, b in zip(bounds, bounds[1:]))


def test_study_fejer_has_log_ratio_column(capsys):
    code, rows, _ = run(capsys, "study", "--study", "fejer", "--function", "tent", "--N", "8,16,32,64")
    assert code == 0
    assert rows[0] == ["r", "error", "bound", "log_ratio", "fitted_slope", "predicted_slope"]
    assert all(r[3] not in ("", "nan") for r in rows[1:-1])
    assert rows[-1][0] == "fit" and float(rows[-1][4]) < 0


def test_study_convergence_footer(capsys):
    code, rows, _ = run(capsys, "study", "--function", "tent", "--p", "inf", "--N", "4,8,16,32")
    assert code == 0
    assert [r[0] for r in rows[1:]] == ["4", "8", "16", "32", "fit"]
    assert float(rows[-1][4]) < -0.5


def test_modulus_and_bounds_commands(capsys):
    code, rows, _ = run(capsys, "modulus", "--function", "tent", "--delta", "0.25")
    assert code == 0 and float(rows[1][1]) == pytest.approx(0.25)
    code, rows, _ = run(capsys, "bounds", "--function", "cusp:0.5", "--p", "2", "--N", "8,16")
    assert code == 0
    assert rows[0] == ["N", "term1", "term2", "total", "normalizer", "bound"]
    assert float(rows[2][3]) < float(rows[1][3])


def test_bounds_bellman_reports_inf(capsys):
    code, rows, _ = run(capsys, "bounds", "--operator", "bellman", "--function", "tent", "--N", "8")
    assert code == 0
    assert rows[1][2] == "inf"


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\noperator = cesaro\nfunction = indicator01\nx = 2, 4\n")
    code, rows, _ = run(capsys, "apply", "--config", str(cfg))
    assert code == 0 and [r[1] for r in rows[1:]] == ["0.5", "0.25"]
    code, rows, _ = run(capsys, "apply", "--config", str(cfg), "--x", "0.5")
    assert rows[1:] == [["0.5", "1"]]


def test_output_file(tmp_path, capsys):
    out = tmp_path / "out.csv"
    assert cli.main(["apply", "--function", "indicator01", "--x", "2", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert out.read_text() == "x,value\n2,0.5\n"


@pytest.mark.parametrize("argv", [
    ["apply", "--function", "sawtooth"],
    ["apply", "--operator", "hilbert"],
    ["apply", "--x", "one"],
    ["apply", "--p", "0.5", "--target", "adjoint"],
    ["bounds", "--p", "0.5"],
    ["apply", "--tol", "0"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_CONFIG
    assert err.startswith("error:")


def test_unknown_config_key_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run(capsys, "apply", "--config", str(cfg))[0] == cli.EXIT_CONFIG
    assert run(capsys, "apply", "--config", str(tmp_path / "missing.cfg"))[0] == cli.EXIT_CONFIG


def test_numerical_failure_exit_3(capsys):
    code, _, err = run(capsys, "apply", "--operator", "cesaro", "--function", "const1", "--target", "forward",
                       "--x", "1")
    assert code == cli.EXIT_NUMERICAL
    assert err.startswith("numerical failure:")
