import json

import numpy as np
import pytest

from rescount import cli
from rescount import io


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path / "out"), "--cache-dir", str(tmp_path / "cache")])


@pytest.mark.parametrize("command", list(cli.COMMANDS))
def test_selftests_pass(tmp_path, command, capsys):
    assert run(tmp_path, command, "--selftest") == cli.EXIT_OK
    assert "[FAIL]" not in capsys.readouterr().out


def test_constants_report(tmp_path, capsys):
    assert run(tmp_path, "constants", "--d", "3", "--theta", "0") == cli.EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["rel_diff"] < 1e-6
    assert out["h_d"]["value"] == [0.0]
    assert out["dim_harmonics"][2] == 5 and len(out["dim_harmonics"]) == 51
    saved = json.loads((tmp_path / "out" / "constants.json").read_text())
    assert set(saved) >= {"cd_boundary", "cd_double", "rel_diff"}


def test_weyl_command_writes_csv_and_svg(tmp_path):
    code = run(tmp_path, "weyl", "--r-grid", "20:200:20")
    assert code == cli.EXIT_OK
    csv = tmp_path / "out" / "weyl.csv"
    lines = csv.read_text().splitlines()
    assert lines[0] == "# counting v1"
    meta = json.loads(lines[1][2:])
    assert meta["r_grid"][0] == 20.0 and meta["d"] == 3
    assert lines[2] == "r,count,leading,residual"
    svg = (tmp_path / "out" / "weyl.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg


def test_weyl_is_deterministic_and_cache_independent(tmp_path):
    run(tmp_path, "weyl", "--r-grid", "20:100:20")
    cold = (tmp_path / "out" / "weyl.csv").read_bytes()
    # too few rows for a fit: the table is still written, the fit reports a numeric failure
    assert run(tmp_path, "weyl", "--r-grid", "20:100:20") == cli.EXIT_NUMERIC
    warm = (tmp_path / "out" / "weyl.csv").read_bytes()
    assert cold == warm
    assert any((tmp_path / "cache").glob("zeros_*.csv"))


def test_resonances_export(tmp_path):
    assert run(tmp_path, "resonances", "--r-grid", "30") == cli.EXIT_OK
    name, meta, cols = io.read_csv(tmp_path / "out" / "resonances.csv")
    assert name == "resonances"
    assert list(cols) == ["d", "l", "nu", "k", "re_z", "im_z", "re_pole", "im_pole", "mult"]
    assert np.all(np.hypot(cols["re_pole"], cols["im_pole"]) <= 30 + 1e-9)
    assert np.allclose(cols["re_pole"], -cols["nu"] * cols["re_z"])
    assert np.all(cols["l"] <= 60)


def test_count_command(tmp_path):
    code = run(tmp_path, "count", "--r-grid", "10,15,20,30,40,50,60,70,80,90,100")
    assert code in (cli.EXIT_OK, cli.EXIT_FAIL)
    name, _, cols = io.read_csv(tmp_path / "out" / "count.csv")
    assert name == "counting"
    assert {"r", "count", "leading", "residual", "n_plus", "n_minus", "uncertainty"} <= set(cols)
    fit = json.loads((tmp_path / "out" / "count_fit.json").read_text())
    assert set(fit) == {"amplitude", "exponent", "stderr", "r_min", "r_max"}


def test_bound_command(tmp_path, capsys):
    code = run(tmp_path, "bound", "--r-grid", "20,30", "--theta-grid", "0.5,1.0")
    assert code in (cli.EXIT_OK, cli.EXIT_FAIL)
    name, _, cols = io.read_csv(tmp_path / "out" / "bound.csv")
    assert name == "stefanov"
    assert list(cols) == ["r", "theta", "sum", "hd_term", "correction_fit"]
    assert "spread" in json.loads(capsys.readouterr().out)


def test_smooth_synthetic(tmp_path, capsys):
    assert run(tmp_path, "smooth") == cli.EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert abs(out["N_fit"]["exponent"] - 2.25) < 0.1
    assert out["n_fit"]["exponent"] <= out["n_exponent_limit"]


def test_smooth_on_grid_only_table_reports_numeric_failure(tmp_path, capsys):
    r = np.arange(10.0, 101.0, 10.0)
    io.write_csv(tmp_path / "t.csv", "counting",
                 {"r": r, "count": np.floor(r ** 3 + r ** 2), "leading": r ** 3, "residual": r ** 2}, {"d": 3})
    code = run(tmp_path, "smooth", str(tmp_path / "t.csv"))
    assert code == cli.EXIT_NUMERIC
    diag = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert diag["error"] == "InsufficientDataError"


def test_smooth_rejects_non_counting_table(tmp_path):
    io.write_csv(tmp_path / "t.csv", "stefanov", {"r": [1.0]}, {})
    assert run(tmp_path, "smooth", str(tmp_path / "t.csv")) == cli.EXIT_CONFIG


@pytest.mark.parametrize("argv", [
    ["constants", "--d", "4"],
    ["constants", "--quad-tol", "1e-2"],
    ["weyl", "--r-grid", "100,50"],
    ["weyl", "--sigma", "abc"],
    ["bound", "--theta-grid", "0.5,2.0"],
])
def test_config_errors_exit_3(tmp_path, argv):
    assert run(tmp_path, *argv) == cli.EXIT_CONFIG


def test_argparse_errors_exit_3(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["nonsense"])
    assert exc.value.code == cli.EXIT_CONFIG
    with pytest.raises(SystemExit) as exc:
        cli.main(["weyl", "--d", "three"])
    assert exc.value.code == cli.EXIT_CONFIG


def test_config_file_with_flag_override(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"d": 5, "theta_grid": [0.3]}))
    assert run(tmp_path, "constants", "--config", str(path), "--d", "3") == cli.EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["d"] == 3 and out["config"]["theta_grid"] == [0.3]
