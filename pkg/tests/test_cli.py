import csv
import math
import re
from pathlib import Path

import numpy as np
import pytest

from qfric.cli import CsvTable, load_config, main, parse_config_text, read_model_file
from qfric.errors import ConfigError
from qfric.trajectory import SampledTrajectory, uniform_line, write_trajectory

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
UNIT = re.compile(r"^[A-Za-z0-9_/]+ \[[^\]]+\]$")

SMALL = {
    "figure1": "[figure1]\npoints = 61\nx_max = 4\n",
    "lambda_table": "[lambda_table]\nthetas = 0, 0.01\norders = 1, 3\n",
    "work_scan": "[work_scan]\nspeeds = 0.3\nimpacts = 1.0\n",
    "plate": "[plate]\ngaps = 1, 2\n",
}


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def run_cli(tmp_path, scenario, text="", extra=()):
    out = tmp_path / f"{scenario}.csv"
    cfg = write(tmp_path, "[run]\ntemperature = 0.01\n" + text)
    code = main([scenario, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def column(header, rows, name):
    i = header.index(name)
    return np.array([float(r[i]) for r in rows])


def test_parser_keeps_repeated_keys_and_strips_comments():
    text = "# top\n[model_a]\ntransition = 1, 0.01, 1  # first\ntransition = 2, 0.02, 0.5\n\n[run]\ngap=2\n"
    sections = parse_config_text(text)
    assert sections["model_a"] == [("transition", "1, 0.01, 1"), ("transition", "2, 0.02, 0.5")]
    assert sections["run"] == [("gap", "2")]


@pytest.mark.parametrize("text", ["[run\ngap = 1\n", "[run]\ngap 1\n", "[run]\n = 1\n"])
def test_parser_rejects_malformed_lines(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


@pytest.mark.parametrize(
    "text",
    [
        "[run]\nspeeed = 0.1\n",
        "[run]\ntemperature = -1\n",
        "[run]\ngap = 0\n",
        "[run]\ngap = 1, 2\n",
        "[run]\ntemperature = warm\n",
        "[run]\ntemperature = 0.1\ntemperature = 0.2\n",
        "[model_a]\ntransition = 1, 0.01\n",
        "[model_a]\nomega = 1\n",
        "[model_a]\ntransition = 1, 3, 1\n",
        "[run]\nmodel_a = missing.model\n",
        "[lambda_table]\norders = 2\n",
    ],
)
def test_bad_config_exits_with_status_two(tmp_path, text):
    cfg = write(tmp_path, text)
    assert main(["lambda_table", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == 2
    assert not (tmp_path / "x.csv").exists()


def test_missing_config_file_exits_two(tmp_path):
    assert main(["plate", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "x.csv")]) == 2


def test_figure1_needs_temperature(tmp_path):
    cfg = write(tmp_path, "[run]\ntemperature = 0\n")
    assert main(["figure1", "--config", str(cfg), "--out", str(tmp_path / "f.csv")]) == 2


def test_model_files_resolve_relative_to_config():
    cfg = load_config("lambda_table", CONFIGS / "multilevel.cfg")
    assert len(cfg.model_a.transitions) == 2
    assert read_model_file(CONFIGS / "two_level.model") == cfg.model_b


def test_shipped_configs_load():
    for path in CONFIGS.glob("*.cfg"):
        for scenario in ("figure1", "lambda_table", "work_scan", "plate", "validate"):
            load_config(scenario, path)


def test_csv_cells_round_trip():
    table = CsvTable(("a [1]", "b [-]", "c [-]"), ((0.1 + 0.2, True, "x, y"), (math.nan, False, 3)))
    text = table.to_text()
    header, rows = text.splitlines()[0], list(csv.reader(text.splitlines()[1:]))
    assert header == "a [1],b [-],c [-]"
    assert float(rows[0][0]) == 0.1 + 0.2 and rows[0][2] == "x, y"
    assert rows[1] == ["nan", "false", "3"]
    with pytest.raises(ValueError):
        CsvTable(("a [1]",), ((1, 2),))


@pytest.mark.parametrize("scenario", sorted(SMALL))
def test_scenarios_are_deterministic_and_labelled(tmp_path, scenario):
    code, out = run_cli(tmp_path, scenario, SMALL[scenario])
    assert code == 0
    first = out.read_bytes()
    code, out = run_cli(tmp_path, scenario, SMALL[scenario])
    assert code == 0 and out.read_bytes() == first
    header, rows = read_csv(out)
    assert rows and all(UNIT.match(h) for h in header), header
    first.decode("ascii")


def test_figure1_curve_properties(tmp_path):
    code, out = run_cli(tmp_path, "figure1", SMALL["figure1"])
    header, rows = read_csv(out)
    x = column(header, rows, "x/z0 [1]")
    f1 = column(header, rows, "F1_x/f [1]")
    f3 = column(header, rows, "F3_x/f [1]")
    assert np.all(f1 <= 0) and f1[np.argmin(np.abs(x))] == pytest.approx(-1.0)
    assert np.allclose(f1, f1[::-1], rtol=1e-12) and np.allclose(f3, f3[::-1], rtol=1e-12)
    assert np.any(f3 > 0) and np.any(f3 < 0)


def test_lambda_table_reports_regimes(tmp_path):
    code, out = run_cli(tmp_path, "lambda_table", SMALL["lambda_table"])
    header, rows = read_csv(out)
    lam1 = column(header, rows, "Lambda1_quad [L^6 w0^0]")
    assert lam1[0] == 0.0 and lam1[1] > 0
    assert np.all(column(header, rows, "Lambda3_quad [L^6 w0^-2]") < 0)


def test_work_scan_from_trajectory_file(tmp_path):
    path = tmp_path / "pass.dat"
    times = np.linspace(-250, 250, 2001)
    write_trajectory(path, SampledTrajectory.from_function(uniform_line(0.3, 1.0), times))
    code, out = run_cli(tmp_path, "work_scan", "trajectory = pass.dat\n")
    assert code == 0
    header, rows = read_csv(out)
    assert len(rows) == 1 and rows[0][header.index("flags [-]")] == "ok"
    assert rows[0][header.index("W1_verdict [-]")] == "odd_sign_ok"


def test_work_scan_flags_short_trajectory(tmp_path):
    path = tmp_path / "short.dat"
    write_trajectory(path, SampledTrajectory.from_function(uniform_line(0.3, 1.0), np.linspace(-10, 10, 41)))
    code, out = run_cli(tmp_path, "work_scan", "trajectory = short.dat\n")
    header, rows = read_csv(out)
    assert code == 0 and rows[0][header.index("flags [-]")].startswith("NotScattering")


def test_plate_reports_both_prefactors(tmp_path):
    code, out = run_cli(tmp_path, "plate", SMALL["plate"])
    header, rows = read_csv(out)
    order = column(header, rows, "order [-]")
    dev = column(header, rows, "rel_dev_closed [1]")
    assert np.all(dev[order % 2 == 1] < 1e-8)
    assert np.all(np.isfinite(column(header, rows, "rel_dev_reference [1]")[order % 2 == 1]))
    slope = column(header, rows, "slope_fit [1]")
    assert np.allclose(slope, column(header, rows, "slope_law [1]"), atol=0.02)


def test_validate_passes_and_negative_control_fails(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["validate", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert all(r[-1] == "true" for r in rows)
    neg = str(CONFIGS / "negative_control.cfg")
    assert main(["validate", "--config", neg, "--out", str(out)]) == 1
    header, rows = read_csv(out)
    failed = [r[0] for r in rows if r[-1] == "false"]
    assert failed == ["kappa_fit_rel_dev"]
    assert main(["validate", "--config", neg, "--tol", "1e-2", "--out", str(out)]) == 0
