import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from pathrisk.cli import main
from pathrisk.config import DEFAULT_CONFIG, load_config, parse_config
from pathrisk.bench import BenchmarkConfig
from pathrisk.errors import ConfigError

SMALL = """
[[trajectories]]
name = "line"
family = "segment"
start = [0.0, 0.0]
end = [5.0, 0.0]

[[trajectories]]
name = "arch"
family = "quadratic"
c0 = [0.0, 0.0]
c1 = [5.0, 1.0]
c2 = [0.0, -1.0]

[uncertainty]
sigma_values = [0.01, 0.1]

[montecarlo]
trials = 2000

[grid]
cell_sizes = [0.03125]

[bench]
methods = ["stagewise", "risk_density", "grid"]
timing_repeats = 1

[radius_sweep]
radii = [0.05, 0.1, 0.2]
sigmas = [0.01, 0.1]

[estimate]
trajectory = "line"
"""


@pytest.fixture
def small(tmp_path):
    p = tmp_path / "small.toml"
    p.write_text(SMALL)
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_default_config_is_benchmark():
    cfg = load_config().bench
    ref = BenchmarkConfig()
    assert cfg.truth_key() == ref.truth_key()
    assert cfg.stagewise_N == 50 and cfg.grid_cell_sizes == (2.0**-9,)


def test_print_default_config(capsys):
    assert run(capsys, "print-default-config")[1] == DEFAULT_CONFIG
    assert run(capsys, "--print-default-config")[1] == DEFAULT_CONFIG


@pytest.mark.parametrize("text", [
    "not toml [",
    "[bogus]\nx = 1\n",
    "[geometry]\nradius = 1\n",
    "[uncertainty]\nsigma_values = [0.1]\n",
    SMALL.replace('family = "segment"', 'family = "spline"'),
    SMALL.replace("sigma_values = [0.01, 0.1]", "sigma_values = [0.1, 0.01]"),
    SMALL.replace('trajectory = "line"', 'trajectory = "nope"'),
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_estimate_risk_density(capsys):
    code, out, err = run(capsys, "estimate", "--method", "risk_density", "--trajectory", "mu_A",
                         "--sigma", "0.01")
    assert code == 0
    rec = json.loads(out)
    assert rec["value"] == pytest.approx(0.79788456, rel=1e-7)
    assert "risk_density" in err


def test_estimate_unknown_method(capsys):
    code, _, err = run(capsys, "estimate", "--method", "oracle")
    assert code == 2
    assert "risk_density" in err and "montecarlo" in err


def test_estimate_mc_repeatable(capsys):
    lines = []
    for _ in range(2):
        code, out, _ = run(capsys, "estimate", "--method", "montecarlo", "--seed", "9",
                           "--trials", "5000")
        assert code == 0
        rec = json.loads(out)
        rec.pop("wall_time")
        lines.append(rec)
    assert lines[0] == lines[1]


def test_exit_codes(capsys, tmp_path, small):
    assert run(capsys, "estimate", "--config", tmp_path / "missing.toml")[0] == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("[uncertainty]\nsigma_values = []\n")
    assert run(capsys, "estimate", "--config", bad)[0] == 3
    assert run(capsys, "estimate", "--config", small, "--waypoints", "0")[0] == 3
    assert run(capsys, "bench", "--config", small, "--methods", "stagewise,psychic")[0] == 2
    # A cell size this small trips the grid cell cap at run time.
    code, _, err = run(capsys, "estimate", "--config", small, "--method", "grid", "--cells", "1e-5")
    assert code == 4 and "ResourceError" in err
    assert run(capsys)[0] == 2


def test_bench_outputs(capsys, tmp_path, small):
    out = tmp_path / "out"
    code, stdout, _ = run(capsys, "bench", "--config", small, "--out", out, "--emit", "csv,svg")
    assert code == 0
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["method"] for r in rows] == ["montecarlo", "stagewise", "risk_density", "grid"]
    assert float(rows[0]["frobenius"]) == 0 and float(rows[0]["max_abs"]) == 0
    with open(out / "values_risk_density.csv") as fh:
        header = fh.readline().strip()
    assert header == "method,trajectory,sigma,value,raw,seconds"
    with open(out / "errors_grid.csv") as fh:
        assert fh.readline().strip() == "trajectory,sigma,error"
    for tag in ("montecarlo", "stagewise", "risk_density", "grid"):
        assert (out / f"heatmap_{tag}.svg").read_text().lstrip().startswith("<?xml")
    # Rerun: same summary row order and identical values.
    run(capsys, "bench", "--config", small, "--out", out)
    with open(out / "summary.csv") as fh:
        assert [r["method"] for r in csv.DictReader(fh)] == [r["method"] for r in rows]


def test_csv_round_trip(capsys, tmp_path, small):
    from pathrisk.bench import run_benchmark
    out = tmp_path / "rt"
    run(capsys, "bench", "--config", small, "--out", out)
    cfg = load_config(small).bench
    res = run_benchmark(cfg)
    with open(out / "values_risk_density.csv") as fh:
        vals = np.array([float(r["value"]) for r in csv.DictReader(fh)]).reshape(cfg.shape)
    np.testing.assert_array_equal(vals, res.methods["risk_density"].values)
    with open(out / "values_montecarlo.csv") as fh:
        mc = np.array([float(r["value"]) for r in csv.DictReader(fh)]).reshape(cfg.shape)
    np.testing.assert_array_equal(mc, res.truth)


def test_radius_sweep_outputs(capsys, tmp_path, small):
    out = tmp_path / "sweep"
    code, stdout, _ = run(capsys, "radius-sweep", "--config", small, "--out", out, "--emit", "svg")
    assert code == 0
    blocks = sorted(p.name for p in out.glob("sweep_*_sigma*.csv"))
    assert len(blocks) == 4
    with open(out / "sweep_line_sigma0.01.csv") as fh:
        rows = list(csv.DictReader(fh))
    r = [float(x["radius"]) for x in rows]
    dT = [float(x["dT"]) for x in rows]
    assert r[0] + sum(dT) == r[-1]
    assert (out / "sweep_arch_sigma0.1.svg").exists()
    with open(out / "sweep_mean_abs_error_pct.csv") as fh:
        table = list(csv.reader(fh))
    assert table[0] == ["trajectory", "risk_density_0.01", "sensitivity_0.01",
                        "risk_density_0.1", "sensitivity_0.1"]
    assert [row[0] for row in table[1:]] == ["line", "arch"]


def test_fit_scale_command(capsys, tmp_path, small):
    code, out, _ = run(capsys, "fit-scale", "--config", small, "--out", tmp_path / "fit")
    assert code == 0 and out.startswith("r_opt=")
    assert (tmp_path / "fit" / "fit_scale.csv").exists()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pathrisk.cli", "estimate", "--sigma", "0.1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["method"] == "risk_density"
