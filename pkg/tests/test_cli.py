"""
Command-line checks through main(argv).

Groups:
  • exit codes: ok, domain/input errors, usage errors
  • CSV headers of simulate, poincare, sample, ld-grid
  • classify → plot histogram, calibration handling
  • curve files: fit and plot, empty input
  • sweep with manifest and resume; warehouse listing
"""
import json
import math

import numpy as np
import polars as pl
import pytest
import yaml
from scipy.stats import norm

from chaosmap import __version__
from chaosmap.cli import LD_GRID_COLUMNS, main
from chaosmap.lib.frames import read_json, write_csv
from chaosmap.lib.sweep import curve_file_name, energy_grid
from chaosmap.lib.dynamics import ModelParams

UNIT_ARGS = ["--alpha", "1", "--sigma", "1"]


def _bimodal_grid(path, n=2_000):
    q = (np.arange(n // 2) + 0.5) / (n // 2)
    logs = np.concatenate([norm.ppf(q, -6.0, 0.5), norm.ppf(q, 2.0, 0.5)])
    write_csv(pl.DataFrame({"theta1": np.linspace(0, 3, n), "p1": np.zeros(n), "log10_s": logs}), path)
    return path


def _single_peak_grid(path, n=1_000):
    q = (np.arange(n) + 0.5) / n
    write_csv(
        pl.DataFrame({"theta1": np.linspace(0, 3, n), "p1": np.zeros(n), "log10_s": norm.ppf(q, -6.0, 0.5)}), path
    )
    return path


def _curve_file(directory, alpha, sigma, energies, fractions):
    path = directory / curve_file_name(alpha, sigma)
    write_csv(
        pl.DataFrame(
            {
                "energy": list(energies),
                "fraction": list(fractions),
                "threshold": [-2.0] * len(energies),
                "scenario": ["Mixed"] * len(energies),
                "unclassified": [0] * len(energies),
            }
        ),
        path,
    )
    return path


# ───────────────────────────── exit codes ─────────────────────────────

def test_equilibria_json(capsys):
    assert main(["equilibria", *UNIT_ARGS]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert [e["energy"] for e in payload] == [-3.0, -1.0, 1.0, 3.0]
    assert [e["stability"] for e in payload] == ["CenterCenter", "SaddleCenter", "SaddleCenter", "SaddleSaddle"]


def test_equilibria_to_file(tmp_path):
    out = tmp_path / "eq.json"
    assert main(["equilibria", *UNIT_ARGS, "--out", str(out)]) == 0
    assert len(read_json(out)) == 4


def test_usage_errors_exit_2(capsys):
    assert main([]) == 2
    assert main(["equilibria"]) == 2
    assert main(["simulate", *UNIT_ARGS, "--state", "1,2,3", "--t-end", "1"]) == 2
    assert main(["nonsense"]) == 2


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_model_flags_name_the_ratios(capsys):
    assert main(["equilibria", "--help"]) == 0
    out = " ".join(capsys.readouterr().out.split())
    assert "Length ratio l1/l2" in out
    assert "Mass ratio m1/m2" in out


def test_domain_error_exits_1(capsys):
    assert main(["equilibria", "--alpha", "0", "--sigma", "1"]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_missing_input_exits_1(tmp_path, capsys):
    assert main(["fit", "--in", str(tmp_path / "missing.csv"), "--regime", "decay"]) == 1
    assert "input not found" in capsys.readouterr().err


def test_energy_below_minimum_exits_1(capsys):
    assert main(["sample", *UNIT_ARGS, "--energy", "-3.5", "--n", "10", "--seed", "1"]) == 1


# ───────────────────────────── CSV commands ─────────────────────────────

def test_simulate_header(tmp_path):
    out = tmp_path / "traj.csv"
    assert main(["simulate", *UNIT_ARGS, "--state", "0.1,0.1,0,0", "--t-end", "2", "--sample", "0.5",
                 "--out", str(out)]) == 0
    df = pl.read_csv(out)
    assert df.columns == ["t", "theta1", "theta2", "p1", "p2", "energy"]
    assert df.height == 5

    assert main(["simulate", *UNIT_ARGS, "--state", "0.1,0.1,0,0", "--t-end", "1", "--ld", "--out", str(out)]) == 0
    assert pl.read_csv(out).columns[-1] == "ld"


def test_poincare_header(capsys):
    assert main(["poincare", *UNIT_ARGS, "--energy", "20", "--theta1", "0.5", "--p1", "0", "--crossings", "5"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "t,theta1,p1"
    assert len(lines) == 6


def test_sample_header(capsys):
    assert main(["sample", *UNIT_ARGS, "--energy", "20", "--n", "25", "--seed", "3"]) == 0
    df = pl.read_csv(capsys.readouterr().out.encode())
    assert df.columns == ["theta1", "p1", "p2"]
    assert df.height == 25
    assert df["theta1"].min() >= 0.0


def test_sample_full_range(capsys):
    assert main(["sample", *UNIT_ARGS, "--energy", "20", "--n", "200", "--seed", "3", "--full-range"]) == 0
    df = pl.read_csv(capsys.readouterr().out.encode())
    assert df["theta1"].min() < 0.0


def test_ld_grid_header(tmp_path):
    out = tmp_path / "ld.csv"
    argv = ["ld-grid", *UNIT_ARGS, "--energy", "5", "--n", "3", "--seed", "1", "--tau", "1", "--tol", "1e-6",
            "--out", str(out)]
    assert main(argv) == 0
    df = pl.read_csv(out)
    assert df.columns == LD_GRID_COLUMNS
    assert df.height == 3
    assert set(df["status"].to_list()) <= {"ok", "unclassifiable"}


# ───────────────────────────── classify / histogram ─────────────────────────────

def test_classify_then_plot_histogram(tmp_path, capsys):
    grid = _bimodal_grid(tmp_path / "ld.csv")
    report_path = tmp_path / "report.json"
    labels = tmp_path / "labels.csv"
    assert main(["classify", "--in", str(grid), "--out", str(report_path), "--labels", str(labels)]) == 0
    report = read_json(report_path)
    assert report["scenario"] == "Mixed"
    assert -3.0 <= report["threshold"] <= -1.0
    assert report["fraction"] == pytest.approx(0.5)
    assert pl.read_csv(labels).columns == ["theta1", "p1", "log10_value", "label"]

    svg = tmp_path / "hist.svg"
    assert main(["plot", "--kind", "histogram", "--in", str(report_path), "--out", str(svg)]) == 0
    assert svg.read_text().count('id="threshold"') == 1


def test_single_peak_needs_a_reference(tmp_path, capsys):
    grid = _single_peak_grid(tmp_path / "ld.csv")
    assert main(["classify", "--in", str(grid)]) == 1
    assert "calibration" in capsys.readouterr().err

    assert main(["classify", "--in", str(grid), "--cutoff", "-3"]) == 0
    assert json.loads(capsys.readouterr().out)["scenario"] == "AllRegular"


def test_saved_calibration_is_reused(tmp_path, capsys):
    grid = _single_peak_grid(tmp_path / "ld.csv")
    calibration = tmp_path / "calibration.json"
    assert main(["classify", "--in", str(grid), "--save-calibration", str(calibration)]) == 1
    capsys.readouterr()

    assert main(["classify", "--in", str(grid), "--save-calibration", str(calibration), "--energy", "-2.88"]) == 0
    saved = read_json(calibration)
    assert saved["cutoff"] == pytest.approx(saved["peak"] + 3.0)
    assert json.loads(capsys.readouterr().out)["scenario"] == "AllRegular"

    assert main(["classify", "--in", str(grid), "--calibration", str(calibration)]) == 0
    assert json.loads(capsys.readouterr().out)["scenario"] == "AllRegular"


def test_calibration_and_cutoff_are_exclusive(tmp_path):
    grid = _single_peak_grid(tmp_path / "ld.csv")
    assert main(["classify", "--in", str(grid), "--cutoff", "-3", "--calibration", "x.json"]) == 2


def test_plot_histogram_needs_a_report(tmp_path):
    bogus = tmp_path / "report.json"
    bogus.write_text("{}")
    assert main(["plot", "--kind", "histogram", "--in", str(bogus), "--out", str(tmp_path / "h.svg")]) == 1


# ───────────────────────────── curves ─────────────────────────────

def test_plot_curve_marks_equilibria(tmp_path):
    curve = _curve_file(tmp_path, 1.0, 8.0, [16.025 + 0.25 * k for k in range(13)], np.linspace(0.2, 0.6, 13))
    svg = tmp_path / "curve.svg"
    assert main(["plot", "--kind", "curve", "--in", str(curve), "--out", str(svg)]) == 0
    text = svg.read_text()
    assert sum(f'id="equilibrium-energy-{n}"' in text for n in range(1, 5)) == 4


def test_plot_empty_curve_writes_nothing(tmp_path, capsys):
    curve = _curve_file(tmp_path, 1.0, 8.0, [], [])
    svg = tmp_path / "curve.svg"
    assert main(["plot", "--kind", "curve", "--in", str(curve), "--out", str(svg)]) == 1
    assert not svg.exists()


def test_fit_reads_the_pair_from_the_file_name(tmp_path, capsys):
    energies = energy_grid(ModelParams(1.0, 1.0))
    fractions = [0.9 * math.exp(-0.05 * (h - 3.0)) if h >= 3.0 else 0.5 for h in energies]
    curve = _curve_file(tmp_path, 1.0, 1.0, energies, fractions)
    assert main(["fit", "--in", str(curve), "--regime", "decay"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["model"] == "ExpDecay"
    assert payload["B"] == pytest.approx(0.05, rel=1e-6)
    assert payload["n_points"] == 131


def test_fit_without_pair_exits_1(tmp_path, capsys):
    curve = _curve_file(tmp_path, 1.0, 1.0, [3.0, 4.0, 5.0], [0.5, 0.4, 0.3])
    renamed = curve.rename(tmp_path / "mystery.csv")
    assert main(["fit", "--in", str(renamed), "--regime", "decay"]) == 1
    assert "--alpha" in capsys.readouterr().err


# ───────────────────────────── sweep / warehouse ─────────────────────────────

def test_sweep_manifest_and_resume(tmp_path, capsys, tiny_plan):
    plan_path = tmp_path / "plan.yaml"
    plan_path.write_text(yaml.safe_dump(tiny_plan.to_mapping()))
    out = tmp_path / "run"

    argv = ["sweep", "--plan", str(plan_path), "--out", str(out)]
    assert main(argv) == 0
    first = json.loads(capsys.readouterr().out)
    assert first["computed"] == 2
    manifest = read_json(out / "manifest.json")
    assert manifest["master_seed"] == tiny_plan.master_seed
    assert manifest["config_digest"] == tiny_plan.digest()
    assert manifest["invocation"].startswith("chaosmap sweep")
    assert (out / curve_file_name(1.0, 1.0)).exists()
    assert (out / "surface.csv").exists()

    assert main([*argv, "--resume"]) == 0
    again = json.loads(capsys.readouterr().out)
    assert again["computed"] == 0
    assert again["reused"] == 2


def test_warehouse_list(tmp_path, capsys):
    (tmp_path / "data" / "studies").mkdir(parents=True)
    config = tmp_path / "warehouse.yaml"
    config.write_text("paths:\n  studies: data/studies\n  warehouse: data/duckdb/studies.duckdb\n")
    assert main(["warehouse", "--config", str(config), "--list"]) == 0
    assert "No tables matched" in capsys.readouterr().out
    assert main(["warehouse", "--config", str(tmp_path / "missing.yaml")]) == 1
