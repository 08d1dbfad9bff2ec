"""
Dagster layer checks.

Groups:
  • a reduced study materialized end to end, single and hive curve layouts
  • the IO manager on its own
  • the decay-fit comparison and regime-fit assets
  • the code location loads every shipped study
"""
import math

import dagster as dg
import polars as pl
import pytest

from chaosmap.defs.resources.parquet_io_manager import PolarsParquetIOManager, polars_parquet_io_manager
from chaosmap.defs.resources.sweep_resource import SweepResource
from chaosmap.lib.dynamics import ModelParams
from chaosmap.lib.errors import SchemaMismatch
from chaosmap.lib.study_factories import CURVE_TABLE_COLUMNS, build_study_assets
from chaosmap.lib.sweep import CELL_COLUMNS, SURFACE_COLUMNS, energy_grid


def _resources(tmp_path):
    lake = str(tmp_path / "lake")
    return {
        "sweep": SweepResource(checkpoint_root=str(tmp_path / "checkpoints"), threads=1),
        "study_io_manager": polars_parquet_io_manager.configured({"base_dir": lake, "mode": "single"}),
        "study_hive_io_manager": polars_parquet_io_manager.configured({"base_dir": lake, "mode": "hive"}),
    }


# ───────────────────────────── materialization ─────────────────────────────

@pytest.mark.parametrize("hive", [False, True])
def test_reduced_study_materializes(tmp_path, tiny_plan, hive):
    assets = build_study_assets("tiny", tiny_plan, hive=hive)
    result = dg.materialize(list(assets), resources=_resources(tmp_path))
    assert result.success

    lake = tmp_path / "lake"
    cells = pl.read_parquet(lake / "tiny_cells" / "tiny_cells.parquet")
    assert cells.columns == CELL_COLUMNS
    assert cells.height == 2

    if hive:
        part = lake / "tiny_fraction_curves" / "alpha=1.0" / "sigma=1.0" / "tiny_fraction_curves.parquet"
        assert part.exists()
        assert "alpha" not in pl.read_parquet(part).columns
    else:
        curves = pl.read_parquet(lake / "tiny_fraction_curves" / "tiny_fraction_curves.parquet")
        assert curves.columns == CURVE_TABLE_COLUMNS
        assert curves["energy"].to_list() == [-2.0, 5.0]

    surface = pl.read_parquet(lake / "tiny_max_chaos_surface" / "tiny_max_chaos_surface.parquet")
    assert surface.columns == SURFACE_COLUMNS
    assert surface.height == 1
    assert surface["max_fraction"][0] == cells["fraction"].max()

    materialization = result.asset_materializations_for_node("tiny_cells")[0]
    assert materialization.metadata["computed"].value == 2


def test_rematerializing_reuses_checkpoints(tmp_path, tiny_plan):
    assets = build_study_assets("tiny", tiny_plan)
    resources = _resources(tmp_path)
    assert dg.materialize([assets[0]], resources=resources).success
    again = dg.materialize([assets[0]], resources=resources)
    metadata = again.asset_materializations_for_node("tiny_cells")[0].metadata
    assert metadata["computed"].value == 0
    assert metadata["reused"].value == 2


def test_asset_keys_and_tags(tiny_plan):
    cells, curves, surface = build_study_assets("demo", tiny_plan, tags={"scale": "desk"})
    assert cells.key == dg.AssetKey("demo_cells")
    assert curves.key == dg.AssetKey("demo_fraction_curves")
    assert surface.key == dg.AssetKey("demo_max_chaos_surface")
    assert cells.tags_by_key[cells.key]["scale"] == "desk"
    assert cells.tags_by_key[cells.key]["domain"] == "chaos"


# ───────────────────────────── IO manager ─────────────────────────────

def test_hive_round_trip_restores_partition_columns(tmp_path):
    manager = PolarsParquetIOManager(base_dir=str(tmp_path), mode="hive")
    df = pl.DataFrame(
        {
            "alpha": [2.0, 1.0, 1.0],
            "sigma": [0.5, 8.0, 8.0],
            "energy": [1.0, 2.0, 3.0],
            "fraction": [0.1, 0.2, 0.3],
        }
    )
    manager.write_hive("curves", df)
    assert (tmp_path / "curves" / "alpha=2.0" / "sigma=0.5" / "curves.parquet").exists()
    back = manager.read("curves")
    assert back.columns == ["alpha", "sigma", "energy", "fraction"]
    assert back.rows() == [(1.0, 8.0, 2.0, 0.2), (1.0, 8.0, 3.0, 0.3), (2.0, 0.5, 1.0, 0.1)]


def test_hive_needs_partition_columns(tmp_path):
    manager = PolarsParquetIOManager(base_dir=str(tmp_path), mode="hive")
    with pytest.raises(SchemaMismatch):
        manager.write_hive("curves", pl.DataFrame({"energy": [1.0]}))


def test_missing_asset_is_reported(tmp_path):
    with pytest.raises(FileNotFoundError):
        PolarsParquetIOManager(base_dir=str(tmp_path), mode="single").read("nothing")
    with pytest.raises(FileNotFoundError):
        PolarsParquetIOManager(base_dir=str(tmp_path), mode="hive").read("nothing")


# ───────────────────────────── decay fit ─────────────────────────────

def test_decay_fit_comparison_prefers_the_exponential():
    from chaosmap.defs.assets.studies.decay_fit import decay_fit_comparison

    energies = [10.0 + 4.0 * k for k in range(31)]
    curves = pl.DataFrame(
        {
            "alpha": [1.0] * len(energies),
            "sigma": [8.0] * len(energies),
            "energy": energies,
            "fraction": [0.8 * math.exp(-0.03 * (h - 10.0)) for h in energies],
            "threshold": [-2.0] * len(energies),
            "scenario": ["Mixed"] * len(energies),
            "unclassified": [0] * len(energies),
        }
    )
    df = decay_fit_comparison(dg.build_asset_context(), curves)
    assert df["model"].to_list() == ["ExpDecay", "Linear"]
    exp_row, linear_row = df.rows(named=True)
    assert exp_row["second"] == pytest.approx(0.03, rel=1e-6)
    assert exp_row["r_squared"] > linear_row["r_squared"]


def _curve_frame(sigma, energies, fractions):
    n = len(energies)
    return pl.DataFrame(
        {
            "alpha": [1.0] * n,
            "sigma": [sigma] * n,
            "energy": energies,
            "fraction": fractions,
            "threshold": [-2.0] * n,
            "scenario": ["Mixed"] * n,
            "unclassified": [0] * n,
        }
    )


def _two_regimes(h):
    # alpha = sigma = 1: growth on (-3, -1], decay from 3
    if h <= -1.0:
        return 0.01 * math.exp(1.5 * (h + 3.0))
    if h < 3.0:
        return 0.5
    return 0.8 * math.exp(-0.04 * (h - 3.0))


def test_regime_fits_cover_both_regimes_per_sigma():
    from chaosmap.defs.assets.studies.regime_fits import REGIME_FIT_SCHEMA, regime_fits_table

    unit = energy_grid(ModelParams(1.0, 1.0))
    # sigma = 8 starts above H4 = 10, so its growth window is empty
    heavy = [11.0 + k for k in range(10)]
    curves = pl.concat(
        [
            _curve_frame(1.0, unit, [_two_regimes(h) for h in unit]),
            _curve_frame(8.0, heavy, [0.6 * math.exp(-0.02 * (h - 10.0)) for h in heavy]),
        ]
    )
    df = regime_fits_table(dg.build_asset_context(), curves)
    assert df.columns == [name for name, _ in REGIME_FIT_SCHEMA]
    assert df.select("sigma", "regime").rows() == [(1.0, "growth"), (1.0, "decay"), (8.0, "growth"), (8.0, "decay")]

    growth, decay, missing, heavy_decay = df.rows(named=True)
    assert growth["model"] == "ExpGrowth"
    assert growth["B"] == pytest.approx(1.5, rel=1e-6)
    assert growth["n_points"] == 13
    assert growth["rms_residual"] == pytest.approx(0.0, abs=1e-9)
    assert decay["model"] == "ExpDecay"
    assert decay["B"] == pytest.approx(0.04, rel=1e-6)
    assert decay["energy_lo"] == 3.0
    assert missing["status"] != "ok"
    assert missing["A"] is None and missing["converged"] is False
    assert heavy_decay["B"] == pytest.approx(0.02, rel=1e-6)


# ───────────────────────────── code location ─────────────────────────────

def test_definitions_load_every_study():
    from chaosmap.definitions import defs

    for study in ("peak_valley", "decay_fit", "regime_fits", "max_chaos_location", "full_grid"):
        for suffix in ("cells", "fraction_curves", "max_chaos_surface"):
            assert defs.get_assets_def(f"{study}_{suffix}") is not None
    assert defs.get_assets_def("decay_fit_comparison") is not None
    assert defs.get_assets_def("regime_fits_table") is not None
