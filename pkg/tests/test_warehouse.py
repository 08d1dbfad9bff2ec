"""
DuckDB warehouse over a small study lake: layout detection, views, registry.
"""
import duckdb
import polars as pl
import pytest

from chaosmap.lib.errors import DomainError
from chaosmap.lib.warehouse import build_warehouse, find_table_glob, load_config, select_tables


@pytest.fixture
def lake(tmp_path):
    studies = tmp_path / "data" / "studies"
    flat = studies / "demo_max_chaos_surface"
    flat.mkdir(parents=True)
    pl.DataFrame(
        {"alpha": [1.0, 2.0], "sigma": [1.0, 1.0], "max_fraction": [0.4, 0.6], "argmax_energy": [2.0, 3.0]}
    ).write_parquet(flat / "demo_max_chaos_surface.parquet")

    hive = studies / "demo_fraction_curves" / "alpha=1.0" / "sigma=8.0"
    hive.mkdir(parents=True)
    pl.DataFrame({"energy": [16.025, 16.275], "fraction": [0.2, 0.3]}).write_parquet(
        hive / "demo_fraction_curves.parquet"
    )

    (studies / "empty_table").mkdir()

    config = tmp_path / "warehouse.yaml"
    config.write_text("paths:\n  studies: data/studies\n  warehouse: data/duckdb/studies.duckdb\n")
    return tmp_path, config


def test_layouts_are_detected(lake):
    root, config = lake
    cfg = load_config(config)
    assert cfg.studies == (root / "data" / "studies").resolve()
    assert find_table_glob(cfg.studies, "demo_max_chaos_surface")[1] == "flat"
    assert find_table_glob(cfg.studies, "demo_fraction_curves")[1] == "hive"
    assert find_table_glob(cfg.studies, "empty_table") is None
    assert [t for t, _, _ in select_tables(cfg)] == ["demo_fraction_curves", "demo_max_chaos_surface"]


def test_build_registers_views(lake):
    _, config = lake
    cfg = load_config(config)
    selected = build_warehouse(cfg)
    assert len(selected) == 2
    assert cfg.warehouse.exists()
    assert not cfg.warehouse.with_suffix(".duckdb.tmp").exists()

    con = duckdb.connect(str(cfg.warehouse), read_only=True)
    try:
        assert con.execute("SELECT count(*) FROM demo_max_chaos_surface").fetchone()[0] == 2
        row = con.execute(
            "SELECT CAST(alpha AS DOUBLE), CAST(sigma AS DOUBLE), count(*) FROM demo_fraction_curves GROUP BY ALL"
        ).fetchone()
        assert row == (1.0, 8.0, 2)
        registry = con.execute("SELECT table_name, layout FROM registry__tables ORDER BY 1").fetchall()
        assert registry == [("demo_fraction_curves", "hive"), ("demo_max_chaos_surface", "flat")]
    finally:
        con.close()


def test_only_and_tables(lake):
    _, config = lake
    cfg = load_config(config)
    selected = build_warehouse(cfg, as_tables=True, only={"demo_max_chaos_surface"})
    assert [t for t, _, _ in selected] == ["demo_max_chaos_surface"]


def test_config_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("paths:\n  studies: data\n")
    with pytest.raises(DomainError):
        load_config(bad)
    bad.write_text("paths:\n  studies: a\n  warehouse: b\ntables: nope\n")
    with pytest.raises(DomainError):
        load_config(bad)
