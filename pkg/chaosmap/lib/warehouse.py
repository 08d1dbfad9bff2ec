"""
Build (or rebuild) a DuckDB warehouse over the study lake from a minimal YAML:

  paths:
    studies:    data/studies
    warehouse:  data/duckdb/studies.duckdb
  tables:                     # optional; every folder under `studies` if omitted
    - peak_valley_fraction_curves
    - max_chaos_location_max_chaos_surface

Autodetects flat vs hive (alpha=/sigma=) layouts. Creates 1 VIEW per table
(or TABLE with as_tables) plus a registry__tables table.
"""

from __future__ import annotations

import glob
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import duckdb
import yaml

from chaosmap.lib.errors import DomainError

log = logging.getLogger(__name__)


# ------------------------------ helpers ------------------------------

def _expand_relative(base_dir: Path, p: str | Path) -> Path:
    """
    Expand env vars and ~, then resolve relative to `base_dir` if still relative.
    YAML paths are relative to the YAML file location.
    """
    s = os.path.expandvars(os.path.expanduser(str(p)))
    candidate = Path(s)
    if not candidate.is_absolute():
        candidate = base_dir / candidate
    return candidate.resolve()


@dataclass
class WarehouseConfig:
    studies: Path
    warehouse: Path
    tables: list[str] | None


def load_config(yaml_path: str | Path) -> WarehouseConfig:
    yaml_path = Path(yaml_path).resolve()
    if not yaml_path.exists():
        raise FileNotFoundError(f"input not found: {yaml_path}")
    data = yaml.safe_load(yaml_path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise DomainError(f"{yaml_path} must be a YAML mapping")

    paths = data.get("paths") or {}
    missing = [k for k in ("studies", "warehouse") if k not in paths]
    if missing:
        raise DomainError(f"paths: missing keys {missing} in {yaml_path}")

    tables = data.get("tables")
    if tables is not None and (not isinstance(tables, list) or not all(isinstance(t, str) for t in tables)):
        raise DomainError("tables: must be a list of asset names (strings)")

    return WarehouseConfig(
        studies=_expand_relative(yaml_path.parent, paths["studies"]),
        warehouse=_expand_relative(yaml_path.parent, paths["warehouse"]),
        tables=tables,
    )


def find_table_glob(base: Path, table: str) -> tuple[str, str] | None:
    """(parquet glob, layout) for a table folder; layout is "hive" or "flat"."""
    root = base / table
    candidates = [
        (root / "alpha=*" / "sigma=*" / "*.parquet", "hive"),
        (root / "*.parquet", "flat"),
    ]
    for pattern, kind in candidates:
        pattern_str = pattern.as_posix()
        if glob.glob(pattern_str):
            return pattern_str, kind
    return None


def discover_tables(config: WarehouseConfig) -> list[str]:
    if config.tables is not None:
        return list(config.tables)
    if not config.studies.exists():
        return []
    return sorted(p.name for p in config.studies.iterdir() if p.is_dir())


def select_tables(config: WarehouseConfig, only: set[str] | None = None) -> list[tuple[str, str, str]]:
    selected = []
    for table in discover_tables(config):
        if only and table not in only:
            continue
        found = find_table_glob(config.studies, table)
        if found is None:
            log.debug("skip %s: no parquet files under %s", table, config.studies)
            continue
        selected.append((table, *found))
    return selected


def _create_views_or_tables(
    con: duckdb.DuckDBPyConnection,
    items: list[tuple[str, str, str]],
    *,
    as_tables: bool,
) -> None:
    stmt = "TABLE" if as_tables else "VIEW"
    for table, pattern, kind in items:
        con.execute(
            f"""
            CREATE OR REPLACE {stmt} {table} AS
            SELECT *
            FROM read_parquet(
              '{pattern}',
              hive_partitioning = true,
              union_by_name     = true
            );
            """
        )
        log.info("%-5s %-40s ← %-4s (%s)", stmt, table, kind, pattern)

    con.execute("DROP TABLE IF EXISTS registry__tables;")
    con.execute("CREATE TABLE registry__tables (table_name TEXT, parquet_glob TEXT, layout TEXT);")
    if items:
        con.executemany("INSERT INTO registry__tables VALUES (?, ?, ?);", items)


def build_warehouse(
    config: WarehouseConfig,
    *,
    as_tables: bool = False,
    only: set[str] | None = None,
) -> list[tuple[str, str, str]]:
    """Register every study table found in the lake; the file is replaced atomically."""
    selected = select_tables(config, only)
    target = config.warehouse
    target.parent.mkdir(parents=True, exist_ok=True)

    tmp = target.with_suffix(target.suffix + ".tmp")
    tmp.unlink(missing_ok=True)
    con = duckdb.connect(str(tmp), read_only=False)
    try:
        _create_views_or_tables(con, selected, as_tables=as_tables)
    finally:
        con.close()
    tmp.replace(target)
    log.info("warehouse ready → %s (%d %s)", target, len(selected), "tables" if as_tables else "views")
    return selected
