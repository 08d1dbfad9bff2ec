import glob
import os
from functools import cached_property
from typing import Literal

import polars as pl
from dagster import (
    ConfigurableResource,
    InputContext,
    IOManager,
    OutputContext,
    get_dagster_logger,
    io_manager,
)

from chaosmap.lib.frames import require_columns

PARTITION_KEYS = ("alpha", "sigma")


class PolarsParquetIOManager(IOManager, ConfigurableResource):
    """
    Polars ↔ Parquet IO-manager for study tables.

    ────────────────────────────────────────────────────────────────
    mode = "single"
        <base_dir>/<asset>/<asset>.parquet

    mode = "hive"
        <base_dir>/<asset>/alpha=<a>/sigma=<s>/<asset>.parquet
        (the alpha/sigma columns live in the path, not in the files;
         load_input puts them back)
    """

    base_dir: str
    mode: Literal["single", "hive"] = "single"

    @cached_property
    def _log(self):
        return get_dagster_logger()

    # ------------------------------------------------------------------ #
    def _root(self, asset: str) -> str:
        return os.path.join(self.base_dir, asset)

    def _path(self, *, asset: str, alpha: float | None = None, sigma: float | None = None) -> str:
        if self.mode == "single":
            return os.path.join(self._root(asset), f"{asset}.parquet")
        assert alpha is not None and sigma is not None, "alpha and sigma required for hive mode"
        return os.path.join(self._root(asset), f"alpha={alpha!r}", f"sigma={sigma!r}", f"{asset}.parquet")

    # ------------------------------------------------------------------ #
    def write_single(self, asset_name: str, df: pl.DataFrame) -> None:
        path = self._path(asset=asset_name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        df.write_parquet(path, compression="zstd", use_pyarrow=True)
        self._log.info(f"[single] wrote {df.height:,} rows → {path}")

    def write_hive(self, asset_name: str, df: pl.DataFrame) -> None:
        require_columns(df, list(PARTITION_KEYS), f"hive asset {asset_name}")
        written = 0
        for (alpha, sigma), part in df.group_by(list(PARTITION_KEYS), maintain_order=True):
            path = self._path(asset=asset_name, alpha=float(alpha), sigma=float(sigma))
            os.makedirs(os.path.dirname(path), exist_ok=True)
            part.drop(list(PARTITION_KEYS)).write_parquet(path, compression="zstd", use_pyarrow=True)
            written += 1
        self._log.info(f"[hive] wrote {df.height:,} rows in {written} partitions → {self._root(asset_name)}")

    def read(self, asset_name: str) -> pl.DataFrame:
        if self.mode == "single":
            path = self._path(asset=asset_name)
            if not os.path.exists(path):
                raise FileNotFoundError(path)
            return pl.read_parquet(path)

        pattern = os.path.join(self._root(asset_name), "alpha=*", "sigma=*", "*.parquet")
        files = sorted(glob.glob(pattern))
        if not files:
            raise FileNotFoundError(pattern)
        parts = []
        for path in files:
            sigma_dir = os.path.dirname(path)
            alpha = float(os.path.basename(os.path.dirname(sigma_dir)).split("=", 1)[1])
            sigma = float(os.path.basename(sigma_dir).split("=", 1)[1])
            part = pl.read_parquet(path)
            parts.append(part.with_columns(pl.lit(alpha).alias("alpha"), pl.lit(sigma).alias("sigma")))
        df = pl.concat(parts, how="diagonal_relaxed")
        ordered = list(PARTITION_KEYS) + [c for c in df.columns if c not in PARTITION_KEYS]
        return df.select(ordered).sort(list(PARTITION_KEYS), maintain_order=True)

    # ------------------------------------------------------------------ #
    # Dagster glue
    def handle_output(self, context: OutputContext, obj):
        if not isinstance(obj, pl.DataFrame):
            raise TypeError("Only Polars DataFrame objects are supported")
        name = context.asset_key.to_python_identifier()
        if self.mode == "single":
            self.write_single(name, obj)
        else:
            self.write_hive(name, obj)

    def load_input(self, context: InputContext):
        name = context.asset_key.to_python_identifier()
        df = self.read(name)
        context.log.info(f"[{self.mode}] loaded {len(df):,} rows ← {self._root(name)}")
        return df


# ---------------------------------------------------------------------- #
@io_manager(
    config_schema={
        "base_dir": str,
        "mode": str,   # single | hive
    }
)
def polars_parquet_io_manager(init_context):
    cfg = init_context.resource_config
    return PolarsParquetIOManager(
        base_dir=cfg["base_dir"],
        mode=cfg.get("mode", "single"),
    )
