# chaosmap/definitions.py
import os

import dagster as dg
from dagster.components import load_defs
from dotenv import load_dotenv

import chaosmap.defs
from chaosmap.constants import STUDY_LAKE_PATH, THREADS_ENV_VAR
from chaosmap.defs.resources.parquet_io_manager import polars_parquet_io_manager
from chaosmap.defs.resources.sweep_resource import SweepResource

load_dotenv()

_shared_resources = {
    "sweep": SweepResource(
        threads=dg.EnvVar.int(THREADS_ENV_VAR) if os.getenv(THREADS_ENV_VAR) else 1,
    ),

    # cell tables and surfaces – one parquet per asset
    "study_io_manager": polars_parquet_io_manager.configured(
        {"base_dir": STUDY_LAKE_PATH, "mode": "single"}
    ),

    # curves of the larger grids – alpha=/sigma= partitions
    "study_hive_io_manager": polars_parquet_io_manager.configured(
        {"base_dir": STUDY_LAKE_PATH, "mode": "hive"}
    ),
}

_assets = load_defs(chaosmap.defs).assets

defs = dg.Definitions(
    resources=_shared_resources,
    assets=_assets,
)
