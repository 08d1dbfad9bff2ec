# chaosmap/lib/study_factories.py
# ============================================================================
#  Dagster factory for parametric-study assets.
#
#  One call builds three assets around a SweepPlan:
#  --------------------------------------------------------------------------
#  • <study>_cells             every cell result (single parquet), computed
#                              through the `sweep` resource with resume on
#  • <study>_fraction_curves   chaotic fraction vs. energy per (alpha, sigma),
#                              single parquet or alpha=/sigma= hive layout
#  • <study>_max_chaos_surface maximum fraction and its energy per pair
# ============================================================================

from __future__ import annotations

import polars as pl
from dagster import AssetIn, MetadataValue, asset

from chaosmap.lib.frames import require_columns
from chaosmap.lib.sweep import (
    CELL_COLUMNS,
    SweepPlan,
    cells_frame,
    curves_from_frame,
    max_chaos_surface,
)

CURVE_TABLE_COLUMNS = ["alpha", "sigma", "energy", "fraction", "threshold", "scenario", "unclassified"]


# ───────────────────────────── helpers ─────────────────────────────

def _default_tags(extra: dict[str, str] | None) -> dict[str, str]:
    base = {"domain": "chaos", "type": "study"}
    base.update(extra or {})
    return base


def _meta(plan: SweepPlan) -> dict[str, MetadataValue]:
    return {
        "plan_digest": MetadataValue.text(plan.digest()),
        "plan": MetadataValue.json(plan.to_mapping()),
    }


# ╔═══════════════════════════════════════════════════════════════════════════╗
# ║  STUDY  (cells → curves → surface)                                        ║
# ╚═══════════════════════════════════════════════════════════════════════════╝

def build_study_assets(
    study_name: str,
    plan: SweepPlan,
    *,
    hive: bool = False,
    tags: dict[str, str] | None = None,
    description: str = "",
):
    cells_key = f"{study_name}_cells"
    curves_key = f"{study_name}_fraction_curves"
    surface_key = f"{study_name}_max_chaos_surface"
    asset_tags = _default_tags(tags)
    meta = _meta(plan)
    curves_io = "study_hive_io_manager" if hive else "study_io_manager"

    # CELLS ------------------------------------------------------------------
    @asset(
        name=cells_key,
        io_manager_key="study_io_manager",
        group_name=study_name,
        description=description or f"Cell results of the {study_name} study.",
        required_resource_keys={"sweep"},
        tags=asset_tags,
        metadata=meta,
    )
    def cells_asset(context) -> pl.DataFrame:
        report = context.resources.sweep.run(study_name, plan)
        df = cells_frame(report.cells)
        context.log.info(f"[{cells_key}] {df.height:,} cells, {len(report.failed)} failed")
        context.add_output_metadata(
            {
                "row_count": df.height,
                "computed": report.computed,
                "reused": report.reused,
                "failed": len(report.failed),
                "flagged": int(df["flagged"].sum()) if df.height else 0,
            }
        )
        return df

    # CURVES -----------------------------------------------------------------
    @asset(
        name=curves_key,
        ins={"cells": AssetIn(cells_key)},
        io_manager_key=curves_io,
        group_name=study_name,
        description="Chaotic fraction vs. energy, one curve per (alpha, sigma).",
        tags=asset_tags,
        metadata=meta,
    )
    def curves_asset(context, cells: pl.DataFrame) -> pl.DataFrame:
        require_columns(cells, CELL_COLUMNS, cells_key)
        df = cells.select(CURVE_TABLE_COLUMNS).sort("alpha", "sigma", "energy")
        pairs = df.select("alpha", "sigma").unique().height
        context.add_output_metadata({"row_count": df.height, "curves": pairs})
        return df

    # SURFACE ----------------------------------------------------------------
    @asset(
        name=surface_key,
        ins={"curves": AssetIn(curves_key)},
        io_manager_key="study_io_manager",
        group_name=study_name,
        description="Maximum chaotic fraction over energy for each (alpha, sigma).",
        tags=asset_tags,
        metadata=meta,
    )
    def surface_asset(context, curves: pl.DataFrame) -> pl.DataFrame:
        require_columns(curves, CURVE_TABLE_COLUMNS, curves_key)
        surface = max_chaos_surface(curves_from_frame(curves))
        best = surface.sort("max_fraction", descending=True).row(0, named=True)
        context.add_output_metadata(
            {
                "row_count": surface.height,
                "peak_alpha": best["alpha"],
                "peak_sigma": best["sigma"],
                "peak_fraction": best["max_fraction"],
            }
        )
        return surface

    return cells_asset, curves_asset, surface_asset
