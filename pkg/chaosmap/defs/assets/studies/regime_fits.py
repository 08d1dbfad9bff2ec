import math

import numpy as np
import polars as pl
from dagster import AssetIn, MetadataValue, asset

from chaosmap.lib.dynamics import ModelParams
from chaosmap.lib.errors import ChaosMapError
from chaosmap.lib.fit import Regime, extract_regime, fit_exponential
from chaosmap.lib.study_factories import build_study_assets
from chaosmap.lib.sweep import EnergyRule, SweepPlan, curves_from_frame

TAG_REGIME_FITS = {"scale": "desk", "runtime": "a-day"}

# every level, so the narrow growth window of the heavy sigmas still holds >= 3 points
regime_fits_plan = SweepPlan(
    alphas=(1.0,),
    sigmas=(0.25, 0.5, 1.0, 2.0, 4.0, 8.0),
    energies=EnergyRule(levels_above=60),
    ensemble_size=1_000,
    master_seed=16,
)

REGIME_FIT_SCHEMA = [
    ("alpha", pl.Float64),
    ("sigma", pl.Float64),
    ("regime", pl.Utf8),
    ("model", pl.Utf8),
    ("A", pl.Float64),
    ("B", pl.Float64),
    ("r_squared", pl.Float64),
    ("rms_residual", pl.Float64),
    ("n_points", pl.Int64),
    ("energy_lo", pl.Float64),
    ("energy_hi", pl.Float64),
    ("converged", pl.Boolean),
    ("status", pl.Utf8),
]

regime_fits_cells, regime_fits_fraction_curves, regime_fits_max_chaos_surface = build_study_assets(
    "regime_fits",
    regime_fits_plan,
    hive=True,
    tags=TAG_REGIME_FITS,
    description="alpha = 1 across six mass ratios, every energy level up to H4 + 60.",
)


def regime_fit_rows(curves: pl.DataFrame) -> list[tuple]:
    """One exponential fit per (curve, regime); a failed fit keeps its row with the reason in `status`."""
    rows = []
    for curve in curves_from_frame(curves):
        params = ModelParams(curve.alpha, curve.sigma)
        for regime in Regime:
            try:
                part = extract_regime(curve, params, regime)
                result = fit_exponential(part.energies, part.fractions, regime)
            except ChaosMapError as exc:
                rows.append(
                    (curve.alpha, curve.sigma, regime.value, None, None, None, None, None, 0, None, None, False, str(exc))
                )
                continue
            a, b = result.coefficients
            residual = np.asarray(part.fractions) - result.predict(part.energies)
            rows.append(
                (
                    curve.alpha,
                    curve.sigma,
                    regime.value,
                    result.model.value,
                    a,
                    b,
                    result.r_squared,
                    float(math.sqrt(np.mean(residual**2))),
                    result.n_points,
                    result.regime[0],
                    result.regime[1],
                    result.converged,
                    "ok",
                )
            )
    return rows


@asset(
    name="regime_fits_table",
    ins={"curves": AssetIn("regime_fits_fraction_curves")},
    io_manager_key="study_io_manager",
    group_name="regime_fits",
    description="A e^{Bx} below the first saddle and A e^{-Bx} above H4, per mass ratio.",
    tags=TAG_REGIME_FITS,
)
def regime_fits_table(context, curves: pl.DataFrame) -> pl.DataFrame:
    df = pl.DataFrame(regime_fit_rows(curves), schema=REGIME_FIT_SCHEMA, orient="row")
    failed = df.filter(pl.col("status") != "ok")
    for row in failed.iter_rows(named=True):
        context.log.warning(f"no {row['regime']} fit at sigma={row['sigma']:g}: {row['status']}")
    context.add_output_metadata(
        {
            "fits": MetadataValue.int(df.height - failed.height),
            "failed": MetadataValue.int(failed.height),
            "preview": MetadataValue.text(str(df.select("sigma", "regime", "A", "B", "r_squared"))),
        }
    )
    return df
