import polars as pl
from dagster import AssetIn, MetadataValue, asset

from chaosmap.constants import DESK_ENSEMBLE_SIZE
from chaosmap.lib.dynamics import ModelParams, equilibrium_energies
from chaosmap.lib.fit import Regime, fit_regime
from chaosmap.lib.study_factories import build_study_assets
from chaosmap.lib.sweep import EnergyRule, SweepPlan, curves_from_frame

TAG_DESK = {"scale": "desk", "runtime": "hours"}

_params = ModelParams(1.0, 8.0)

# every 4th level from H4 upwards
decay_fit_plan = SweepPlan(
    alphas=(_params.alpha,),
    sigmas=(_params.sigma,),
    energies=EnergyRule(energy_min=equilibrium_energies(_params)[3], stride=4),
    ensemble_size=DESK_ENSEMBLE_SIZE,
    master_seed=8,
)

decay_fit_cells, decay_fit_fraction_curves, decay_fit_max_chaos_surface = build_study_assets(
    "decay_fit",
    decay_fit_plan,
    tags=TAG_DESK,
    description="alpha = 1, sigma = 8, decay regime above H4.",
)


@asset(
    name="decay_fit_comparison",
    ins={"curves": AssetIn("decay_fit_fraction_curves")},
    io_manager_key="study_io_manager",
    group_name="decay_fit",
    description="Exponential vs. linear fit of the decay regime, with R^2 of each.",
    tags=TAG_DESK,
)
def decay_fit_comparison(context, curves: pl.DataFrame) -> pl.DataFrame:
    curve = curves_from_frame(curves)[0]
    rows = []
    for model in ("exp", "linear"):
        result = fit_regime(curve, _params, Regime.DECAY, model)
        first, second = result.coefficients
        rows.append((result.model.value, first, second, result.r_squared, result.n_points, result.converged))
    df = pl.DataFrame(
        rows,
        schema=[
            ("model", pl.Utf8),
            ("first", pl.Float64),
            ("second", pl.Float64),
            ("r_squared", pl.Float64),
            ("n_points", pl.Int64),
            ("converged", pl.Boolean),
        ],
        orient="row",
    )
    context.add_output_metadata(
        {
            "exp_r_squared": MetadataValue.float(rows[0][3] if rows[0][3] is not None else float("nan")),
            "linear_r_squared": MetadataValue.float(rows[1][3] if rows[1][3] is not None else float("nan")),
        }
    )
    return df
