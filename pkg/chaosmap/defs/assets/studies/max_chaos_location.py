from chaosmap.lib.study_factories import build_study_assets
from chaosmap.lib.sweep import EnergyRule, SweepPlan

TAG_DESK = {"scale": "desk", "runtime": "hours"}

# where over alpha does the maximum chaotic fraction sit, for three mass ratios
max_chaos_location_plan = SweepPlan(
    alphas=(0.25, 0.5, 1.0, 2.0, 4.0),
    sigmas=(0.25, 1.0, 4.0),
    energies=EnergyRule(stride=5),
    ensemble_size=1_000,
    master_seed=6,
)

(
    max_chaos_location_cells,
    max_chaos_location_fraction_curves,
    max_chaos_location_max_chaos_surface,
) = build_study_assets(
    "max_chaos_location",
    max_chaos_location_plan,
    hive=True,
    tags=TAG_DESK,
    description="alpha in {1/4 .. 4} x sigma in {1/4, 1, 4}, every 5th energy.",
)
