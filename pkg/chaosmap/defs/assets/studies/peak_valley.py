from chaosmap.constants import DESK_ENSEMBLE_SIZE
from chaosmap.lib.study_factories import build_study_assets
from chaosmap.lib.sweep import EnergyRule, SweepPlan

TAG_DESK = {"scale": "desk", "runtime": "hours"}

# alpha = 1, sigma = 8: the fraction jumps up and back down between the saddles
peak_valley_plan = SweepPlan(
    alphas=(1.0,),
    sigmas=(8.0,),
    energies=EnergyRule(explicit=tuple(16.025 + 0.25 * k for k in range(13))),
    ensemble_size=DESK_ENSEMBLE_SIZE,
    master_seed=8,
)

peak_valley_cells, peak_valley_fraction_curves, peak_valley_max_chaos_surface = build_study_assets(
    "peak_valley",
    peak_valley_plan,
    tags=TAG_DESK,
    description="alpha = 1, sigma = 8, H0 from 16.025 to 19.025 in steps of 0.25.",
)
