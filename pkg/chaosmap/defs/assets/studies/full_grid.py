from chaosmap.constants import ENSEMBLE_SIZE
from chaosmap.lib.study_factories import build_study_assets
from chaosmap.lib.sweep import SweepPlan

TAG_FULL = {"scale": "full", "runtime": "days"}

# alpha_i = 2**i, sigma_j = 2**j (i, j in -4..4), all 170 energies, 10^4 points per cell.
# Materialize on a big box with CHAOSMAP_THREADS set; checkpoints make it resumable.
full_grid_plan = SweepPlan(ensemble_size=ENSEMBLE_SIZE, master_seed=2024)

full_grid_cells, full_grid_fraction_curves, full_grid_max_chaos_surface = build_study_assets(
    "full_grid",
    full_grid_plan,
    hive=True,
    tags=TAG_FULL,
    description="Every (alpha, sigma) of the 9 x 9 grid over the full energy grid.",
)
