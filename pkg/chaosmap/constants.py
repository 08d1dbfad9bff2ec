#For filesystem operations
import math
import os

# Study outputs (parquet) live one folder back from the package, under data/studies
STUDY_LAKE_PATH = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "data", "studies"))

# Sweep checkpoints: one JSON document per completed cell, one folder per study
CHECKPOINT_PATH = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "data", "checkpoints"))

# DuckDB file registering every study table for ad-hoc SQL
WAREHOUSE_PATH = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "data", "duckdb", "studies.duckdb"))

# Path to where we will store our Dagster logs
DAGSTER_PATH = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "logs"))

# Environment variable holding the default worker count
THREADS_ENV_VAR = "CHAOSMAP_THREADS"


# ───────────────────────── method defaults ─────────────────────────

LD_TAU = 700.0              # forward LD horizon
LD_P_EXPONENT = 0.5         # p-norm exponent of the LD integrand
NEIGHBOR_SIGMA = 1e-4       # stencil offset on the section plane
ODE_TOLERANCE = 1e-8        # abs and rel tolerance of the order-8 pair

ENSEMBLE_SIZE = 10_000      # full-scale ensemble
DESK_ENSEMBLE_SIZE = 2_000  # desk-scale ensemble used by the shipped studies

LEVELS_BELOW_H4 = 40        # uniform levels on (H1, H4]
LEVELS_ABOVE_H4 = 130       # unit steps above H4

# alpha_i = 2**i and sigma_j = 2**j, i, j in -4..4
GRID_EXPONENTS = tuple(range(-4, 5))

# calibration energy: H1 + CALIBRATION_FRACTION * (H4 - H1)
CALIBRATION_FRACTION = 0.02
# single-peak cutoff: calibration peak + CALIBRATION_DECADES (log10 units)
CALIBRATION_DECADES = 3.0

SECTION_THETA1_RANGE = (0.0, math.pi)


def default_threads() -> int:
    """Worker count from CHAOSMAP_THREADS, falling back to 1."""
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
