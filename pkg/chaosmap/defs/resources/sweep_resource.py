# ---------------------------------------------------------------------------
#  SweepResource – runs study plans against a per-study checkpoint folder
# ---------------------------------------------------------------------------
import os

from dagster import ConfigurableResource, get_dagster_logger

from chaosmap.constants import CHECKPOINT_PATH
from chaosmap.lib.sweep import SweepPlan, SweepReport, run_sweep


class SweepResource(ConfigurableResource):
    """Shared worker count and checkpoint root for every study asset."""

    checkpoint_root: str = CHECKPOINT_PATH
    threads: int = 1

    # ------------------------------------------------------------------ #
    def checkpoint_dir(self, study_name: str) -> str:
        return os.path.join(self.checkpoint_root, study_name)

    def run(self, study_name: str, plan: SweepPlan) -> SweepReport:
        """
        Run (or resume) a study. Cells already checkpointed for the same
        plan digest are reused, so re-materializing only fills gaps.
        """
        log = get_dagster_logger()
        path = self.checkpoint_dir(study_name)
        log.info(f"[{study_name}] plan {plan.digest()[:12]} → {path} ({self.threads} worker(s))")
        report = run_sweep(plan, path, workers=max(1, self.threads), resume=True)
        if report.failed:
            log.warning(f"[{study_name}] {len(report.failed)} cell(s) failed: {report.failed[:5]}")
        log.info(f"[{study_name}] {report.computed:,} computed, {report.reused:,} reused")
        return report
