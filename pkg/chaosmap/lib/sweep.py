# chaosmap/lib/sweep.py
"""
Parametric study over (alpha, sigma, H0).

  ╔════════════════════════════════════════════════════════════════╗
  ║ plan → calibration per (alpha, sigma) → one cell per energy    ║
  ║ every finished piece is a JSON checkpoint; reruns reuse them   ║
  ╚════════════════════════════════════════════════════════════════╝

Each cell samples its ensemble with a seed derived from
(master_seed, alpha index, sigma index, energy index), so results do not
depend on worker count or scheduling order.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from collections.abc import Mapping, Sequence
from concurrent.futures import Future, ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import polars as pl
import yaml

from chaosmap import __version__
from chaosmap.constants import (
    CALIBRATION_DECADES,
    CALIBRATION_FRACTION,
    ENSEMBLE_SIZE,
    GRID_EXPONENTS,
    LEVELS_ABOVE_H4,
    LEVELS_BELOW_H4,
)
from chaosmap.lib.classify import RegularReference, Scenario, assess, build_histogram, log_indicator
from chaosmap.lib.dynamics import ModelParams, equilibrium_energies
from chaosmap.lib.errors import ChaosMapError, DomainError, EmptyInput
from chaosmap.lib.frames import read_json, write_csv, write_json
from chaosmap.lib.integrate import IntegratorConfig
from chaosmap.lib.ld import Indicator, LdConfig, ensemble_indicators
from chaosmap.lib.section import SectionSpec, sample_section

log = logging.getLogger(__name__)

UNCLASSIFIED_FLAG_RATIO = 0.05
CALIBRATION_INDEX = 999_999
MANIFEST_NAME = "manifest.json"


# ───────────────────────────── plan ─────────────────────────────

@dataclass(frozen=True)
class EnergyRule:
    """
    Which energies each (alpha, sigma) cell row visits.

    The base grid is `levels_below` uniform levels on (H1, H4] (or strictly
    inside when include_h4 is off) plus `levels_above` unit steps above H4.
    `energy_min`/`energy_max` window it, then `stride` thins it. `explicit`
    replaces the grid altogether.
    """

    levels_below: int = LEVELS_BELOW_H4
    levels_above: int = LEVELS_ABOVE_H4
    include_h4: bool = True
    stride: int = 1
    energy_min: float | None = None
    energy_max: float | None = None
    explicit: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.levels_below < 1 or self.levels_above < 0:
            raise DomainError("levels_below must be >= 1 and levels_above >= 0")
        if self.stride < 1:
            raise DomainError(f"stride must be >= 1, got {self.stride!r}")
        if self.explicit is not None:
            values = tuple(float(h) for h in self.explicit)
            if not values or any(b <= a for a, b in zip(values, values[1:])):
                raise DomainError("explicit energies must be non-empty and strictly increasing")
            object.__setattr__(self, "explicit", values)

    def to_mapping(self) -> dict[str, Any]:
        return {
            "levels_below": self.levels_below,
            "levels_above": self.levels_above,
            "include_h4": self.include_h4,
            "stride": self.stride,
            "energy_min": self.energy_min,
            "energy_max": self.energy_max,
            "explicit": list(self.explicit) if self.explicit is not None else None,
        }


def energy_grid(params: ModelParams, rule: EnergyRule | None = None) -> list[float]:
    """The full grid: 40 levels up to H4 and 130 unit steps above it by default."""
    rule = rule or EnergyRule()
    h1, _, _, h4 = equilibrium_energies(params)
    n = rule.levels_below
    if rule.include_h4:
        below = [h1 + k * (h4 - h1) / n for k in range(1, n + 1)]
        below[-1] = h4
    else:
        below = [h1 + k * (h4 - h1) / (n + 1) for k in range(1, n + 1)]
    above = [h4 + m for m in range(1, rule.levels_above + 1)]
    return below + above


def select_energies(params: ModelParams, rule: EnergyRule) -> list[tuple[int, float]]:
    """(grid index, energy) pairs a plan visits; the index keys the cell seed."""
    if rule.explicit is not None:
        return list(enumerate(rule.explicit))
    indexed = list(enumerate(energy_grid(params, rule)))
    if rule.energy_min is not None:
        indexed = [(k, h) for k, h in indexed if h >= rule.energy_min]
    if rule.energy_max is not None:
        indexed = [(k, h) for k, h in indexed if h <= rule.energy_max]
    return indexed[:: rule.stride]


@dataclass(frozen=True)
class SweepPlan:
    alphas: tuple[float, ...] = tuple(2.0**i for i in GRID_EXPONENTS)
    sigmas: tuple[float, ...] = tuple(2.0**j for j in GRID_EXPONENTS)
    energies: EnergyRule = field(default_factory=EnergyRule)
    ensemble_size: int = ENSEMBLE_SIZE
    master_seed: int = 0
    ld: LdConfig = field(default_factory=LdConfig)
    indicator: Indicator = Indicator.S
    bins: int | None = None
    calibration_fraction: float = CALIBRATION_FRACTION
    calibration_decades: float = CALIBRATION_DECADES

    def __post_init__(self) -> None:
        for name in ("alphas", "sigmas"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values or any(not (math.isfinite(v) and v > 0) for v in values):
                raise DomainError(f"{name} must be a non-empty list of finite positive numbers")
            object.__setattr__(self, name, values)
        if self.ensemble_size < 100:
            raise DomainError(f"ensemble_size must be >= 100, got {self.ensemble_size!r}")
        if self.master_seed < 0:
            raise DomainError(f"master_seed must be non-negative, got {self.master_seed!r}")
        if not 0.0 < self.calibration_fraction < 1.0:
            raise DomainError(f"calibration_fraction must lie in (0, 1), got {self.calibration_fraction!r}")
        object.__setattr__(self, "indicator", Indicator(self.indicator))

    # ----------------------------------------------------------------- #
    @classmethod
    def from_mapping(cls, raw: Mapping[str, Any]) -> SweepPlan:
        known = {
            "alphas", "sigmas", "energies", "ensemble_size", "master_seed", "ld",
            "indicator", "bins", "calibration_fraction", "calibration_decades",
        }
        unknown = set(raw) - known
        if unknown:
            raise DomainError(f"unknown plan keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {k: raw[k] for k in known - {"energies", "ld"} if raw.get(k) is not None}
        if "alphas" in kwargs:
            kwargs["alphas"] = tuple(kwargs["alphas"])
        if "sigmas" in kwargs:
            kwargs["sigmas"] = tuple(kwargs["sigmas"])
        try:
            if raw.get("energies"):
                energies = dict(raw["energies"])
                if energies.get("explicit") is not None:
                    energies["explicit"] = tuple(energies["explicit"])
                kwargs["energies"] = EnergyRule(**energies)
            if raw.get("ld"):
                ld = dict(raw["ld"])
                integrator_keys = {"abs_tol", "rel_tol", "initial_step", "max_step", "min_step", "max_steps"}
                integrator = {k: ld.pop(k) for k in list(ld) if k in integrator_keys}
                kwargs["ld"] = LdConfig(**ld, integrator=IntegratorConfig(**integrator))
            return cls(**kwargs)
        except TypeError as exc:
            raise DomainError(f"malformed plan: {exc}") from exc

    def to_mapping(self) -> dict[str, Any]:
        ic = self.ld.integrator
        return {
            "alphas": list(self.alphas),
            "sigmas": list(self.sigmas),
            "energies": self.energies.to_mapping(),
            "ensemble_size": self.ensemble_size,
            "master_seed": self.master_seed,
            "ld": {
                "tau": self.ld.tau,
                "p_exponent": self.ld.p_exponent,
                "sigma_i": self.ld.sigma_i,
                "direction": self.ld.direction.value,
                "abs_tol": ic.abs_tol,
                "rel_tol": ic.rel_tol,
                "initial_step": ic.initial_step,
                "max_step": ic.max_step,
                "min_step": ic.min_step,
                "max_steps": ic.max_steps,
            },
            "indicator": self.indicator.value,
            "bins": self.bins,
            "calibration_fraction": self.calibration_fraction,
            "calibration_decades": self.calibration_decades,
        }

    def digest(self) -> str:
        canonical = json.dumps(self.to_mapping(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def pairs(self) -> list[tuple[int, int, ModelParams]]:
        return [
            (i, j, ModelParams(alpha, sigma))
            for i, alpha in enumerate(self.alphas)
            for j, sigma in enumerate(self.sigmas)
        ]


def load_plan(path: str | Path) -> SweepPlan:
    """Read a YAML (or JSON) plan file."""

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input not found: {path}")
    raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise DomainError(f"{path} must hold a mapping at the top level")
    return SweepPlan.from_mapping(raw)


def cell_seed(master_seed: int, alpha_index: int, sigma_index: int, energy_index: int) -> int:
    sequence = np.random.SeedSequence([master_seed, alpha_index, sigma_index, energy_index])
    return int(sequence.generate_state(1)[0])


# ───────────────────────────── results ─────────────────────────────

@dataclass(frozen=True)
class CellResult:
    alpha: float
    sigma: float
    energy_index: int
    energy: float
    fraction: float
    scenario: Scenario
    threshold: float | None
    unclassified: int
    ensemble_size: int
    peaks: tuple[float, ...] = ()
    valley: float | None = None

    @property
    def flagged(self) -> bool:
        return self.unclassified / self.ensemble_size >= UNCLASSIFIED_FLAG_RATIO

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "sigma": self.sigma,
            "energy_index": self.energy_index,
            "energy": self.energy,
            "fraction": self.fraction,
            "scenario": self.scenario.value,
            "threshold": self.threshold,
            "unclassified": self.unclassified,
            "ensemble_size": self.ensemble_size,
            "peaks": list(self.peaks),
            "valley": self.valley,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> CellResult:
        return cls(
            alpha=float(payload["alpha"]),
            sigma=float(payload["sigma"]),
            energy_index=int(payload["energy_index"]),
            energy=float(payload["energy"]),
            fraction=float(payload["fraction"]),
            scenario=Scenario(payload["scenario"]),
            threshold=None if payload["threshold"] is None else float(payload["threshold"]),
            unclassified=int(payload["unclassified"]),
            ensemble_size=int(payload["ensemble_size"]),
            peaks=tuple(float(p) for p in payload.get("peaks", ())),
            valley=None if payload.get("valley") is None else float(payload["valley"]),
        )


@dataclass(frozen=True)
class ChaoticFractionCurve:
    alpha: float
    sigma: float
    energies: tuple[float, ...]
    fractions: tuple[float, ...]
    unclassified_counts: tuple[int, ...]
    thresholds: tuple[dict, ...]

    def __post_init__(self) -> None:
        n = len(self.energies)
        if not (len(self.fractions) == len(self.unclassified_counts) == len(self.thresholds) == n):
            raise DomainError("curve arrays must have equal lengths")
        if any(b <= a for a, b in zip(self.energies, self.energies[1:])):
            raise DomainError("curve energies must be strictly increasing")

    def __len__(self) -> int:
        return len(self.energies)

    def subset(self, indices: Sequence[int]) -> ChaoticFractionCurve:
        return ChaoticFractionCurve(
            alpha=self.alpha,
            sigma=self.sigma,
            energies=tuple(self.energies[i] for i in indices),
            fractions=tuple(self.fractions[i] for i in indices),
            unclassified_counts=tuple(self.unclassified_counts[i] for i in indices),
            thresholds=tuple(self.thresholds[i] for i in indices),
        )

    @classmethod
    def from_cells(cls, alpha: float, sigma: float, cells: Sequence[CellResult]) -> ChaoticFractionCurve:
        ordered = sorted(cells, key=lambda c: c.energy)
        return cls(
            alpha=alpha,
            sigma=sigma,
            energies=tuple(c.energy for c in ordered),
            fractions=tuple(c.fraction for c in ordered),
            unclassified_counts=tuple(c.unclassified for c in ordered),
            thresholds=tuple({"scenario": c.scenario.value, "threshold": c.threshold} for c in ordered),
        )


@dataclass
class SweepReport:
    curves: list[ChaoticFractionCurve]
    computed: int = 0
    reused: int = 0
    failed: list[str] = field(default_factory=list)
    cells: list[CellResult] = field(default_factory=list)

    @property
    def surface(self) -> pl.DataFrame:
        return max_chaos_surface(self.curves)


# ───────────────────────────── cells ─────────────────────────────

def calibration_energy(params: ModelParams, plan: SweepPlan) -> float:
    h1, _, _, h4 = equilibrium_energies(params)
    return h1 + plan.calibration_fraction * (h4 - h1)


def calibrate_reference(
    params: ModelParams,
    plan: SweepPlan,
    *,
    seed: int | None = None,
    workers: int = 1,
) -> RegularReference:
    """Indicator scale at a guaranteed-regular energy just above the minimum."""
    energy = calibration_energy(params, plan)
    spec = SectionSpec(params, energy)
    seed = cell_seed(plan.master_seed, 0, 0, CALIBRATION_INDEX) if seed is None else seed
    points = sample_section(spec, plan.ensemble_size, seed, stencil_sigma=plan.ld.sigma_i)
    found = ensemble_indicators(params, points, spec, plan.ld, workers=workers)
    logs = log_indicator(found, plan.indicator)
    finite = logs[np.isfinite(logs)]
    if finite.size == 0:
        raise EmptyInput(f"calibration at H0={energy:.4g} produced no classifiable point")
    reference = RegularReference.from_histogram(
        build_histogram(finite, plan.bins), energy, decades=plan.calibration_decades
    )
    log.info(
        "calibration alpha=%.4g sigma=%.4g: peak %.4g, cutoff %.4g",
        params.alpha, params.sigma, reference.peak, reference.cutoff,
    )
    return reference


def run_cell(
    params: ModelParams,
    energy: float,
    plan: SweepPlan,
    *,
    seed: int | None = None,
    energy_index: int = 0,
    calibration: RegularReference | None = None,
    workers: int = 1,
) -> CellResult:
    """Sample, integrate, classify one (alpha, sigma, H0) cell."""
    if energy <= equilibrium_energies(params)[0]:
        raise DomainError(f"cell energy {energy:.6g} must lie above H1")
    if calibration is None:
        calibration = calibrate_reference(params, plan, workers=workers)
    seed = cell_seed(plan.master_seed, 0, 0, energy_index) if seed is None else seed
    spec = SectionSpec(params, energy)
    points = sample_section(spec, plan.ensemble_size, seed, stencil_sigma=plan.ld.sigma_i)
    found = ensemble_indicators(params, points, spec, plan.ld, workers=workers)
    report = assess(found, plan.indicator, calibration, plan.bins)
    cell = CellResult(
        alpha=params.alpha,
        sigma=params.sigma,
        energy_index=energy_index,
        energy=energy,
        fraction=report.fraction,
        scenario=report.decision.scenario,
        threshold=report.decision.threshold,
        unclassified=report.counts["unclassifiable"],
        ensemble_size=plan.ensemble_size,
        peaks=report.decision.peak_locations,
        valley=report.decision.valley_location,
    )
    if cell.flagged:
        log.warning(
            "cell alpha=%.4g sigma=%.4g H0=%.4g: %d of %d points unclassifiable",
            params.alpha, params.sigma, energy, cell.unclassified, plan.ensemble_size,
        )
    return cell


# ───────────────────────────── checkpoints ─────────────────────────────

def _tag(value: float) -> str:
    return f"{value:.17g}"


def cell_checkpoint_name(alpha: float, sigma: float, energy_index: int) -> str:
    return f"cell_a{_tag(alpha)}_s{_tag(sigma)}_e{energy_index:03d}.json"


def calibration_checkpoint_name(alpha: float, sigma: float) -> str:
    return f"calibration_a{_tag(alpha)}_s{_tag(sigma)}.json"


def curve_file_name(alpha: float, sigma: float) -> str:
    return f"curve_a{_tag(alpha)}_s{_tag(sigma)}.csv"


def _load_checkpoint(path: Path, digest: str) -> dict | None:
    """Payload of a checkpoint written for this plan, or None (missing, corrupt, foreign)."""
    if not path.exists():
        return None
    try:
        document = read_json(path)
        if document.get("plan_digest") != digest:
            log.warning("checkpoint %s belongs to another plan; recomputing", path.name)
            return None
        return document["result"]
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        log.warning("corrupt checkpoint %s (%s); recomputing", path.name, exc)
        return None


def _save_checkpoint(path: Path, digest: str, result: dict) -> None:
    write_json({"plan_digest": digest, "result": result}, path)


# Pool tasks run in fresh processes: module-level, plain-data in and out.

def _calibration_task(plan: SweepPlan, i: int, j: int) -> dict:
    params = ModelParams(plan.alphas[i], plan.sigmas[j])
    try:
        seed = cell_seed(plan.master_seed, i, j, CALIBRATION_INDEX)
        return {"ok": calibrate_reference(params, plan, seed=seed).to_dict()}
    except ChaosMapError as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def _cell_task(plan: SweepPlan, i: int, j: int, k: int, energy: float, calibration: dict) -> dict:
    params = ModelParams(plan.alphas[i], plan.sigmas[j])
    try:
        cell = run_cell(
            params,
            energy,
            plan,
            seed=cell_seed(plan.master_seed, i, j, k),
            energy_index=k,
            calibration=RegularReference.from_dict(calibration),
        )
        return {"ok": cell.to_dict()}
    except ChaosMapError as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def _run_tasks(tasks: list[tuple], fn, workers: int):
    """Yield (key, outcome) as tasks finish; inline when workers <= 1."""
    if workers <= 1:
        for key, args in tasks:
            yield key, fn(*args)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures: dict[Future, Any] = {pool.submit(fn, *args): key for key, args in tasks}
        for future in as_completed(futures):
            yield futures[future], future.result()


# ───────────────────────────── sweep ─────────────────────────────

def run_sweep(
    plan: SweepPlan,
    checkpoint_dir: str | Path,
    *,
    out_dir: str | Path | None = None,
    workers: int = 1,
    resume: bool = True,
) -> SweepReport:
    """
    Run every cell of the plan, checkpointing each as it lands.

    With `resume`, checkpoints written for the same plan digest are reused and
    anything unreadable is recomputed. When `out_dir` is given each
    (alpha, sigma) curve CSV is written as soon as its last cell is done and
    the surface CSV at the end.
    """
    checkpoint_dir = Path(checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    out = Path(out_dir) if out_dir is not None else None
    digest = plan.digest()
    write_json({"plan_digest": digest, "plan": plan.to_mapping(), "tool_version": __version__},
               checkpoint_dir / MANIFEST_NAME)

    report = SweepReport(curves=[])
    pairs = plan.pairs()
    grid = {(i, j): select_energies(params, plan.energies) for i, j, params in pairs}
    total_cells = sum(len(v) for v in grid.values())
    log.info("sweep %s: %d (alpha, sigma) pairs, %s cells, %d worker(s)",
             digest[:12], len(pairs), f"{total_cells:,}", workers)

    # ---- calibration ------------------------------------------------ #
    calibrations: dict[tuple[int, int], dict] = {}
    pending = []
    for i, j, params in pairs:
        path = checkpoint_dir / calibration_checkpoint_name(params.alpha, params.sigma)
        cached = _load_checkpoint(path, digest) if resume else None
        if cached is not None:
            calibrations[(i, j)] = cached
        else:
            pending.append(((i, j), (plan, i, j)))
    for (i, j), outcome in _run_tasks(pending, _calibration_task, workers):
        params = ModelParams(plan.alphas[i], plan.sigmas[j])
        if "error" in outcome:
            log.warning("calibration alpha=%.4g sigma=%.4g failed: %s", params.alpha, params.sigma, outcome["error"])
            report.failed.append(f"calibration_a{_tag(params.alpha)}_s{_tag(params.sigma)}")
            continue
        _save_checkpoint(checkpoint_dir / calibration_checkpoint_name(params.alpha, params.sigma), digest, outcome["ok"])
        calibrations[(i, j)] = outcome["ok"]

    # ---- cells ------------------------------------------------------ #
    cells: dict[tuple[int, int], dict[int, CellResult]] = {(i, j): {} for i, j, _ in pairs}
    remaining = {key: len(grid[key]) for key in cells}
    pending = []
    for i, j, params in pairs:
        if (i, j) not in calibrations:
            report.failed.extend(
                cell_checkpoint_name(params.alpha, params.sigma, k) for k, _ in grid[(i, j)]
            )
            remaining[(i, j)] = 0
            continue
        for k, energy in grid[(i, j)]:
            path = checkpoint_dir / cell_checkpoint_name(params.alpha, params.sigma, k)
            cached = _load_checkpoint(path, digest) if resume else None
            if cached is not None:
                try:
                    cells[(i, j)][k] = CellResult.from_dict(cached)
                    report.reused += 1
                    remaining[(i, j)] -= 1
                    continue
                except (KeyError, TypeError, ValueError) as exc:
                    log.warning("corrupt checkpoint %s (%s); recomputing", path.name, exc)
            pending.append(((i, j, k), (plan, i, j, k, energy, calibrations[(i, j)])))

    if out is not None:
        for (i, j), left in remaining.items():
            if left == 0 and cells[(i, j)]:
                _write_curve(out, plan, i, j, cells[(i, j)])

    done = 0
    for (i, j, k), outcome in _run_tasks(pending, _cell_task, workers):
        params = ModelParams(plan.alphas[i], plan.sigmas[j])
        name = cell_checkpoint_name(params.alpha, params.sigma, k)
        done += 1
        if "error" in outcome:
            log.warning("cell %s failed: %s", name, outcome["error"])
            report.failed.append(name)
        else:
            _save_checkpoint(checkpoint_dir / name, digest, outcome["ok"])
            cells[(i, j)][k] = CellResult.from_dict(outcome["ok"])
            report.computed += 1
        remaining[(i, j)] -= 1
        if remaining[(i, j)] == 0 and out is not None and cells[(i, j)]:
            _write_curve(out, plan, i, j, cells[(i, j)])
        if done % 10 == 0 or done == len(pending):
            log.info("cells %s/%s done", f"{done:,}", f"{len(pending):,}")

    for i, j, params in pairs:
        if cells[(i, j)]:
            report.cells.extend(cells[(i, j)][k] for k in sorted(cells[(i, j)]))
            report.curves.append(
                ChaoticFractionCurve.from_cells(params.alpha, params.sigma, list(cells[(i, j)].values()))
            )
    report.failed.sort()

    if out is not None and report.curves:
        write_csv(surface_frame(report.curves), out / "surface.csv")
    log.info(
        "sweep %s finished: %d computed, %d reused, %d failed",
        digest[:12], report.computed, report.reused, len(report.failed),
    )
    return report


def _write_curve(out: Path, plan: SweepPlan, i: int, j: int, cells: Mapping[int, CellResult]) -> None:
    alpha, sigma = plan.alphas[i], plan.sigmas[j]
    curve = ChaoticFractionCurve.from_cells(alpha, sigma, list(cells.values()))
    write_csv(curve_frame(curve), out / curve_file_name(alpha, sigma))


# ───────────────────────────── tables ─────────────────────────────

CURVE_COLUMNS = ["energy", "fraction", "threshold", "scenario", "unclassified"]
SURFACE_COLUMNS = ["alpha", "sigma", "max_fraction", "argmax_energy"]


def curve_frame(curve: ChaoticFractionCurve) -> pl.DataFrame:
    return pl.DataFrame(
        {
            "energy": list(curve.energies),
            "fraction": list(curve.fractions),
            "threshold": [t["threshold"] for t in curve.thresholds],
            "scenario": [t["scenario"] for t in curve.thresholds],
            "unclassified": list(curve.unclassified_counts),
        },
        schema={
            "energy": pl.Float64,
            "fraction": pl.Float64,
            "threshold": pl.Float64,
            "scenario": pl.Utf8,
            "unclassified": pl.Int64,
        },
    )


def curve_from_frame(df: pl.DataFrame, alpha: float, sigma: float) -> ChaoticFractionCurve:
    df = df.sort("energy")
    return ChaoticFractionCurve(
        alpha=alpha,
        sigma=sigma,
        energies=tuple(df["energy"].to_list()),
        fractions=tuple(df["fraction"].to_list()),
        unclassified_counts=tuple(int(v) for v in df["unclassified"].to_list()),
        thresholds=tuple(
            {"scenario": s, "threshold": t} for s, t in zip(df["scenario"].to_list(), df["threshold"].to_list())
        ),
    )


def max_chaos_surface(curves: Sequence[ChaoticFractionCurve]) -> pl.DataFrame:
    """Per (alpha, sigma): the largest fraction over the energy grid and where it occurs."""
    rows = []
    for curve in curves:
        if len(curve) == 0:
            continue
        best = int(np.argmax(curve.fractions))
        rows.append((curve.alpha, curve.sigma, curve.fractions[best], curve.energies[best]))
    if not rows:
        raise EmptyInput("no curve with at least one energy")
    rows.sort(key=lambda r: (r[0], r[1]))
    return pl.DataFrame(rows, schema=[(c, pl.Float64) for c in SURFACE_COLUMNS], orient="row")


def surface_frame(curves: Sequence[ChaoticFractionCurve]) -> pl.DataFrame:
    return max_chaos_surface(curves)


def surface_matrix(surface: pl.DataFrame) -> tuple[list[float], list[float], np.ndarray]:
    """Pivot the surface into (alphas, sigmas, matrix[alpha, sigma]); gaps are NaN."""
    wide = surface.pivot(on="sigma", index="alpha", values="max_fraction").sort("alpha")
    sigma_cols = sorted((c for c in wide.columns if c != "alpha"), key=float)
    matrix = wide.select(sigma_cols).to_numpy().astype(float)
    return wide["alpha"].to_list(), [float(c) for c in sigma_cols], matrix


CELL_COLUMNS = [
    "alpha", "sigma", "energy_index", "energy", "fraction", "scenario",
    "threshold", "unclassified", "ensemble_size", "flagged",
]


def cells_frame(cells: Sequence[CellResult]) -> pl.DataFrame:
    return pl.DataFrame(
        [
            (c.alpha, c.sigma, c.energy_index, c.energy, c.fraction, c.scenario.value,
             c.threshold, c.unclassified, c.ensemble_size, c.flagged)
            for c in cells
        ],
        schema={
            "alpha": pl.Float64,
            "sigma": pl.Float64,
            "energy_index": pl.Int64,
            "energy": pl.Float64,
            "fraction": pl.Float64,
            "scenario": pl.Utf8,
            "threshold": pl.Float64,
            "unclassified": pl.Int64,
            "ensemble_size": pl.Int64,
            "flagged": pl.Boolean,
        },
        orient="row",
    )


def curves_from_frame(df: pl.DataFrame) -> list[ChaoticFractionCurve]:
    """Split a long (alpha, sigma, energy, ...) table back into one curve per pair."""
    curves = []
    for (alpha, sigma), part in df.sort("alpha", "sigma", "energy").group_by(
        ["alpha", "sigma"], maintain_order=True
    ):
        curves.append(curve_from_frame(part, float(alpha), float(sigma)))
    return curves
