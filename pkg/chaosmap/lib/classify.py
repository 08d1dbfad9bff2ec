# chaosmap/lib/classify.py
"""
Threshold selection on the histogram of log10 indicator values.

  two peaks   → Mixed, threshold at the lowest smoothed bin between them
  one peak    → AllRegular or AllChaotic, decided against a low-energy
                calibration run of the same (alpha, sigma)
"""
from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.signal import find_peaks

from chaosmap.constants import CALIBRATION_DECADES
from chaosmap.lib.errors import DomainError, EmptyInput
from chaosmap.lib.ld import Indicator, IndicatorSet

log = logging.getLogger(__name__)

SMOOTHING_WINDOW = 5
PROMINENCE_FRACTION = 0.05


class Scenario(str, Enum):
    ALL_REGULAR = "AllRegular"
    MIXED = "Mixed"
    ALL_CHAOTIC = "AllChaotic"


class Label(str, Enum):
    CHAOTIC = "Chaotic"
    REGULAR = "Regular"
    UNCLASSIFIABLE = "Unclassifiable"


# ───────────────────────────── histogram ─────────────────────────────

@dataclass(frozen=True)
class IndicatorHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    smoothed: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        return {
            "bin_edges": self.bin_edges.tolist(),
            "counts": [int(c) for c in self.counts],
            "smoothed": self.smoothed.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> IndicatorHistogram:
        edges = np.asarray(payload["bin_edges"], dtype=float)
        counts = np.asarray(payload["counts"], dtype=int)
        if edges.size != counts.size + 1:
            raise DomainError(f"histogram has {counts.size} counts but {edges.size} edges")
        smoothed = payload.get("smoothed")
        return cls(edges, counts, smooth_counts(counts) if smoothed is None else np.asarray(smoothed, dtype=float))


def default_bin_count(n: int) -> int:
    return min(200, max(50, math.ceil(n / 100)))


def smooth_counts(counts: np.ndarray, window: int = SMOOTHING_WINDOW) -> np.ndarray:
    """Centred moving average; the window is clamped at both edges."""
    kernel = np.ones(window)
    sums = np.convolve(counts.astype(float), kernel, mode="same")
    norms = np.convolve(np.ones(len(counts)), kernel, mode="same")
    return sums / norms


def build_histogram(values: Sequence[float], bins: int | None = None) -> IndicatorHistogram:
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise EmptyInput("cannot build a histogram from zero values")
    if not np.all(np.isfinite(data)):
        raise DomainError("histogram values must all be finite")
    bins = default_bin_count(data.size) if bins is None else bins
    if bins < 10:
        raise DomainError(f"bins must be >= 10, got {bins!r}")

    lo, hi = float(data.min()), float(data.max())
    pad = 0.5 if hi == lo else 0.01 * (hi - lo)
    edges = np.linspace(lo - pad, hi + pad, bins + 1)
    counts, _ = np.histogram(data, bins=edges)
    return IndicatorHistogram(bin_edges=edges, counts=counts, smoothed=smooth_counts(counts))


# ───────────────────────────── decision ─────────────────────────────

@dataclass(frozen=True)
class RegularReference:
    """Indicator scale of a guaranteed-regular run; single peaks above `cutoff` are chaotic."""

    energy: float
    peak: float
    cutoff: float

    @classmethod
    def from_histogram(
        cls, hist: IndicatorHistogram, energy: float, decades: float = CALIBRATION_DECADES
    ) -> RegularReference:
        peak = float(hist.centers[int(np.argmax(hist.smoothed))])
        return cls(energy=energy, peak=peak, cutoff=peak + decades)

    def to_dict(self) -> dict:
        return {"energy": self.energy, "peak": self.peak, "cutoff": self.cutoff}

    @classmethod
    def from_dict(cls, payload: dict) -> RegularReference:
        return cls(energy=float(payload["energy"]), peak=float(payload["peak"]), cutoff=float(payload["cutoff"]))


@dataclass(frozen=True)
class ThresholdDecision:
    scenario: Scenario
    threshold: float | None
    peak_locations: tuple[float, ...]
    valley_location: float | None

    def __post_init__(self) -> None:
        if (self.scenario is Scenario.MIXED) != (self.threshold is not None):
            raise DomainError("a threshold is present exactly when the scenario is Mixed")


def find_histogram_peaks(hist: IndicatorHistogram, prominence: float = PROMINENCE_FRACTION) -> list[tuple[int, float]]:
    """(bin index, prominence) of smoothed maxima, most prominent first."""
    smoothed = hist.smoothed
    padded = np.concatenate(([0.0], smoothed, [0.0]))
    peaks, props = find_peaks(padded, prominence=prominence * float(smoothed.max()))
    found = [(int(i) - 1, float(p)) for i, p in zip(peaks, props["prominences"])]
    return sorted(found, key=lambda item: (-item[1], item[0]))


def _valley_between(smoothed: np.ndarray, left: int, right: int) -> int:
    inner = np.arange(left + 1, right)
    lowest = smoothed[inner].min()
    midpoint = 0.5 * (left + right)
    candidates = inner[smoothed[inner] == lowest]
    return int(min(candidates, key=lambda i: (abs(i - midpoint), i)))


def decide_threshold(
    hist: IndicatorHistogram,
    calibration: RegularReference | None,
    prominence: float = PROMINENCE_FRACTION,
) -> ThresholdDecision:
    centers = hist.centers
    peaks = find_histogram_peaks(hist, prominence)
    if len(peaks) >= 2:
        left, right = sorted(index for index, _ in peaks[:2])
        if right - left >= 2:
            valley = _valley_between(hist.smoothed, left, right)
            threshold = float(centers[valley])
            return ThresholdDecision(
                scenario=Scenario.MIXED,
                threshold=threshold,
                peak_locations=(float(centers[left]), float(centers[right])),
                valley_location=threshold,
            )
        log.debug("adjacent peaks at bins %d and %d, treated as one", left, right)

    if peaks:
        top = float(centers[peaks[0][0]])
    else:
        top = float(centers[int(np.argmax(hist.smoothed))])
    if calibration is None:
        raise DomainError(
            f"single-peak histogram (peak at {top:.4g}) needs a regular calibration reference to decide"
        )
    scenario = Scenario.ALL_REGULAR if top <= calibration.cutoff else Scenario.ALL_CHAOTIC
    return ThresholdDecision(scenario=scenario, threshold=None, peak_locations=(top,), valley_location=None)


# ───────────────────────────── labelling ─────────────────────────────

class Classification(NamedTuple):
    labels: list[Label]
    fraction: float


def log_indicator(indicators: Sequence[IndicatorSet | None], which: Indicator) -> np.ndarray:
    """log10 of the chosen indicator; NaN for unclassifiable or non-positive values."""
    out = np.full(len(indicators), np.nan)
    for i, ind in enumerate(indicators):
        if ind is None:
            continue
        value = which.of(ind)
        if math.isfinite(value) and value > 0:
            out[i] = math.log10(value)
    return out


def label_logs(logs: np.ndarray, decision: ThresholdDecision) -> Classification:
    """Chaotic iff log10(value) > threshold (Mixed); uniform labels otherwise. NaN is unclassifiable."""
    labels: list[Label] = []
    for value in np.asarray(logs, dtype=float):
        if not math.isfinite(value):
            labels.append(Label.UNCLASSIFIABLE)
        elif decision.scenario is Scenario.ALL_CHAOTIC:
            labels.append(Label.CHAOTIC)
        elif decision.scenario is Scenario.ALL_REGULAR:
            labels.append(Label.REGULAR)
        else:
            labels.append(Label.CHAOTIC if value > decision.threshold else Label.REGULAR)
    chaotic = labels.count(Label.CHAOTIC)
    classified = chaotic + labels.count(Label.REGULAR)
    if classified == 0:
        raise EmptyInput("no point in the ensemble could be classified")
    return Classification(labels, chaotic / classified)


def classify_ensemble(
    indicators: Sequence[IndicatorSet | None],
    which: Indicator,
    decision: ThresholdDecision,
) -> Classification:
    return label_logs(log_indicator(indicators, which), decision)


@dataclass(frozen=True)
class ClassificationReport:
    decision: ThresholdDecision
    histogram: IndicatorHistogram
    labels: list[Label]
    fraction: float

    @property
    def counts(self) -> dict[str, int]:
        return {
            "chaotic": self.labels.count(Label.CHAOTIC),
            "regular": self.labels.count(Label.REGULAR),
            "unclassifiable": self.labels.count(Label.UNCLASSIFIABLE),
        }

    def to_dict(self) -> dict:
        return {
            "scenario": self.decision.scenario.value,
            "threshold": self.decision.threshold,
            "fraction": self.fraction,
            "counts": self.counts,
            "peaks": list(self.decision.peak_locations),
            "valley": self.decision.valley_location,
            "histogram": self.histogram.to_dict(),
        }


def classify_logs(
    logs: np.ndarray,
    calibration: RegularReference | None,
    bins: int | None = None,
) -> ClassificationReport:
    """Histogram, decision and labels straight from log10 values."""
    logs = np.asarray(logs, dtype=float)
    hist = build_histogram(logs[np.isfinite(logs)], bins)
    decision = decide_threshold(hist, calibration)
    labels, fraction = label_logs(logs, decision)
    return ClassificationReport(decision, hist, labels, fraction)


def assess(
    indicators: Sequence[IndicatorSet | None],
    which: Indicator,
    calibration: RegularReference | None,
    bins: int | None = None,
) -> ClassificationReport:
    """Full pipeline for one ensemble: histogram, threshold, labels, fraction."""
    return classify_logs(log_indicator(indicators, which), calibration, bins)
