"""
Regime extraction and curve fitting checks.

Groups:
  • exponential fits: exact data, refinement, translation, failure modes
  • linear fits and R^2
  • regime boundaries on the full energy grid
"""
import math

import numpy as np
import pytest

from chaosmap.lib.dynamics import ModelParams
from chaosmap.lib.errors import DomainError, FitDiverged, InsufficientData, RegimeEmpty
from chaosmap.lib.fit import (
    FitModel,
    Regime,
    extract_regime,
    extract_regimes,
    fit_exponential,
    fit_linear,
    fit_regime,
    r_squared,
    regime_bounds,
)
from chaosmap.lib.sweep import ChaoticFractionCurve, energy_grid

UNIT = ModelParams(1.0, 1.0)


def _curve(params, energies, fractions):
    n = len(energies)
    return ChaoticFractionCurve(
        alpha=params.alpha,
        sigma=params.sigma,
        energies=tuple(energies),
        fractions=tuple(fractions),
        unclassified_counts=(0,) * n,
        thresholds=({"scenario": "Mixed", "threshold": -2.0},) * n,
    )


def _noisy_decay(n=30, scale=0.01, seed=5):
    rng = np.random.default_rng(seed)
    xs = np.linspace(0.0, 5.0, n)
    ys = np.exp(-xs) * (1.0 + scale * rng.standard_normal(n))
    return xs, ys


# ───────────────────────────── exponential ─────────────────────────────

def test_exact_decay():
    xs = np.linspace(0.0, 10.0, 11)
    result = fit_exponential(xs, np.exp(-2.0 * xs), "decay")
    a, b = result.coefficients
    assert result.model is FitModel.EXP_DECAY
    assert a == pytest.approx(1.0, rel=1e-9)
    assert b == pytest.approx(2.0, rel=1e-9)
    assert result.r_squared == pytest.approx(1.0, abs=1e-12)
    assert result.converged


def test_exact_growth():
    xs = np.linspace(-3.0, -1.0, 13)
    result = fit_exponential(xs, 0.01 * np.exp(0.5 * xs), Regime.GROWTH)
    a, b = result.coefficients
    assert result.model is FitModel.EXP_GROWTH
    assert a == pytest.approx(0.01, rel=1e-9)
    assert b == pytest.approx(0.5, rel=1e-9)


def test_refinement_never_worsens_the_start():
    xs, ys = _noisy_decay(scale=0.05)
    positive = ys > 0
    slope, intercept = np.polyfit(xs[positive], np.log(ys[positive]), 1)
    start_ss = float(np.sum((math.exp(intercept) * np.exp(slope * xs) - ys) ** 2))
    result = fit_exponential(xs, ys, "decay")
    fitted_ss = float(np.sum((result.predict(xs) - ys) ** 2))
    assert fitted_ss <= start_ss * (1 + 1e-9)


def test_exponential_beats_linear_on_exponential_data():
    xs, ys = _noisy_decay()
    assert fit_exponential(xs, ys, "decay").r_squared > fit_linear(xs, ys).r_squared


def test_translation_equivariance():
    xs, ys = _noisy_decay()
    c = 7.0
    base = fit_exponential(xs, ys, "decay")
    moved = fit_exponential(xs + c, ys, "decay")
    assert moved.coefficients[1] == pytest.approx(base.coefficients[1], rel=1e-8)
    assert moved.coefficients[0] == pytest.approx(base.coefficients[0] * math.exp(base.coefficients[1] * c), rel=1e-8)
    assert moved.r_squared == pytest.approx(base.r_squared, rel=1e-10)


def test_zero_fractions_are_kept_in_the_fit():
    xs = np.linspace(0.0, 5.0, 8)
    ys = np.exp(-xs)
    ys[-2:] = 0.0
    result = fit_exponential(xs, ys, "decay")
    assert result.n_points == 8


def test_exponential_failure_modes():
    with pytest.raises(InsufficientData):
        fit_exponential([0.0, 1.0], [1.0, 0.5], "decay")
    with pytest.raises(InsufficientData):
        fit_exponential([0.0, 1.0, 2.0, 3.0], [1.0, 0.5, 0.0, 0.0], "decay")
    with pytest.raises(FitDiverged):
        fit_exponential([0.0, 1.0, 2.0], [1.0, 2.0, 4.0], "decay")
    with pytest.raises(DomainError):
        fit_exponential([0.0, 1.0, 2.0], [1.0, 2.0], "decay")
    with pytest.raises(DomainError):
        fit_exponential([0.0, 1.0, 2.0], [1.0, 0.5, 0.25], "decay", weights=[1.0, -1.0, 1.0])


# ───────────────────────────── linear / R^2 ─────────────────────────────

def test_exact_line():
    xs = np.arange(6.0)
    result = fit_linear(xs, 3.0 * xs + 1.0)
    m, n = result.coefficients
    assert m == pytest.approx(3.0)
    assert n == pytest.approx(1.0)
    assert result.r_squared == pytest.approx(1.0)
    assert result.to_dict()["M"] == m


def test_two_point_line_is_exact():
    result = fit_linear([1.0, 2.0], [5.0, 3.0])
    assert result.r_squared == pytest.approx(1.0)


def test_constant_data_has_no_r_squared():
    assert fit_linear([0.0, 1.0, 2.0], [0.4, 0.4, 0.4]).r_squared is None
    assert r_squared(np.array([1.0, 1.0]), np.array([0.9, 1.1])) is None


def test_linear_needs_two_distinct_x():
    with pytest.raises(InsufficientData):
        fit_linear([1.0, 1.0, 1.0], [0.1, 0.2, 0.3])


def test_fit_result_dict():
    payload = fit_exponential([0.0, 1.0, 2.0], [1.0, 0.5, 0.25], "decay").to_dict()
    assert set(payload) == {"model", "A", "B", "r_squared", "n_points", "regime", "converged"}
    assert payload["regime"] == [0.0, 2.0]


# ───────────────────────────── regimes ─────────────────────────────

def test_regime_bounds():
    assert regime_bounds(UNIT, Regime.GROWTH) == (-3.0, -1.0)
    assert regime_bounds(UNIT, Regime.DECAY) == (3.0, math.inf)
    # alpha (1 + sigma) = 1: the two saddle energies coincide at 0
    assert regime_bounds(ModelParams(0.5, 1.0), Regime.GROWTH) == (-2.0, 0.0)


def test_regimes_of_the_full_grid():
    energies = energy_grid(UNIT)
    curve = _curve(UNIT, energies, [0.5] * len(energies))
    growth, decay = extract_regimes(curve, UNIT)
    assert len(growth) == 13
    assert all(-3.0 < h <= -1.0 for h in growth.energies)
    assert len(decay) == 131
    assert decay.energies[0] == 3.0
    assert decay.energies[-1] == 133.0


def test_regime_accepts_its_string_name():
    energies = energy_grid(UNIT)
    curve = _curve(UNIT, energies, [0.5] * len(energies))
    for regime in Regime:
        by_name = extract_regime(curve, UNIT, regime.value)
        assert by_name.energies == extract_regime(curve, UNIT, regime).energies
    assert len(extract_regime(curve, UNIT, "growth")) == 13


def test_missing_regime():
    curve = _curve(UNIT, [0.0, 1.0, 2.0], [0.1, 0.2, 0.3])
    with pytest.raises(RegimeEmpty):
        extract_regime(curve, UNIT, Regime.DECAY)
    with pytest.raises(RegimeEmpty, match="decay regime"):
        extract_regime(curve, UNIT, "decay")


def test_fit_regime_models():
    energies = energy_grid(UNIT)
    fractions = [0.9 * math.exp(-0.05 * (h - 3.0)) if h >= 3.0 else 0.5 for h in energies]
    curve = _curve(UNIT, energies, fractions)
    result = fit_regime(curve, UNIT, "decay")
    assert result.coefficients[1] == pytest.approx(0.05, rel=1e-6)
    assert result.n_points == 131
    assert fit_regime(curve, UNIT, "decay", model="linear").model is FitModel.LINEAR
    with pytest.raises(DomainError):
        fit_regime(curve, UNIT, "decay", model="quadratic")
