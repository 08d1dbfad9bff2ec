# chaosmap/lib/fit.py
"""
Regime extraction and fits of chaotic fraction vs. energy.

  growth regime   H in (H1, min(H2, H3)]
  decay regime    H >= H4
  models          A e^{Bx}, A e^{-Bx}, Mx + N; R^2 always on the original scale
"""
from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import least_squares

from chaosmap.lib.dynamics import ModelParams, equilibrium_energies
from chaosmap.lib.errors import DomainError, FitDiverged, InsufficientData, RegimeEmpty
from chaosmap.lib.sweep import ChaoticFractionCurve

log = logging.getLogger(__name__)

REGIME_TOLERANCE = 1e-9
MAX_ITERATIONS = 100
STEP_TOLERANCE = 1e-10


class Regime(str, Enum):
    GROWTH = "growth"
    DECAY = "decay"


class FitModel(str, Enum):
    EXP_GROWTH = "ExpGrowth"
    EXP_DECAY = "ExpDecay"
    LINEAR = "Linear"

    @property
    def is_exponential(self) -> bool:
        return self is not FitModel.LINEAR


@dataclass(frozen=True)
class FitResult:
    model: FitModel
    coefficients: tuple[float, float]   # (A, B) or (M, N)
    r_squared: float | None             # None when the data have zero variance
    n_points: int
    regime: tuple[float, float]
    converged: bool = True

    def predict(self, xs) -> np.ndarray:
        x = np.asarray(xs, dtype=float)
        first, second = self.coefficients
        if self.model is FitModel.LINEAR:
            return first * x + second
        sign = 1.0 if self.model is FitModel.EXP_GROWTH else -1.0
        return first * np.exp(sign * second * x)

    def to_dict(self) -> dict:
        first, second = self.coefficients
        names = ("M", "N") if self.model is FitModel.LINEAR else ("A", "B")
        return {
            "model": self.model.value,
            names[0]: first,
            names[1]: second,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "regime": list(self.regime),
            "converged": self.converged,
        }


# ───────────────────────────── regimes ─────────────────────────────

def regime_bounds(params: ModelParams, regime: Regime) -> tuple[float, float]:
    h1, h2, h3, h4 = equilibrium_energies(params)
    if regime is Regime.GROWTH:
        return h1, min(h2, h3)
    return h4, math.inf


def extract_regime(curve: ChaoticFractionCurve, params: ModelParams, regime: Regime | str) -> ChaoticFractionCurve:
    regime = Regime(regime)
    lo, hi = regime_bounds(params, regime)
    if regime is Regime.GROWTH:
        keep = [i for i, h in enumerate(curve.energies) if lo < h <= hi + REGIME_TOLERANCE]
    else:
        keep = [i for i, h in enumerate(curve.energies) if h >= lo - REGIME_TOLERANCE]
    if not keep:
        raise RegimeEmpty(
            f"no energies of the (alpha={curve.alpha:g}, sigma={curve.sigma:g}) curve fall in the {regime.value} regime"
        )
    return curve.subset(keep)


def extract_regimes(
    curve: ChaoticFractionCurve, params: ModelParams
) -> tuple[ChaoticFractionCurve, ChaoticFractionCurve]:
    """(growth, decay) sub-curves; RegimeEmpty if either is missing."""
    return extract_regime(curve, params, Regime.GROWTH), extract_regime(curve, params, Regime.DECAY)


# ───────────────────────────── fits ─────────────────────────────

def r_squared(ys: np.ndarray, predicted: np.ndarray) -> float | None:
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    if ss_tot == 0.0:
        return None
    ss_res = float(np.sum((ys - predicted) ** 2))
    return 1.0 - ss_res / ss_tot


def _as_arrays(xs: Sequence[float], ys: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("xs and ys must be 1-D and of equal length")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("xs and ys must be finite")
    return x, y


def fit_exponential(
    xs: Sequence[float],
    ys: Sequence[float],
    sign: Regime | str,
    *,
    weights: Sequence[float] | None = None,
    strict: bool = False,
) -> FitResult:
    """
    Fit A e^{+-Bx} by least squares on the original scale.

    The start comes from a straight line through (x, ln y) over y > 0; it is
    refined by Levenberg-Marquardt in centred x. When refinement fails the
    start is returned with converged=False (or FitDiverged with `strict`).
    """
    x, y = _as_arrays(xs, ys)
    regime = Regime(sign)
    model = FitModel.EXP_GROWTH if regime is Regime.GROWTH else FitModel.EXP_DECAY
    s = 1.0 if regime is Regime.GROWTH else -1.0
    if x.size < 3:
        raise InsufficientData(f"an exponential fit needs >= 3 points, got {x.size}")
    positive = y > 0
    if int(positive.sum()) < 3:
        raise InsufficientData(f"an exponential fit needs >= 3 points with y > 0, got {int(positive.sum())}")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != x.shape or np.any(w < 0):
        raise DomainError("weights must be non-negative and aligned with xs")

    # centred coordinates keep the fit exactly translation-equivariant
    x0 = float(x.mean())
    xc = x - x0
    slope, intercept = np.polyfit(xc[positive], np.log(y[positive]), 1)
    b_start = s * slope
    if b_start <= 0:
        raise FitDiverged(f"data do not {regime.value} exponentially (log-linear rate {slope:.4g})")
    start = np.array([math.exp(intercept), b_start])
    root_w = np.sqrt(w)

    def residuals(theta):
        a_c, b = theta
        return root_w * (a_c * np.exp(s * b * xc) - y)

    def jacobian(theta):
        a_c, b = theta
        e = np.exp(s * b * xc)
        return np.column_stack((root_w * e, root_w * a_c * s * xc * e))

    def to_result(theta, converged: bool) -> FitResult:
        a_c, b = float(theta[0]), float(theta[1])
        return FitResult(
            model=model,
            coefficients=(a_c * math.exp(-s * b * x0), b),
            r_squared=r_squared(y, a_c * np.exp(s * b * xc)),
            n_points=int(x.size),
            regime=(float(x.min()), float(x.max())),
            converged=converged,
        )

    start_cost = float(np.sum(residuals(start) ** 2))
    try:
        solution = least_squares(
            residuals, start, jac=jacobian, method="lm", xtol=STEP_TOLERANCE, max_nfev=MAX_ITERATIONS
        )
        ok = solution.status > 0 and solution.x[0] > 0 and solution.x[1] > 0
    except (ValueError, FloatingPointError) as exc:
        log.warning("exponential refinement raised: %s", exc)
        solution, ok = None, False

    if not ok:
        if strict:
            raise FitDiverged(f"{model.value} refinement did not converge in {MAX_ITERATIONS} iterations")
        log.warning("%s refinement did not converge; keeping the log-linear start", model.value)
        return to_result(start, converged=False)
    # refinement never worsens its own start
    if 2.0 * solution.cost > start_cost:
        return to_result(start, converged=True)
    return to_result(solution.x, converged=True)


def fit_linear(xs: Sequence[float], ys: Sequence[float]) -> FitResult:
    x, y = _as_arrays(xs, ys)
    if x.size < 2 or np.unique(x).size < 2:
        raise InsufficientData(f"a linear fit needs >= 2 distinct x values, got {np.unique(x).size}")
    m, n = np.polyfit(x, y, 1)
    return FitResult(
        model=FitModel.LINEAR,
        coefficients=(float(m), float(n)),
        r_squared=r_squared(y, m * x + n),
        n_points=int(x.size),
        regime=(float(x.min()), float(x.max())),
    )


def fit_regime(
    curve: ChaoticFractionCurve,
    params: ModelParams,
    regime: Regime | str,
    model: str = "exp",
) -> FitResult:
    """Extract one regime of a curve and fit it with `exp` or `linear`."""
    regime = Regime(regime)
    part = extract_regime(curve, params, regime)
    if model == "linear":
        return fit_linear(part.energies, part.fractions)
    if model == "exp":
        return fit_exponential(part.energies, part.fractions, regime)
    raise DomainError(f"model must be 'exp' or 'linear', got {model!r}")
