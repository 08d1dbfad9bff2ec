# chaosmap/lib/integrate.py
"""
Adaptive order-8 integration of Hamilton's equations.

All three entry points share one stepping loop over scipy's DOP853 pair:

  • integrate          – trajectory with samples, energy drift, optional LD column
  • integrate_with_ld  – final state and the accumulated descriptor only
  • poincare_crossings – upward crossings of theta2 = 0 (mod 2 pi)
"""
from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import polars as pl
from scipy.integrate import DOP853
from scipy.optimize import brentq

from chaosmap.constants import ODE_TOLERANCE
from chaosmap.lib.dynamics import ModelParams, PhaseState, field_components, hamiltonian
from chaosmap.lib.errors import DomainError, IntegrationError, StepBudgetExceeded, StepUnderflow

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
SECTION_TOLERANCE = 1e-10


# ───────────────────────────── types ─────────────────────────────

@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = ODE_TOLERANCE
    rel_tol: float = ODE_TOLERANCE
    initial_step: float = 1e-3
    max_step: float = 1.0
    min_step: float = 1e-12
    max_steps: int = 100_000_000

    def __post_init__(self) -> None:
        for name in ("abs_tol", "rel_tol", "initial_step", "max_step", "min_step"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"IntegratorConfig.{name} must be finite and > 0, got {value!r}")
        if not self.min_step < self.initial_step <= self.max_step:
            raise DomainError(
                "IntegratorConfig needs min_step < initial_step <= max_step, got "
                f"{self.min_step!r} / {self.initial_step!r} / {self.max_step!r}"
            )
        if self.max_steps < 1:
            raise DomainError(f"IntegratorConfig.max_steps must be >= 1, got {self.max_steps!r}")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray           # (n,)
    values: np.ndarray          # (n, 4)
    energy_drift: float
    steps: int
    ld: np.ndarray | None = None

    @property
    def states(self) -> list[PhaseState]:
        return [PhaseState.from_array(row) for row in self.values]

    @property
    def final(self) -> PhaseState:
        return PhaseState.from_array(self.values[-1])

    def __len__(self) -> int:
        return len(self.times)

    def to_frame(self, params: ModelParams) -> pl.DataFrame:
        energy = [hamiltonian(params, PhaseState.from_array(row)) for row in self.values]
        columns = {
            "t": self.times,
            "theta1": self.values[:, 0],
            "theta2": self.values[:, 1],
            "p1": self.values[:, 2],
            "p2": self.values[:, 3],
            "energy": np.asarray(energy, dtype=float),
        }
        if self.ld is not None:
            columns["ld"] = self.ld
        return pl.DataFrame(columns)


class LdResult(NamedTuple):
    state: PhaseState
    ld_value: float


@dataclass(frozen=True)
class CrossingEvent:
    time: float
    state: PhaseState
    direction_value: float


# ───────────────────────────── helpers ─────────────────────────────

def _rhs(params: ModelParams, sign: float = 1.0) -> Callable:
    a, b, boa = params.alpha, params.beta, params.beta_over_alpha

    def fun(_t, y):
        f = field_components(a, b, boa, y)
        return np.array(f) if sign > 0 else -np.array(f)

    return fun


def _rhs_with_ld(params: ModelParams, p_exponent: float, sign: float = 1.0) -> Callable:
    a, b, boa = params.alpha, params.beta, params.beta_over_alpha

    def fun(_t, y):
        f0, f1, f2, f3 = field_components(a, b, boa, y)
        dl = abs(f0) ** p_exponent + abs(f1) ** p_exponent + abs(f2) ** p_exponent + abs(f3) ** p_exponent
        if sign > 0:
            return np.array([f0, f1, f2, f3, dl])
        return np.array([-f0, -f1, -f2, -f3, dl])

    return fun


def _check_state(state: PhaseState) -> None:
    if not all(math.isfinite(v) for v in state):
        raise DomainError(f"state must be finite, got {tuple(state)}")


def _steps(fun: Callable, y0: np.ndarray, t_end: float, cfg: IntegratorConfig) -> Iterator[DOP853]:
    """Yield the solver after every accepted step; the caller reads t, y and dense output."""
    solver = DOP853(
        fun,
        0.0,
        y0,
        t_end,
        max_step=cfg.max_step,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        first_step=min(cfg.initial_step, abs(t_end)),
    )
    steps = 0
    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            raise StepUnderflow(f"step failed at t={solver.t:.6g}: {message}")
        steps += 1
        # the last step is truncated onto t_end and exempt from the floor
        if solver.status == "running" and solver.step_size < cfg.min_step:
            raise StepUnderflow(
                f"step size {solver.step_size:.3e} fell below min_step={cfg.min_step:.1e} at t={solver.t:.6g}"
            )
        yield solver
        if solver.status == "running" and steps >= cfg.max_steps:
            raise StepBudgetExceeded(f"max_steps={cfg.max_steps:,} reached at t={solver.t:.6g} of {t_end:.6g}")


# ───────────────────────────── integrate ─────────────────────────────

def integrate(
    params: ModelParams,
    state0: PhaseState,
    t_end: float,
    cfg: IntegratorConfig | None = None,
    sample_every: float | None = None,
    ld_exponent: float | None = None,
) -> Trajectory:
    """
    Integrate from t = 0 to `t_end` (negative integrates backward in time).

    Samples land every `sample_every` time units (dense output) or on every
    accepted step when None; the endpoint is always recorded. With
    `ld_exponent` the descriptor is carried as a fifth component.
    """
    cfg = cfg or IntegratorConfig()
    if not (math.isfinite(t_end) and t_end != 0.0):
        raise DomainError(f"t_end must be finite and non-zero, got {t_end!r}")
    if sample_every is not None and not sample_every > 0:
        raise DomainError(f"sample_every must be > 0, got {sample_every!r}")
    _check_state(state0)
    with_ld = ld_exponent is not None
    if with_ld and not 0.0 < ld_exponent <= 1.0:
        raise DomainError(f"ld_exponent must lie in (0, 1], got {ld_exponent!r}")

    fun = _rhs_with_ld(params, ld_exponent) if with_ld else _rhs(params)
    y0 = np.array([*state0, 0.0] if with_ld else list(state0), dtype=float)
    direction = 1.0 if t_end > 0 else -1.0
    h0 = hamiltonian(params, state0)

    times: list[float] = [0.0]
    rows: list[np.ndarray] = [y0.copy()]
    drift = 0.0
    steps = 0
    next_sample = 1

    def build() -> Trajectory:
        values = np.asarray(rows)
        return Trajectory(
            times=np.asarray(times),
            values=values[:, :4].copy(),
            energy_drift=drift,
            steps=steps,
            ld=values[:, 4].copy() if with_ld else None,
        )

    try:
        for solver in _steps(fun, y0, t_end, cfg):
            steps += 1
            y = solver.y
            drift = max(drift, abs(hamiltonian(params, PhaseState.from_array(y)) - h0))
            if sample_every is None:
                times.append(solver.t)
                rows.append(y.copy())
                continue
            dense = None
            while True:
                t_sample = direction * next_sample * sample_every
                if direction * t_sample >= direction * solver.t:
                    break
                if dense is None:
                    dense = solver.dense_output()
                times.append(t_sample)
                rows.append(np.asarray(dense(t_sample), dtype=float))
                next_sample += 1
            if solver.status == "finished":
                times.append(solver.t)
                rows.append(y.copy())
    except IntegrationError as exc:
        exc.partial = build()
        log.debug("integration aborted after %s steps: %s", f"{steps:,}", exc)
        raise

    return build()


def integrate_with_ld(
    params: ModelParams,
    state0: PhaseState,
    tau: float,
    p_exponent: float,
    cfg: IntegratorConfig | None = None,
    *,
    reverse: bool = False,
) -> LdResult:
    """
    Accumulate L = int_0^tau sum_i |F_i|^p alongside the flow.

    `reverse` integrates the negated field, i.e. the backward descriptor.
    """
    cfg = cfg or IntegratorConfig()
    if not (math.isfinite(tau) and tau > 0):
        raise DomainError(f"tau must be finite and > 0, got {tau!r}")
    if not 0.0 < p_exponent <= 1.0:
        raise DomainError(f"p_exponent must lie in (0, 1], got {p_exponent!r}")
    _check_state(state0)

    fun = _rhs_with_ld(params, p_exponent, sign=-1.0 if reverse else 1.0)
    y = np.array([*state0, 0.0], dtype=float)
    for solver in _steps(fun, y, tau, cfg):
        y = solver.y
    return LdResult(PhaseState.from_array(y), float(y[4]))


# ───────────────────────────── section crossings ─────────────────────────────

def direction_value(params: ModelParams, state: PhaseState) -> float:
    """beta p2 - alpha p1 cos(dtheta); proportional to d(theta2)/dt."""
    return params.beta * state.p2 - params.alpha * state.p1 * math.cos(state.theta1 - state.theta2)


def _wrapped_residual(theta2: float) -> float:
    return abs(math.remainder(theta2, TWO_PI))


def poincare_crossings(
    params: ModelParams,
    state0: PhaseState,
    n_crossings: int,
    cfg: IntegratorConfig | None = None,
    t_max: float = 1e4,
) -> list[CrossingEvent]:
    """
    Upward crossings of theta2 = 2 pi k, in time order, until `n_crossings`
    are found or `t_max` is exhausted.

    Each crossing is bracketed between accepted steps on the unwrapped angle
    and refined with brentq on the step's dense output.
    """
    cfg = cfg or IntegratorConfig()
    if n_crossings < 1:
        raise DomainError(f"n_crossings must be >= 1, got {n_crossings!r}")
    if not (math.isfinite(t_max) and t_max > 0):
        raise DomainError(f"t_max must be finite and > 0, got {t_max!r}")
    _check_state(state0)

    events: list[CrossingEvent] = []
    if _wrapped_residual(state0.theta2) <= SECTION_TOLERANCE:
        dv = direction_value(params, state0)
        if dv > 0:
            events.append(CrossingEvent(0.0, state0, dv))

    y0 = np.asarray(state0, dtype=float)
    prev_theta2 = state0.theta2
    for solver in _steps(_rhs(params), y0, t_max, cfg):
        if len(events) >= n_crossings:
            break
        theta2 = float(solver.y[1])
        if theta2 > prev_theta2:
            k_lo = math.floor(prev_theta2 / TWO_PI) + 1
            k_hi = math.floor(theta2 / TWO_PI)
            if k_lo <= k_hi:
                dense = solver.dense_output()
                for k in range(k_lo, k_hi + 1):
                    target = TWO_PI * k
                    t_cross = brentq(
                        lambda t, target=target: dense(t)[1] - target,
                        solver.t_old,
                        solver.t,
                        xtol=1e-14,
                        maxiter=200,
                    )
                    state = PhaseState.from_array(dense(t_cross))
                    dv = direction_value(params, state)
                    if dv <= 0:
                        continue
                    if events and abs(t_cross - events[-1].time) < 1e-9:
                        continue
                    events.append(CrossingEvent(float(t_cross), state, dv))
                    if len(events) >= n_crossings:
                        break
        prev_theta2 = theta2

    log.debug("found %d of %d requested crossings", len(events), n_crossings)
    return events[:n_crossings]
