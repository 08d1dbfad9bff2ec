# tests/oracles.py
"""
Independent reference computations used by the slow checks.

max_lyapunov follows two nearby orbits and renormalises their separation
every `renorm` time units; the mean log stretch is the largest exponent.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

from chaosmap.lib.dynamics import ModelParams, PhaseState, vector_field


def _flow(params: ModelParams, y: np.ndarray, dt: float) -> np.ndarray:
    sol = solve_ivp(
        lambda _t, v: vector_field(params, PhaseState.from_array(v)),
        (0.0, dt),
        y,
        method="DOP853",
        rtol=1e-10,
        atol=1e-10,
    )
    return sol.y[:, -1]


def max_lyapunov(
    params: ModelParams,
    state: PhaseState,
    t_total: float = 1000.0,
    renorm: float = 1.0,
    d0: float = 1e-8,
) -> float:
    y = np.asarray(state, dtype=float)
    offset = np.array([1.0, 1.0, 1.0, 1.0]) / 2.0
    z = y + d0 * offset
    total = 0.0
    steps = int(round(t_total / renorm))
    for _ in range(steps):
        y = _flow(params, y, renorm)
        z = _flow(params, z, renorm)
        d = float(np.linalg.norm(z - y))
        total += math.log(d / d0)
        z = y + (z - y) * (d0 / d)
    return total / (steps * renorm)
