# chaosmap/lib/dynamics.py
"""
Dimensionless double pendulum.

  state     (theta1, theta2, p1, p2), angles unwrapped
  H         1/2 p^T B^-1(cos dtheta) p + V(theta1, theta2)
  V         -(beta/alpha) cos theta1 - cos theta2

Every function here is pure; angles only ever enter through cos/sin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from chaosmap.lib.errors import ClassificationError, DomainError

# |Re(lambda)| below this (relative to max(1, |lambda|)) counts as purely imaginary
EIGEN_TOLERANCE = 1e-9


# ───────────────────────────── types ─────────────────────────────

@dataclass(frozen=True)
class ModelParams:
    """Length ratio alpha = l1/l2 and mass ratio sigma = m1/m2; the rest is derived."""

    alpha: float
    sigma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "sigma"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a finite positive number, got {value!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def beta(self) -> float:
        return self.alpha * self.alpha * (1.0 + self.sigma)

    @property
    def mu(self) -> float:
        return 1.0 / (1.0 + self.sigma)

    @property
    def gamma(self) -> float:
        # beta - alpha^2, written without the cancellation
        return self.alpha * self.alpha * self.sigma

    @property
    def beta_over_alpha(self) -> float:
        return self.alpha * (1.0 + self.sigma)


class PhaseState(NamedTuple):
    theta1: float
    theta2: float
    p1: float
    p2: float

    @property
    def delta_theta(self) -> float:
        return self.theta1 - self.theta2

    @classmethod
    def from_array(cls, y) -> PhaseState:
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]))

    def wrapped(self) -> PhaseState:
        return PhaseState(wrap_angle(self.theta1), wrap_angle(self.theta2), self.p1, self.p2)


class Stability(str, Enum):
    CENTER_CENTER = "CenterCenter"
    SADDLE_CENTER = "SaddleCenter"
    SADDLE_SADDLE = "SaddleSaddle"


@dataclass(frozen=True)
class Equilibrium:
    index: int
    position: PhaseState
    energy: float
    stability: Stability
    eigenvalues: tuple[complex, complex, complex, complex]
    jacobian: np.ndarray

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "theta1": self.position.theta1,
            "theta2": self.position.theta2,
            "energy": self.energy,
            "stability": self.stability.value,
            "eigenvalues": [{"re": float(z.real), "im": float(z.imag)} for z in self.eigenvalues],
        }


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


# ───────────────────────────── matrices ─────────────────────────────

def _check_x(x: float) -> None:
    if not abs(x) <= 1.0:
        raise DomainError(f"x = cos(dtheta) must lie in [-1, 1], got {x!r}")


def b_matrix(params: ModelParams, x: float) -> np.ndarray:
    _check_x(x)
    ax = params.alpha * x
    return np.array([[params.beta, ax], [ax, 1.0]])


def b_inverse(params: ModelParams, x: float) -> np.ndarray:
    _check_x(x)
    ax = params.alpha * x
    det = params.beta - ax * ax
    return np.array([[1.0, -ax], [-ax, params.beta]]) / det


def c_matrix(params: ModelParams, x: float) -> np.ndarray:
    """d(B^-1)/dx = -B^-1 (dB/dx) B^-1."""
    _check_x(x)
    a, b = params.alpha, params.beta
    a2x2 = a * a * x * x
    det = b - a2x2
    off = b + a2x2
    return -a / (det * det) * np.array([[-2.0 * a * x, off], [off, -2.0 * a * b * x]])


# ───────────────────────────── energies ─────────────────────────────

def potential(params: ModelParams, theta1: float, theta2: float) -> float:
    return -params.beta_over_alpha * math.cos(theta1) - math.cos(theta2)


def potential_gradient(params: ModelParams, theta1: float, theta2: float) -> np.ndarray:
    return np.array([params.beta_over_alpha * math.sin(theta1), math.sin(theta2)])


def potential_hessian(params: ModelParams, theta1: float, theta2: float) -> np.ndarray:
    return np.diag([params.beta_over_alpha * math.cos(theta1), math.cos(theta2)])


def kinetic(params: ModelParams, state: PhaseState) -> float:
    t1, t2, p1, p2 = state
    a, b = params.alpha, params.beta
    x = math.cos(t1 - t2)
    det = b - a * a * x * x
    return (p1 * p1 - 2.0 * a * x * p1 * p2 + b * p2 * p2) / (2.0 * det)


def hamiltonian(params: ModelParams, state: PhaseState) -> float:
    return kinetic(params, state) + potential(params, state[0], state[1])


def equilibrium_energies(params: ModelParams) -> tuple[float, float, float, float]:
    s = params.beta_over_alpha  # alpha (1 + sigma)
    return (-s - 1.0, -s + 1.0, s - 1.0, s + 1.0)


# ───────────────────────────── vector field ─────────────────────────────

def field_components(alpha: float, beta: float, boa: float, y) -> tuple[float, float, float, float]:
    """Hamilton's equations on raw floats; the integrators call this in their inner loop."""
    t1, t2, p1, p2 = y[0], y[1], y[2], y[3]
    d = t1 - t2
    x = math.cos(d)
    ax = alpha * x
    det = beta - ax * ax
    dt1 = (p1 - ax * p2) / det
    dt2 = (beta * p2 - ax * p1) / det
    # p^T C(x) p
    pcp = -alpha / (det * det) * (
        -2.0 * ax * p1 * p1 + 2.0 * (beta + ax * ax) * p1 * p2 - 2.0 * ax * beta * p2 * p2
    )
    q = 0.5 * math.sin(d) * pcp
    return dt1, dt2, q - boa * math.sin(t1), -q - math.sin(t2)


def vector_field(params: ModelParams, state: PhaseState) -> np.ndarray:
    return np.array(field_components(params.alpha, params.beta, params.beta_over_alpha, state))


# ───────────────────────────── jacobians ─────────────────────────────

def jacobian_at_rest(params: ModelParams, theta1: float, theta2: float) -> np.ndarray:
    """
    Jacobian of the vector field at zero momentum.

    Every momentum-dependent block vanishes there, leaving
        [[0, B^-1(cos dtheta)], [-H_V(theta), 0]]
    """
    jac = np.zeros((4, 4))
    jac[:2, 2:] = b_inverse(params, math.cos(theta1 - theta2))
    jac[2:, :2] = -potential_hessian(params, theta1, theta2)
    return jac


def numerical_jacobian(params: ModelParams, state: PhaseState, step: float = 1e-6) -> np.ndarray:
    y = np.asarray(state, dtype=float)
    jac = np.empty((4, 4))
    for k in range(4):
        dy = np.zeros(4)
        dy[k] = step
        fp = vector_field(params, PhaseState.from_array(y + dy))
        fm = vector_field(params, PhaseState.from_array(y - dy))
        jac[:, k] = (fp - fm) / (2.0 * step)
    return jac


# (theta1, theta2), sign of the B^-1 off-diagonal, signs of the two curvature terms
_EQUILIBRIUM_TABLE = {
    1: ((0.0, 0.0), -1.0, (-1.0, -1.0)),
    2: ((0.0, math.pi), 1.0, (-1.0, 1.0)),
    3: ((math.pi, 0.0), 1.0, (1.0, -1.0)),
    4: ((math.pi, math.pi), -1.0, (1.0, 1.0)),
}


def equilibrium_jacobian(params: ModelParams, index: int) -> np.ndarray:
    """Closed-form Jacobian at equilibrium `index`, scaled by 1/gamma."""
    if index not in _EQUILIBRIUM_TABLE:
        raise DomainError(f"equilibrium index must be 1..4, got {index}")
    _, off_sign, (c1, c2) = _EQUILIBRIUM_TABLE[index]
    a, b, g = params.alpha, params.beta, params.gamma
    return np.array([
        [0.0, 0.0, 1.0, off_sign * a],
        [0.0, 0.0, off_sign * a, b],
        [c1 * b * g / a, 0.0, 0.0, 0.0],
        [0.0, c2 * g, 0.0, 0.0],
    ]) / g


def classify_spectrum(eigenvalues) -> Stability:
    imaginary = real = 0
    for lam in eigenvalues:
        scale = EIGEN_TOLERANCE * max(1.0, abs(lam))
        if abs(lam.real) < scale and abs(lam.imag) >= scale:
            imaginary += 1
        elif abs(lam.imag) < scale and abs(lam.real) >= scale:
            real += 1
    if imaginary == 4:
        return Stability.CENTER_CENTER
    if imaginary == 2 and real == 2:
        return Stability.SADDLE_CENTER
    if real == 4:
        return Stability.SADDLE_SADDLE
    raise ClassificationError(f"eigenvalues {list(eigenvalues)} match no stability class")


def equilibria(params: ModelParams) -> list[Equilibrium]:
    energies = equilibrium_energies(params)
    out: list[Equilibrium] = []
    for index, ((t1, t2), _, _) in _EQUILIBRIUM_TABLE.items():
        jac = equilibrium_jacobian(params, index)
        eig = np.sort_complex(np.linalg.eigvals(jac))
        out.append(
            Equilibrium(
                index=index,
                position=PhaseState(t1, t2, 0.0, 0.0),
                energy=energies[index - 1],
                stability=classify_spectrum(eig),
                eigenvalues=tuple(complex(z) for z in eig),
                jacobian=jac,
            )
        )
    return out
