# chaosmap/lib/section.py
"""
The Poincare section theta2 = 0, H = H0, crossed upward
(beta p2 - alpha p1 cos theta1 > 0), and Monte Carlo sampling on it.

A section point is stored by its plane coordinates (theta1, p1); p2 is always
recovered from the energy constraint by `lift_p2`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from chaosmap.constants import NEIGHBOR_SIGMA, SECTION_THETA1_RANGE
from chaosmap.lib.dynamics import ModelParams, PhaseState, equilibrium_energies, hamiltonian, potential
from chaosmap.lib.errors import (
    DomainError,
    EmptyRegion,
    OutsideAccessibleRegion,
    SamplingStalled,
    StencilOffSurface,
    TangentPoint,
)

log = logging.getLogger(__name__)

TANGENT_TOLERANCE = 1e-14
MAX_DRAWS_PER_POINT = 1_000_000
_BATCH = 64


# ───────────────────────────── types ─────────────────────────────

@dataclass(frozen=True)
class SectionSpec:
    params: ModelParams
    energy: float
    theta1_range: tuple[float, float] = field(default=SECTION_THETA1_RANGE)

    def __post_init__(self) -> None:
        if not math.isfinite(self.energy):
            raise DomainError(f"section energy must be finite, got {self.energy!r}")
        lo, hi = self.theta1_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise DomainError(f"theta1_range must be a finite interval lo < hi, got {self.theta1_range!r}")
        object.__setattr__(self, "theta1_range", (float(lo), float(hi)))
        h1 = self.minimum_energy
        if self.energy <= h1:
            raise EmptyRegion(f"H0={self.energy:.6g} is not above the potential minimum H1={h1:.6g}")

    @property
    def minimum_energy(self) -> float:
        return equilibrium_energies(self.params)[0]

    @property
    def momentum_bound(self) -> float:
        """P = sqrt(2 beta (H0 - H1)), the p1 half-height of the sampling box."""
        return math.sqrt(2.0 * self.params.beta * (self.energy - self.minimum_energy))


@dataclass(frozen=True)
class SectionPoint:
    theta1: float
    p1: float
    p2: float
    energy_residual: float

    @property
    def state(self) -> PhaseState:
        return PhaseState(self.theta1, 0.0, self.p1, self.p2)


@dataclass(frozen=True)
class NeighborStencil:
    center: SectionPoint
    # (theta1 + s, theta1 - s, p1 + s, p1 - s)
    offsets: tuple[SectionPoint, SectionPoint, SectionPoint, SectionPoint]
    sigma_i: float = NEIGHBOR_SIGMA

    @property
    def points(self) -> tuple[SectionPoint, ...]:
        return (self.center, *self.offsets)


# ───────────────────────────── lifting ─────────────────────────────

def accessible_half_width(spec: SectionSpec, theta1: float) -> float:
    """Largest |p1| reachable at theta1 on the section; 0 where V(theta1, 0) >= H0."""
    headroom = spec.energy - potential(spec.params, theta1, 0.0)
    return math.sqrt(2.0 * spec.params.beta * headroom) if headroom > 0 else 0.0


def lift_p2(spec: SectionSpec, theta1: float, p1: float) -> float:
    """
    Solve beta p2^2 - 2 alpha c p1 p2 + p1^2 - 2 det K = 0 for the root with
    beta p2 - alpha c p1 > 0, where c = cos theta1, det = beta - alpha^2 c^2
    and K = H0 - V(theta1, 0).
    """
    params = spec.params
    a, b = params.alpha, params.beta
    c = math.cos(theta1)
    det = b - a * a * c * c
    headroom = spec.energy - potential(params, theta1, 0.0)
    disc = det * (2.0 * b * headroom - p1 * p1)
    if abs(disc) <= TANGENT_TOLERANCE:
        raise TangentPoint(f"tangent point at theta1={theta1:.6g}, p1={p1:.6g} (direction value 0)")
    if disc < 0:
        raise OutsideAccessibleRegion(
            f"(theta1={theta1:.6g}, p1={p1:.6g}) lies outside the accessible region at H0={spec.energy:.6g}"
        )
    root = math.sqrt(disc)
    p2 = (a * c * p1 + root) / b

    # one Newton step on H - H0; dH/dp2 = root / det on this branch
    residual = hamiltonian(params, PhaseState(theta1, 0.0, p1, p2)) - spec.energy
    polished = p2 - residual * det / root
    polished_residual = hamiltonian(params, PhaseState(theta1, 0.0, p1, polished)) - spec.energy
    if abs(polished_residual) < abs(residual) and b * polished - a * c * p1 > 0:
        return polished
    return p2


def lift_point(spec: SectionSpec, theta1: float, p1: float) -> SectionPoint:
    p2 = lift_p2(spec, theta1, p1)
    residual = hamiltonian(spec.params, PhaseState(theta1, 0.0, p1, p2)) - spec.energy
    return SectionPoint(theta1, p1, p2, residual)


# ───────────────────────────── stencil ─────────────────────────────

def build_stencil(
    spec: SectionSpec,
    center: SectionPoint,
    sigma_i: float = NEIGHBOR_SIGMA,
    *,
    relift: bool = True,
) -> NeighborStencil:
    """
    Four neighbours at +-sigma_i along theta1 and along p1.

    With `relift` each neighbour's p2 is re-solved so it sits on H = H0;
    without it the centre's p2 is kept and the neighbours drift off the surface.
    """
    if not sigma_i > 0:
        raise DomainError(f"sigma_i must be > 0, got {sigma_i!r}")
    coords = (
        (center.theta1 + sigma_i, center.p1),
        (center.theta1 - sigma_i, center.p1),
        (center.theta1, center.p1 + sigma_i),
        (center.theta1, center.p1 - sigma_i),
    )
    offsets = []
    for theta1, p1 in coords:
        if relift:
            try:
                offsets.append(lift_point(spec, theta1, p1))
            except (OutsideAccessibleRegion, TangentPoint) as exc:
                raise StencilOffSurface(
                    f"neighbour ({theta1:.6g}, {p1:.6g}) of ({center.theta1:.6g}, {center.p1:.6g}) "
                    f"leaves the section: {exc}"
                ) from exc
        else:
            residual = hamiltonian(spec.params, PhaseState(theta1, 0.0, p1, center.p2)) - spec.energy
            offsets.append(SectionPoint(theta1, p1, center.p2, residual))
    return NeighborStencil(center=center, offsets=tuple(offsets), sigma_i=sigma_i)


# ───────────────────────────── sampling ─────────────────────────────

def _draw_one(spec: SectionSpec, rng: np.random.Generator, stencil_sigma: float | None, index: int) -> SectionPoint:
    params = spec.params
    lo, hi = spec.theta1_range
    bound = spec.momentum_bound
    two_beta = 2.0 * params.beta
    draws = 0
    while draws < MAX_DRAWS_PER_POINT:
        thetas = rng.uniform(lo, hi, _BATCH)
        p1s = rng.uniform(-bound, bound, _BATCH)
        draws += _BATCH
        widths = two_beta * (spec.energy + params.beta_over_alpha * np.cos(thetas) + 1.0)
        for theta1, p1 in zip(thetas[p1s * p1s < widths], p1s[p1s * p1s < widths]):
            try:
                point = lift_point(spec, float(theta1), float(p1))
                if stencil_sigma is not None:
                    build_stencil(spec, point, stencil_sigma)
            except (OutsideAccessibleRegion, TangentPoint, StencilOffSurface):
                continue
            return point
    raise SamplingStalled(
        f"no accepted point for index {index} after {MAX_DRAWS_PER_POINT:,} draws at H0={spec.energy:.6g}"
    )


def sample_section(
    spec: SectionSpec,
    n: int,
    seed: int,
    *,
    stencil_sigma: float | None = None,
) -> list[SectionPoint]:
    """
    Draw `n` points uniformly over the accessible part of the (theta1, p1) plane.

    Rejection from [theta1_range] x [-P, P]. Point i uses its own generator
    keyed by (seed, i), so any slice of the ensemble can be recomputed alone.
    With `stencil_sigma`, centres whose stencil would leave the surface are
    redrawn.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    if seed < 0:
        raise DomainError(f"seed must be non-negative, got {seed!r}")
    points = [
        _draw_one(spec, np.random.default_rng([seed, index]), stencil_sigma, index)
        for index in range(n)
    ]
    log.debug("sampled %s points at H0=%.4g", f"{n:,}", spec.energy)
    return points


def theta1_bin_probabilities(spec: SectionSpec, edges) -> np.ndarray:
    """Probability mass of each theta1 bin under the uniform-area measure."""
    edges = np.asarray(edges, dtype=float)
    lo, hi = spec.theta1_range

    def width(theta1: float) -> float:
        return 2.0 * accessible_half_width(spec, theta1)

    total = quad(width, lo, hi, limit=200)[0]
    mass = np.array([quad(width, a, b, limit=200)[0] for a, b in zip(edges[:-1], edges[1:])])
    return mass / total
