# chaosmap/lib/ld.py
"""
Lagrangian descriptors on the section and the four stencil indicators
D, R, C, S built from them.
"""
from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial

from chaosmap.constants import LD_P_EXPONENT, LD_TAU, NEIGHBOR_SIGMA
from chaosmap.lib.dynamics import ModelParams
from chaosmap.lib.errors import DegenerateCenter, DomainError, IntegrationError, StencilOffSurface
from chaosmap.lib.integrate import IntegratorConfig, integrate_with_ld
from chaosmap.lib.section import NeighborStencil, SectionPoint, SectionSpec, build_stencil

log = logging.getLogger(__name__)


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class LdConfig:
    tau: float = LD_TAU
    p_exponent: float = LD_P_EXPONENT
    sigma_i: float = NEIGHBOR_SIGMA
    direction: Direction = Direction.FORWARD
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise DomainError(f"tau must be finite and > 0, got {self.tau!r}")
        if not 0.0 < self.p_exponent <= 1.0:
            raise DomainError(f"p_exponent must lie in (0, 1], got {self.p_exponent!r}")
        if not (math.isfinite(self.sigma_i) and self.sigma_i > 0):
            raise DomainError(f"sigma_i must be finite and > 0, got {self.sigma_i!r}")
        object.__setattr__(self, "direction", Direction(self.direction))


@dataclass(frozen=True)
class IndicatorSet:
    d: float
    r: float
    c: float
    s: float
    ld_center: float
    ld_neighbors: tuple[float, float, float, float]


class Indicator(str, Enum):
    D = "d"
    R = "r"
    C = "c"
    S = "s"

    def of(self, values: IndicatorSet) -> float:
        return getattr(values, self.value)


# ───────────────────────────── descriptors ─────────────────────────────

def ld_value(params: ModelParams, point: SectionPoint, cfg: LdConfig) -> float:
    """Forward (or backward) descriptor of the lifted point over the horizon tau."""
    result = integrate_with_ld(
        params,
        point.state,
        cfg.tau,
        cfg.p_exponent,
        cfg.integrator,
        reverse=cfg.direction is Direction.BACKWARD,
    )
    return result.ld_value


def indicator_values(
    l0: float,
    l_plus: Sequence[float],
    l_minus: Sequence[float],
    sigma_i: float,
) -> IndicatorSet:
    """
    Evaluate D, R, C, S from raw descriptor values; `l_plus[i]` / `l_minus[i]`
    sit at +-sigma_i along axis i.
    """
    n = len(l_plus)
    if n == 0 or len(l_minus) != n:
        raise DomainError("l_plus and l_minus must be non-empty and of equal length")
    if l0 == 0:
        raise DegenerateCenter("centre descriptor is 0; D and R are undefined")
    spread = sum(abs(l0 - lp) + abs(l0 - lm) for lp, lm in zip(l_plus, l_minus))
    total = sum(lp + lm for lp, lm in zip(l_plus, l_minus))
    first = sum(abs(lp - lm) for lp, lm in zip(l_plus, l_minus))
    second = sum(abs(lp - 2.0 * l0 + lm) for lp, lm in zip(l_plus, l_minus))
    neighbours = tuple(v for pair in zip(l_plus, l_minus) for v in pair)
    return IndicatorSet(
        d=spread / (2 * n * l0),
        r=abs(1.0 - total / (2 * n * l0)),
        c=first / sigma_i / (2 * n),
        s=second / (sigma_i * sigma_i) / n,
        ld_center=l0,
        ld_neighbors=neighbours,
    )


def indicators(params: ModelParams, stencil: NeighborStencil, cfg: LdConfig) -> IndicatorSet:
    """Five descriptor integrations: the centre, then the four stencil neighbours."""
    l0 = ld_value(params, stencil.center, cfg)
    th_plus, th_minus, p_plus, p_minus = (ld_value(params, pt, cfg) for pt in stencil.offsets)
    return indicator_values(l0, (th_plus, p_plus), (th_minus, p_minus), stencil.sigma_i)


# ───────────────────────────── ensembles ─────────────────────────────

def point_indicators(
    params: ModelParams,
    spec: SectionSpec,
    cfg: LdConfig,
    point: SectionPoint,
) -> IndicatorSet | None:
    """Indicators for one sampled centre, or None when it cannot be classified."""
    try:
        stencil = build_stencil(spec, point, cfg.sigma_i)
        return indicators(params, stencil, cfg)
    except (StencilOffSurface, IntegrationError, DegenerateCenter) as exc:
        log.warning("unclassifiable point (%.6g, %.6g): %s", point.theta1, point.p1, exc)
        return None


def ensemble_indicators(
    params: ModelParams,
    points: Sequence[SectionPoint],
    spec: SectionSpec,
    cfg: LdConfig,
    *,
    workers: int = 1,
) -> list[IndicatorSet | None]:
    """
    Indicators for every point, in input order. Failures come back as None.
    With workers > 1 the points are spread over a process pool.
    """
    if not points:
        return []
    task = partial(point_indicators, params, spec, cfg)
    if workers <= 1:
        return [task(point) for point in points]
    chunksize = max(1, len(points) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, points, chunksize=chunksize))
