# chaosmap/lib/errors.py
from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from chaosmap.lib.integrate import Trajectory


class ChaosMapError(Exception):
    """Base class for every domain error raised by chaosmap."""


class DomainError(ChaosMapError, ValueError):
    """Input outside the domain of an operation (bad parameters, bad config)."""


# ───────────────────────────── dynamics ─────────────────────────────

class ClassificationError(ChaosMapError):
    """Eigenvalue pattern matches none of the known stability classes."""


# ──────────────────────────── integrate ─────────────────────────────

class IntegrationError(ChaosMapError):
    """An integration aborted; `partial` holds what was computed so far."""

    def __init__(self, message: str, partial: Trajectory | None = None):
        super().__init__(message)
        self.partial = partial
        self.diagnostic = message


class StepUnderflow(IntegrationError):
    pass


class StepBudgetExceeded(IntegrationError):
    pass


# ───────────────────────────── section ──────────────────────────────

class EmptyRegion(ChaosMapError):
    pass


class OutsideAccessibleRegion(ChaosMapError):
    pass


class TangentPoint(ChaosMapError):
    pass


class SamplingStalled(ChaosMapError):
    pass


class StencilOffSurface(ChaosMapError):
    pass


# ─────────────────────────── ld / classify ──────────────────────────

class DegenerateCenter(ChaosMapError):
    pass


class EmptyInput(ChaosMapError):
    pass


# ─────────────────────────────── fit ────────────────────────────────

class InsufficientData(ChaosMapError):
    pass


class FitDiverged(ChaosMapError):
    pass


class RegimeEmpty(ChaosMapError):
    pass


# ─────────────────────────────── io ─────────────────────────────────

class SchemaMismatch(ChaosMapError):
    """A table handed to a consumer lacks the columns it needs."""
