"""Exception types shared across the package."""

from __future__ import annotations


class WavegraphError(Exception):
    """Base class for all package-specific errors."""


class GraphError(WavegraphError):
    """Invalid metric-graph structure or construction parameters."""


class SingularSystemError(WavegraphError):
    """The scattering linear system is singular or numerically unusable."""

    def __init__(self, message: str, k: float | None = None, condition: float | None = None):
        super().__init__(message)
        self.k = k
        self.condition = condition


class DomainError(WavegraphError):
    """An evaluation point falls inside an excluded set of a method."""


class FileFormatError(WavegraphError):
    """Malformed input file (graph document or Touchstone data)."""
