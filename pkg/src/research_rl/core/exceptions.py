"""Custom exception hierarchy for the research RL lab."""
from __future__ import annotations

from pathlib import Path


class ResearchRLError(Exception):
    """Base exception for all research RL lab errors."""


class ConfigError(ResearchRLError):
    """Error in configuration loading or validation.

    ``violations`` lists every offending field path, one entry per failure.
    """

    def __init__(self, message: str, violations: list[str] | None = None) -> None:
        self.violations = list(violations or [])
        if self.violations:
            message = message + "\n" + "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(message)


class ContractError(ResearchRLError, ValueError):
    """A documented precondition of an operation was violated by the caller."""


class TagRenderError(ContractError):
    """Segment text contains a reserved tag and cannot be rendered."""


class NonFiniteGradientError(ResearchRLError):
    """An optimizer produced a NaN/inf gradient or ratio.

    ``trajectory_index`` (and ``step_index`` when known) identify the culprit.
    """

    def __init__(self, message: str, trajectory_index: int, step_index: int | None = None) -> None:
        self.trajectory_index = trajectory_index
        self.step_index = step_index
        super().__init__(message)


class RunAbortedError(ResearchRLError):
    """A training run stopped early; the last snapshot is preserved on disk."""

    def __init__(self, message: str, last_snapshot: Path | None = None) -> None:
        self.last_snapshot = last_snapshot
        super().__init__(message)


class ArtifactIOError(ResearchRLError, OSError):
    """Reading or writing a run artifact failed."""
