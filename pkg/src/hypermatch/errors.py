"""Exception hierarchy shared by every hypermatch module."""

from __future__ import annotations

from typing import Any


class HypermatchError(Exception):
    """Base class for all errors raised by hypermatch."""


class InputError(HypermatchError, ValueError):
    """Invalid vertex ids, malformed instances, or violated preconditions."""


class InvalidMatching(HypermatchError):
    """A matching failed validation against its hypergraph."""


class HypothesisViolated(HypermatchError):
    """An exchange argument could not proceed although its preconditions held.

    Raised instead of returning a silently wrong matching.
    """


class TooClose(HypermatchError):
    """Too few uncovered vertices to place the disjoint helper sets."""

    def __init__(self, message: str, uncovered: list[int], needed: int):
        super().__init__(message)
        self.uncovered = uncovered
        self.needed = needed


class NoAugment(HypermatchError):
    """No local augmentation move applies to the current matching."""

    def __init__(self, message: str, evidence: dict[str, Any]):
        super().__init__(message)
        self.evidence = evidence


class Stalled(HypermatchError):
    """Local search stopped before reaching the target size."""

    def __init__(self, message: str, matching: Any, evidence: dict[str, Any]):
        super().__init__(message)
        self.matching = matching
        self.evidence = evidence


class AbsorbPlanUnavailable(HypermatchError):
    """Sampling never produced a certified absorbing matching."""

    def __init__(self, message: str, evidence: dict[str, Any]):
        super().__init__(message)
        self.evidence = evidence


class AbsorptionFailed(HypermatchError):
    """No edge of the absorbing plan can absorb the given set."""


class StageFailure(HypermatchError):
    """A stage of the extremal pipeline could not be completed.

    ``evidence`` always holds the violated inequality with both sides
    evaluated, as ``{"lhs": ..., "relation": ..., "rhs": ...}`` plus
    stage-specific context.
    """

    def __init__(self, stage: str, message: str, evidence: dict[str, Any], run: Any = None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.evidence = evidence
        self.run = run
