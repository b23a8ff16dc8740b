"""Structured verdicts shared by every checker in the package."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive-at-depth"


class AdicError(Exception):
    """Base class for errors raised by adic_lab."""


class DiagramError(AdicError, ValueError):
    """Malformed input: a diagram, ordering or path violates an invariant."""


class GuardError(AdicError):
    """A precondition of an operation does not hold for the given input."""


class LevelError(GuardError, IndexError):
    """A level index lies outside the stored (or requested) range."""


class InconclusiveError(GuardError):
    """The stored prefix is too shallow to complete the requested construction."""


@dataclass
class Certificate:
    """Verdict of a finite check, with the bounds used and the witnesses found.

    ``params`` records every depth/bound/tolerance that influenced the verdict so
    a run can be reproduced; ``witness`` carries whatever evidence backs it.
    """

    check: str
    status: str
    params: dict[str, Any] = field(default_factory=dict)
    witness: dict[str, Any] = field(default_factory=dict)
    message: str = ""

    def __post_init__(self) -> None:
        if self.status not in (HOLDS, FAILS, INCONCLUSIVE):
            raise ValueError(f"unknown certificate status {self.status!r}")

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "status": self.status,
            "params": self.params,
            "witness": self.witness,
            "message": self.message,
        }
