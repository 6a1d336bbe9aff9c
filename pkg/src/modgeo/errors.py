"""Shared failure signals for numerical routines."""
from __future__ import annotations


class NonConvergenceError(RuntimeError):
    """An iterative scheme exhausted its budget before stabilizing.

    Carries the last achieved estimate so callers can report how far the
    computation got before giving up.
    """

    def __init__(self, message: str, *, achieved: float | None = None,
                 target: float | None = None) -> None:
        super().__init__(message)
        self.achieved = achieved
        self.target = target
