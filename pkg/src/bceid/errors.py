"""Exception hierarchy.  Every error raised for bad user input is an InputError."""

from __future__ import annotations


class InputError(ValueError):
    """Malformed or inconsistent input (parse errors, dimension mismatches)."""


class StructureError(InputError):
    """The problem lacks the structure a method requires (e.g. not AUD)."""


class DominatedActionError(InputError):
    """An action in the support of the marginal is strictly dominated."""

    def __init__(self, action: str):
        super().__init__(f"action {action!r} in the marginal's support is strictly dominated")
        self.action = action


class CapExceededError(InputError):
    """Exhaustive enumeration was requested above the configured cap."""
