"""Exception hierarchy shared by all dtmon modules.

The CLI maps these onto process exit codes - validation problems,
assumption violations and resource-cap refusals are distinct failure
classes and must stay distinguishable all the way up the stack.
"""
from __future__ import annotations


class DtmonError(Exception):
    """Base class for all errors raised by dtmon."""


class ValidationError(DtmonError):
    """Malformed or contradictory input (documents, parameters, automata)."""


class OrderingError(ValidationError):
    """A concatenation or word construction violates date ordering."""


class UnsupportedModeError(ValidationError):
    """A property requires an analysis mode that is out of scope."""


class AssumptionError(DtmonError):
    """A run violated one of the named system assumptions."""

    def __init__(self, assumption: str, message: str):
        super().__init__(f"[{assumption}] {message}")
        self.assumption = assumption


class FifoViolationError(AssumptionError):
    """Timestamps from one source regressed, contradicting FIFO delivery."""

    def __init__(self, message: str):
        super().__init__("fifo-order", message)


class ResourceCapError(DtmonError):
    """An enumeration or fixpoint exceeded its configured cap."""
