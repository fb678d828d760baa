"""Exception types shared across the package."""
from __future__ import annotations


class ParameterError(ValueError):
    """A parameter lies outside its allowed domain."""


class DimensionError(ValueError):
    """A configuration does not match the graph it is used with."""


class CapacityError(RuntimeError):
    """An instance is too large for a brute-force computation."""


class RegimeError(ValueError):
    """An operation is not defined in the requested parameter regime."""


class UnreachableTargetError(RuntimeError):
    """The target set cannot be reached from the start state."""
