"""Shared exception types."""


class TagMismatchError(TypeError):
    """Statistics from different spaces (or with different shapes) were combined."""


class DomainError(ValueError):
    """An argument left its documented domain."""


class NumericError(ArithmeticError):
    """An evaluation left the finite range; carries diagnostic context."""

    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = dict(context or {})


class ConfigError(ValueError):
    """A configuration violates a family invariant; the message names it."""
