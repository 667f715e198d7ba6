"""
Exception types shared across packages.

All of them subclass a builtin so callers (and the CLI exit-code mapping)
can catch them broadly.
"""


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class UnsupportedPrimitiveError(ValueError):
    """A tape primitive kind has no registered forward/backward rule."""


class NonFiniteError(FloatingPointError):
    """A computation produced NaN or infinity."""

    def __init__(self, message: str, **diagnostics):
        if diagnostics:
            details = ", ".join(f"{key}={value}" for key, value in diagnostics.items())
            message = f"{message} ({details})"
        super().__init__(message)
        self.diagnostics = diagnostics


class CheckpointFormatError(ValueError):
    """A checkpoint file is corrupt, truncated or of an unknown version."""


class DegenerateContentError(ValueError):
    """A content image has (near) zero intensity spread."""
