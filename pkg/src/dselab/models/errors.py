"""Exception types shared by the model layer."""


class ModelShapeError(ValueError):
    """State/parameter dimensions are inconsistent with the model."""


class NumericError(ArithmeticError):
    """A numeric precondition failed (non-finite input, indefinite matrix)."""


class SingularNetworkError(NumericError):
    """The network matrix is singular under the current overlays."""

    def __init__(self, message, bus=None):
        super().__init__(message)
        self.bus = bus


class ConfigurationError(ValueError):
    """An option was set to an unsupported value."""
