"""Exception hierarchy shared across the package.

Two families matter for the CLI exit-code contract: ``ValidationError``
(bad inputs, exit code 2) and ``NumericalError`` (solver failure, exit
code 3).
"""


class HopcapError(Exception):
    """Base class for all package errors."""


class ValidationError(HopcapError):
    """Invalid inputs, configuration or preconditions."""


class NumericalError(HopcapError):
    """A numerical procedure failed to produce a usable result."""


class ConfigError(ValidationError):
    """Malformed or inconsistent run configuration."""


class DiscreteKindError(ValidationError):
    """A density-only operation was called on a discrete fading model."""


class NotDiscrete(ValidationError):
    """A discrete-only operation was called on a continuous fading model."""


class NonPositivePi(ValidationError):
    """The normalized power level must be strictly positive."""


class BudgetExhausted(ValidationError):
    """Network power budget does not exceed the overhead power."""


class OrderingViolation(ValidationError):
    """Powers violate the better-channel-gets-more-rate ordering."""


class HypothesisNotMet(ValidationError):
    """Model does not satisfy the hypotheses required by a limit check."""


class BracketFailure(NumericalError):
    """No sign change found when bracketing the water-level equation."""


class NoBracket(NumericalError):
    """No sign change found for the direct water-level characterisation."""


class NoStationaryPoint(NumericalError):
    """The scan found no interior stationary point (boundary optimum)."""
