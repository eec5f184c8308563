"""Exception hierarchy.

The CLI maps these onto its exit codes: configuration problems exit 2,
numeric guard violations exit 3, violated solver hypotheses exit 4.
"""


class RecurlabError(Exception):
    """Base class for all package errors."""


class ConfigError(RecurlabError, ValueError):
    """Malformed descriptor, unknown key or invalid parameter."""


class DimensionError(RecurlabError, ValueError):
    """Codomain dimensions of two signals do not agree."""


class NotDifferentiableError(RecurlabError, ValueError):
    """A generator has no closed-form derivative of the requested order."""


class NumericGuardError(RecurlabError, ArithmeticError):
    """A numeric guard tripped (overflow, unbounded forcing, range guard)."""


class UnboundedForcingError(NumericGuardError):
    """The sampled sup of a forcing term exceeds the boundedness guard."""


class HypothesisViolation(RecurlabError, ValueError):
    """The problem lies outside the hypotheses a solver relies on."""


class NonHyperbolicError(HypothesisViolation):
    """The characteristic roots come too close to the imaginary axis."""
