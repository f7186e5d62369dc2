"""Exception hierarchy shared by the whole toolkit.

Every failure mode that callers are expected to handle gets its own class so
that the CLI can map them onto stable exit codes (usage = 2, evaluation = 3,
invariant violation = 4).
"""


class SobolkitError(Exception):
    """Base class for all toolkit errors."""


class DomainError(SobolkitError, ValueError):
    """A scalar argument is outside its mathematical domain."""


class ConfigurationError(SobolkitError, ValueError):
    """Inconsistent sizes, malformed specs, unknown identifiers."""


class InvariantViolation(SobolkitError):
    """An operation would break a structural guarantee (e.g. mixing designs
    from different families, pairing non-independent designs)."""


class PreconditionError(SobolkitError):
    """A state-machine operation was called out of order."""


class DegenerateModelError(SobolkitError):
    """The pooled output variance is zero; the model is constant on the
    sampled points and no correlation-based index is defined."""


class EvaluationError(SobolkitError):
    """Model evaluation failed (non-finite output, crashed external code)."""


class ProtocolError(EvaluationError):
    """The external simulator violated the file exchange protocol."""


class UnsupportedModelError(SobolkitError):
    """The requested closed-form computation is not available for this
    model structure."""
