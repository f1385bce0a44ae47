"""Exception hierarchy shared across the package."""


class QvoteError(Exception):
    """Base class for all package errors."""


class LayoutError(QvoteError):
    """Unknown site, duplicate label, or mismatched layouts."""


class CutoffError(QvoteError):
    """Occupation outside a mode's cutoff, or Hilbert dimension over the limit."""


class DegenerateStateError(QvoteError):
    """A state that cannot be normalized (zero vector)."""


class BasisError(QvoteError):
    """Measurement basis is not orthonormal or is otherwise malformed."""


class IncompleteBasisError(BasisError):
    """Strict measurement hit residual probability outside the declared basis."""


class EntangledStateError(QvoteError):
    """A state expected to factorize across a site bipartition does not."""


class ProtocolError(QvoteError):
    """Protocol state machine misuse (duplicate voter, tally before transfer, ...)."""


class ConfigError(QvoteError):
    """Scenario configuration failed schema validation."""


class InvariantViolation(QvoteError):
    """A self-check invariant failed; indicates a bug, not bad user input."""
