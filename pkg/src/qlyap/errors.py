"""Exception types raised by qlyap.

All validation failures derive from :class:`QlyapError` so callers can catch
the whole family with one clause.  Each exception message names the violated
condition and, where meaningful, the measured defect.
"""


class QlyapError(Exception):
    """Base class for all qlyap errors."""


class DimensionMismatchError(QlyapError):
    """Operands have incompatible shapes."""


class NotHermitianError(QlyapError):
    """Matrix is not Hermitian within tolerance."""


class TraceNotOneError(QlyapError):
    """Matrix trace differs from one beyond tolerance."""


class NotPositiveError(QlyapError):
    """Matrix has an eigenvalue below the positivity tolerance."""


class NotPseudoPureError(QlyapError):
    """State does not have a {w, u, ..., u} two-point spectrum."""


class NotStationaryError(QlyapError):
    """Target state does not commute with the drift Hamiltonian."""


class NotFixedPointError(QlyapError):
    """Feedback field does not vanish at the requested expansion point."""


class LeakageIntoCartanError(QlyapError):
    """Linearization couples the off-diagonal block to the diagonal block."""


class DimensionTooLargeError(QlyapError):
    """Requested dimension exceeds the supported enumeration limit."""


class ConfigInvalidError(QlyapError):
    """Simulation configuration violates a precondition."""


class StepRejectedError(QlyapError):
    """Step-size control exhausted its halving budget."""


class ConfigError(QlyapError):
    """Scenario configuration file is malformed or inconsistent."""


class UnknownPresetError(ConfigError):
    """Requested preset name is not in the registry."""
