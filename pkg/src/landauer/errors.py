"""Exception and warning types shared across the package."""


class TransportError(Exception):
    """Base class for numerical failures in a transport computation."""


class ValidationError(TransportError):
    """A system description violates its invariants."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ConfigError(TransportError):
    """A configuration file is missing, unreadable or malformed."""


class OutOfBand(TransportError):
    """Energy lies outside the closed band of a lead (or of every lead)."""


class AtBandEdge(TransportError):
    """Energy lies within the edge-exclusion margin of a band edge."""


class OutOfBandRealAxis(OutOfBand):
    """Real-axis Green's function requested off-band without ``allow_offband``."""


class ExceptionalEnergy(TransportError):
    """The scattering system is numerically singular at this energy."""

    def __init__(self, energy, condition):
        self.energy = energy
        self.condition = condition
        super().__init__(f"exceptional energy E={energy!r}: condition estimate {condition:.3e}")


class LeadClosed(TransportError):
    """A requested lead has no propagating states at this energy."""


class QuadratureFailure(TransportError):
    """Adaptive quadrature could not meet its error target within budget."""


class TruncationTooShort(TransportError):
    """A truncated lead is too short to hold the coupling supports."""


class WindowOutsideTrace(TransportError):
    """A plateau window is not covered by the recorded times."""


class RecurrenceHorizonExceeded(UserWarning):
    """Requested times run past the finite-lead recurrence horizon."""
