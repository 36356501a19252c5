"""Exception types shared across the simulator."""


class ConsolidsimError(Exception):
    """Base class for all consolidsim errors."""


class TraceParseError(ConsolidsimError, ValueError):
    """A trace file could not be parsed; the message names the offending line."""


class EmptyTraceError(TraceParseError):
    """No usable records remained after filtering."""


class InsufficientIdleError(ConsolidsimError, RuntimeError):
    """An allocation asked for more nodes than the provisioner holds idle."""


class UnknownJobError(ConsolidsimError, KeyError):
    """A job id was not found where it was required to exist."""


class InfeasibleReclaimError(ConsolidsimError, RuntimeError):
    """A reclaim demanded more nodes than the batch tier holds in total."""


class QueueIntegrityError(ConsolidsimError, ValueError):
    """A queue operation would violate the queue ordering/uniqueness invariant."""


class ConservationError(ConsolidsimError, RuntimeError):
    """The cluster node partition invariant was violated (internal bug guard)."""


class IncomparableRunsError(ConsolidsimError, ValueError):
    """Reports produced from different traces cannot be compared."""


class CalibrationError(ConsolidsimError, ValueError):
    """Capacity calibration could not reach the requested peak demand."""
