"""Exception hierarchy shared by every module."""


class RingCavityError(Exception):
    """Base class for all package errors."""


class ScheduleDomainError(RingCavityError, ValueError):
    """A time lies outside the domain covered by a detuning schedule."""


class BasisTooLargeError(RingCavityError, ValueError):
    """The requested Fock basis exceeds the configured dimension limit."""


class BasisTooSmallError(RingCavityError, ValueError):
    """The photon cutoff cannot hold the requested excitation pattern."""


class BasisMismatchError(RingCavityError, ValueError):
    """Two states (or a state and an operator) live in different bases."""


class NormalizationError(RingCavityError, ValueError):
    """A state vector is not normalized."""


class EmptyTrajectoryError(RingCavityError, ValueError):
    pass


class ProtocolNotApplicableError(RingCavityError, ValueError):
    """A transfer protocol was requested for a configuration it cannot serve."""


class ConfigError(RingCavityError, ValueError):
    """Invalid configuration document or scenario parameters."""


class ConvergenceError(RingCavityError, ArithmeticError):
    """A numerical hygiene gate (norm drift, dt convergence) tripped."""
