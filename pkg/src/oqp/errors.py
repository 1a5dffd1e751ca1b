"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class OqpError(Exception):
    exit_code = 1


class DomainError(OqpError, ValueError):
    """Argument outside the domain where the quantity is defined."""

    exit_code = 2


class Unstable(DomainError):
    """Service rate does not exceed the mean arrival rate (r <= lambda)."""


class UnsupportedModel(DomainError):
    pass


class NonPositiveService(DomainError):
    pass


class ScanCapExceeded(DomainError):
    pass


class CapTooSmall(DomainError):
    pass


class NoCrossing(OqpError):
    exit_code = 3


class EmptyAdmissibleSet(OqpError):
    exit_code = 3


class SimulationUnresolved(OqpError):
    exit_code = 4
