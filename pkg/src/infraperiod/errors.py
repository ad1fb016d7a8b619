"""Exception types. The CLI maps them to exit codes."""


class InfraError(Exception):
    exit_code = 1


class CheckFailure(InfraError):
    """A bound or property that should hold was observed to fail."""

    exit_code = 2


class CapabilityError(InfraError):
    """The request is outside what can be computed here (size, rank, precision)."""

    exit_code = 3


class BudgetError(CapabilityError):
    """A term or enumeration budget would be exceeded."""


class ConfigError(InfraError):
    exit_code = 4


class RankDeficiencyError(InfraError):
    exit_code = 4


class PreconditionError(InfraError):
    """Inputs violate a documented precondition."""

    exit_code = 4
