"""Exception hierarchy shared across the package."""


class MarkovDirichletError(Exception):
    """Base class for all package errors."""


class DomainError(MarkovDirichletError, ValueError):
    """A domain violates one of its structural invariants."""


class FieldError(MarkovDirichletError, ValueError):
    """A scalar field is malformed or attached to the wrong domain."""


class KernelError(MarkovDirichletError, ValueError):
    """A transition kernel violates stochasticity or absorption."""


class OracleError(MarkovDirichletError, ValueError):
    """A ground-truth computation cannot be carried out."""


class SolverError(MarkovDirichletError, RuntimeError):
    """Fixed-point iteration failed in a way that cannot be reported."""


class MonotonicityError(SolverError):
    """A monotone run hit a negative increment, so its precondition was false."""

    def __init__(self, message, step=None, witness=None):
        super().__init__(message)
        self.step = step
        self.witness = witness


class BarrierError(MarkovDirichletError, ValueError):
    """No catalog entry produces a valid barrier for the requested anchor."""


class AlgebraError(MarkovDirichletError, ValueError):
    """An algebraic identity or variance-field invariant failed."""


class PresetError(MarkovDirichletError, ValueError):
    """A boundary-data preset is invalid for the given domain."""


class ConfigError(MarkovDirichletError, ValueError):
    """A run configuration file is malformed."""
