"""Exception hierarchy shared by every module of the package."""


class ThermosteerError(Exception):
    """Base class for all package errors."""


class ShapeError(ThermosteerError, ValueError):
    """Operand dimensions are inconsistent."""


class DomainError(ThermosteerError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(ThermosteerError, ValueError):
    """An object violates one of its structural invariants."""


class NumericalFailure(ThermosteerError, RuntimeError):
    """A numerical routine did not converge."""


class CapacityError(ThermosteerError):
    """A requested problem size exceeds the configured cap."""


class SolverError(ThermosteerError, RuntimeError):
    """The SDP solver finished with a non-optimal status."""

    def __init__(self, status, message=""):
        self.status = status
        super().__init__(message or f"SDP solver finished with status {status}")


class ConditionViolated(ThermosteerError):
    """An LF1 filter breaks condition (i) or (ii) for the given input.

    ``condition`` is ``"i"`` or ``"ii"``.
    """

    def __init__(self, condition, residual):
        self.condition = condition
        self.residual = residual
        super().__init__(f"filter violates condition ({condition}); residual {residual:.3e}")


class ZeroSuccessProbability(ThermosteerError):
    """An LF1 filter has zero success probability on the thermal state."""


class Inconclusive(ThermosteerError):
    """The assemblage is still steerable at the end of the time window."""

    def __init__(self, t_max, margin):
        self.t_max = t_max
        self.margin = margin
        super().__init__(f"still steerable at t_max={t_max:g} (margin {margin:.3e})")


class NotSteerable(ThermosteerError):
    """The assemblage admits an LHS model, so no advantage exists."""


class NoAdvantage(NotSteerable):
    """No certificate Hamiltonians exist because SR_gamma vanishes."""


class NoAdmissibleHamiltonian(ThermosteerError):
    """Every candidate Hamiltonian family fails the energy-scale filter."""
