"""Exception types raised by the squidcoupler package."""


class CouplerError(Exception):
    """Base class for all package-specific errors."""


class NoConvergence(CouplerError):
    """The static SQUID solver failed to converge."""


class BeyondCritical(CouplerError):
    """Requested bias current is at or above the critical current."""


class SingularPhase(CouplerError):
    """Working point too close to a phase singularity of the transfer function."""


class NoSignChange(CouplerError):
    """Net coupling does not cross zero on the searched bias interval."""


class InfiniteLifetime(CouplerError):
    """Dephasing estimate requested for a noiseless (alpha = 0) configuration."""


class StepTooLarge(CouplerError):
    """Propagation step exceeds the resolution needed for the schedule."""


class ScheduleRangeError(CouplerError):
    """Time outside the schedule's [0, total_duration] window."""


class NotUnitary(CouplerError):
    """Matrix fails the unitarity check required for gate analysis."""


class DegenerateSplittings(CouplerError):
    """Analytic seed undefined when both qubit splittings coincide."""


class BudgetExhausted(CouplerError):
    """Optimizer ran out of evaluations.  Carries the best result found."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class InfeasibleLocalGate(CouplerError):
    """Local-gate synthesis stalled above the feasibility threshold."""


class ConfigError(CouplerError):
    """Malformed or incomplete device configuration."""
