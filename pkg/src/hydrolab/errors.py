"""Exception types shared across the package."""


class HydrolabError(Exception):
    """Base class for all package errors."""


class DomainError(HydrolabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(HydrolabError, RuntimeError):
    """An iterative method failed to converge."""


class InvariantViolation(HydrolabError):
    """A constructed object failed one or more of its checks.

    ``failures`` maps the check name to the offending magnitude.
    """

    def __init__(self, failures):
        self.failures = dict(failures)
        lines = ", ".join(f"{k}={v:.3e}" for k, v in self.failures.items())
        super().__init__(f"invariant checks failed: {lines}")


class HypothesisError(HydrolabError, ValueError):
    """Input data do not satisfy the hypotheses of a check.

    ``conditions`` maps each failed condition to a short explanation.
    """

    def __init__(self, conditions):
        self.conditions = dict(conditions)
        lines = "; ".join(f"{k}: {v}" for k, v in self.conditions.items())
        super().__init__(f"hypotheses not satisfied: {lines}")


class StabilityError(HydrolabError, ValueError):
    """Requested time step exceeds the explicit stability limit."""


class BlowupSignal(HydrolabError, FloatingPointError):
    """A non-finite value appeared during time integration."""


class RootFindingError(HydrolabError, RuntimeError):
    """Root search failed (bracket failure, count mismatch, no convergence)."""


class PoleProximityError(HydrolabError, ValueError):
    """Evaluation point is too close to the singular set of an integrand."""


class ConfigError(HydrolabError, ValueError):
    """Experiment configuration is invalid."""
