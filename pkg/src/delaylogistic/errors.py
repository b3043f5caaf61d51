"""Exception types raised across the package."""


class DomainError(ValueError):
    """A query time lies outside the interval a solution can answer."""

    def __init__(self, t, lo, hi):
        self.t, self.lo, self.hi = t, lo, hi
        super().__init__(f"t={t!r} outside evaluable interval [{lo!r}, {hi!r}]")


class ConfigurationError(ValueError):
    """Invalid integrator / run configuration."""


class BlowUpError(RuntimeError):
    """The integrated state became non-finite or exceeded the blow-up bound."""

    def __init__(self, t, state):
        self.t, self.state = t, state
        super().__init__(f"state blew up at t={t!r}: {state!r}")


class MarginalCaseError(ValueError):
    """kappa1*kappa2 == alpha1*alpha2: the coexistence system is singular."""


class InconclusiveError(RuntimeError):
    """The argument-principle count could not be resolved to an integer."""
