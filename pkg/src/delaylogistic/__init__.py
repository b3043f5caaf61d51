"""Delayed logistic growth with decay-consistent delays.

Simulation, equilibria, stability, bifurcation and adaptive-dynamics tools for
the logistic equation whose delayed recruitment is discounted by the deaths
(natural and crowding) suffered during maturation, its two-species
competition extension, and the Hutchinson and Arino et al. reference models.
"""

__version__ = "0.1.0"

from .errors import (BlowUpError, ConfigurationError, DomainError, InconclusiveError,  # noqa: E402
                     MarginalCaseError)
from .history import DenseSolution, InitialHistory  # noqa: E402
from .integrator import IntegratorConfig, aligned_step, integrate  # noqa: E402
from .models import CompetitionParams, HutchinsonParams, SingleParams  # noqa: E402

__all__ = [
    "__version__", "BlowUpError", "ConfigurationError", "DomainError", "InconclusiveError",
    "MarginalCaseError", "DenseSolution", "InitialHistory", "IntegratorConfig", "aligned_step",
    "integrate", "CompetitionParams", "HutchinsonParams", "SingleParams",
]
