"""Parameter records and right-hand sides for the four population models.

Model ids (also the CLI strings): ``"hutchinson"``, ``"adde"``, ``"madde"``
and ``"competition"``.  All right-hand sides are pure functions of the current
state, the delayed state(s) and, where the model has a distributed delay, the
running window integral(s); the integrator is responsible for supplying them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "MODEL_IDS", "SingleParams", "HutchinsonParams", "CompetitionParams",
    "rhs_madde", "rhs_adde", "rhs_hutchinson", "rhs_competition", "survival_factor",
    "FIG4_PARAMS", "FIG5_PARAMS", "FIG4_PARAMS_GROWTH_SWAPPED", "FIG5_PARAMS_GROWTH_SWAPPED", "FIG6_PARAMS", "FIG6_HUTCHINSON",
]

MODEL_IDS = ("hutchinson", "adde", "madde", "competition")


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


def _nonnegative(name, value):
    if not (value >= 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be >= 0 and finite, got {value!r}")


@dataclass(frozen=True)
class SingleParams:
    """Growth ``gamma``, death ``mu``, intraspecific competition ``kappa``, delay ``tau``."""

    gamma: float
    mu: float
    kappa: float
    tau: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "mu", "kappa"):
            _positive(name, getattr(self, name))
        _nonnegative("tau", self.tau)

    def with_tau(self, tau: float) -> "SingleParams":
        return replace(self, tau=float(tau))


@dataclass(frozen=True)
class HutchinsonParams:
    r: float
    K_cap: float
    tau: float = 0.0

    def __post_init__(self):
        _positive("r", self.r)
        _positive("K_cap", self.K_cap)
        _nonnegative("tau", self.tau)

    def with_tau(self, tau: float) -> "HutchinsonParams":
        return replace(self, tau=float(tau))


@dataclass(frozen=True)
class CompetitionParams:
    """Two competing species.

    ``alpha1`` is the competitive effect of species 1 on species 2 and
    ``alpha2`` the effect of species 2 on species 1, so species 1 dies at
    ``mu1 + kappa1*x1 + alpha2*x2``.
    """

    gamma1: float
    gamma2: float
    mu1: float
    mu2: float
    kappa1: float
    kappa2: float
    alpha1: float
    alpha2: float
    tau1: float = 0.0
    tau2: float = 0.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "mu1", "mu2", "kappa1", "kappa2"):
            _positive(name, getattr(self, name))
        # zero interspecific competition is allowed: it decouples the species
        _nonnegative("alpha1", self.alpha1)
        _nonnegative("alpha2", self.alpha2)
        _nonnegative("tau1", self.tau1)
        _nonnegative("tau2", self.tau2)

    def with_taus(self, tau1: float, tau2: float) -> "CompetitionParams":
        return replace(self, tau1=float(tau1), tau2=float(tau2))

    def species(self, i: int) -> SingleParams:
        """Species ``i`` (1 or 2) in isolation."""
        if i == 1:
            return SingleParams(self.gamma1, self.mu1, self.kappa1, self.tau1)
        if i == 2:
            return SingleParams(self.gamma2, self.mu2, self.kappa2, self.tau2)
        raise ValueError(f"species index must be 1 or 2, got {i!r}")

    @property
    def window_weights(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Integrand weights ``(w_x1, w_x2)`` of the two survival windows."""
        return (self.kappa1, self.alpha2), (self.alpha1, self.kappa2)


def survival_factor(x_at_minus_tau: float, p: SingleParams, window_integral: float) -> float:
    """Individuals alive at ``t - tau`` still alive at ``t``.

    ``window_integral`` is the integral of the population over ``[t - tau, t]``.
    """
    return x_at_minus_tau * math.exp(-p.mu * p.tau - p.kappa * window_integral)


def rhs_madde(p: SingleParams, x_now: float, x_delayed: float, z: float) -> float:
    """Decay-consistent delayed logistic growth; ``z`` is the window integral of ``x``."""
    return p.gamma * survival_factor(x_delayed, p, z) - p.mu * x_now - p.kappa * x_now * x_now


def rhs_adde(p: SingleParams, x_now: float, x_delayed: float) -> float:
    e = math.exp(-p.mu * p.tau)
    growth = p.gamma * p.mu * e * x_delayed / (p.mu + p.kappa * (1.0 - e) * x_delayed)
    return growth - p.mu * x_now - p.kappa * x_now * x_now


def rhs_hutchinson(p: HutchinsonParams, x_now: float, x_delayed: float) -> float:
    return p.r * x_now * (1.0 - x_delayed / p.K_cap)


def rhs_competition(p: CompetitionParams, x_now, x_delayed_1, x_delayed_2,
                    z1: float, z2: float) -> tuple[float, float]:
    """Two-species right-hand side.

    ``x_delayed_1`` and ``x_delayed_2`` are the full state at ``t - tau1`` and
    ``t - tau2``; only species ``i``'s own component enters its growth term.
    ``z1`` integrates ``kappa1*x1 + alpha2*x2`` over ``[t - tau1, t]`` and
    ``z2`` integrates ``alpha1*x1 + kappa2*x2`` over ``[t - tau2, t]``.
    """
    x1, x2 = x_now
    # mirrors rhs_madde; with alpha1 = alpha2 = 0 each line is rhs_madde with z -> kappa*z
    g1 = p.gamma1 * (x_delayed_1[0] * math.exp(-p.mu1 * p.tau1 - z1))
    g2 = p.gamma2 * (x_delayed_2[1] * math.exp(-p.mu2 * p.tau2 - z2))
    return (g1 - p.mu1 * x1 - p.kappa1 * x1 * x1 - p.alpha2 * x1 * x2,
            g2 - p.mu2 * x2 - p.kappa2 * x2 * x2 - p.alpha1 * x1 * x2)


# Parameter sets used in the figures (delays left at 0; set them per run).
FIG4_PARAMS = CompetitionParams(gamma1=2.0, gamma2=1.5, mu1=0.5, mu2=0.5,
                                kappa1=0.8, kappa2=1.0, alpha1=1.0, alpha2=1.5)
FIG5_PARAMS = CompetitionParams(gamma1=2.0, gamma2=1.5, mu1=0.5, mu2=0.5,
                                kappa1=1.2, kappa2=1.0, alpha1=1.0, alpha2=0.5)
# Same sets with the two growth rates exchanged.  This is the only reading of the
# printed tuples under which the reported outcomes at the figures' test points hold.
FIG4_PARAMS_GROWTH_SWAPPED = replace(FIG4_PARAMS, gamma1=1.5, gamma2=2.0)
FIG5_PARAMS_GROWTH_SWAPPED = replace(FIG5_PARAMS, gamma1=1.5, gamma2=2.0)
FIG6_PARAMS = SingleParams(gamma=1.5, mu=0.5, kappa=1.0)
FIG6_HUTCHINSON = HutchinsonParams(r=1.0, K_cap=1.0)
