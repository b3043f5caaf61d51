"""Survival thresholds and equilibria of the single-species and competition models."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from scipy.optimize import bisect

from .errors import MarginalCaseError
from .models import CompetitionParams, HutchinsonParams, SingleParams

__all__ = [
    "Root", "Equilibrium", "EquilibriumSet", "r0_single", "tau_h", "carrying_capacity",
    "madde_equilibrium", "adde_equilibrium", "madde_residual", "adde_residual",
    "single_equilibria", "competition_equilibria", "competition_xstar",
    "weak_competition", "strong_competition", "ec_linear_residual", "root_bisect",
    "EXISTENCE_MARGIN",
]

EXISTENCE_MARGIN = 1e-12
_XTOL = 1e-15
_RTOL = 4 * 2.220446049250313e-16


class Root(NamedTuple):
    value: float
    exists: bool
    residual: float = 0.0


def root_bisect(f, a: float, b: float) -> float:
    """Bisection on a bracket with ``f(a) >= 0 >= f(b)`` (or the reverse).

    Runs to an interval width of ~1e-15, well inside the 1e-12 the callers
    need, so that residuals of order 1e-15 come out as well.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError(f"no sign change on [{a}, {b}]: f(a)={fa}, f(b)={fb}")
    return bisect(f, a, b, xtol=_XTOL, rtol=_RTOL, maxiter=500)


def r0_single(gamma: float, mu: float, tau: float) -> float:
    """Basic survival ratio ``gamma * exp(-mu*tau) / mu``."""
    return gamma * math.exp(-mu * tau) / mu


def tau_h(gamma: float, mu: float) -> float:
    """Delay at which the interior equilibrium vanishes; 0 when ``gamma <= mu``."""
    if gamma <= mu:
        return 0.0
    return math.log(gamma / mu) / mu


def carrying_capacity(gamma: float, mu: float, kappa: float, tau: float) -> float:
    """Delay-reduced carrying capacity ``(gamma*exp(-mu*tau) - mu) / kappa``; exists iff > 0."""
    return (gamma * math.exp(-mu * tau) - mu) / kappa


def madde_residual(p: SingleParams, x: float) -> float:
    m = p.mu + p.kappa * x
    return p.gamma * math.exp(-p.tau * m) - m


def adde_residual(p: SingleParams, x: float) -> float:
    e = math.exp(-p.mu * p.tau)
    return p.gamma * p.mu * e / (p.mu + p.kappa * (1.0 - e) * x) - p.mu - p.kappa * x


def _interior(p: SingleParams, g) -> Root:
    if r0_single(p.gamma, p.mu, p.tau) <= 1.0:
        return Root(0.0, False, 0.0)
    K = carrying_capacity(p.gamma, p.mu, p.kappa, p.tau)
    if p.tau == 0.0:
        # both equations reduce to the logistic ODE, whose root is K itself
        return Root(K, True, abs(g(p, K)))
    hi = K
    while g(p, hi) > 0:  # rounding can leave g(K) a hair above zero
        hi *= 1.0 + 1e-12
    x = root_bisect(lambda v: g(p, v), 0.0, hi)
    return Root(x, x > 0, abs(g(p, x)))


def madde_equilibrium(p: SingleParams) -> Root:
    """Positive root of ``gamma*exp(-tau*(mu + kappa*x)) = mu + kappa*x`` on ``(0, K]``."""
    return _interior(p, madde_residual)


def adde_equilibrium(p: SingleParams) -> Root:
    """Positive steady state of the Arino et al. model, found on ``(0, K]``."""
    return _interior(p, adde_residual)


@dataclass
class Equilibrium:
    label: str
    state: tuple
    residual: float
    exists: bool
    note: str = ""


@dataclass
class EquilibriumSet:
    """Equilibria of one model plus its per-species thresholds."""

    model: str
    equilibria: list[Equilibrium]
    r0: tuple
    tau_h: tuple
    K: tuple
    xstar: tuple = ()
    extra: dict = field(default_factory=dict)

    def get(self, label: str) -> Equilibrium:
        for e in self.equilibria:
            if e.label == label:
                return e
        raise KeyError(label)

    def existing(self) -> list[Equilibrium]:
        return [e for e in self.equilibria if e.exists]


def single_equilibria(model: str, p) -> EquilibriumSet:
    if model == "hutchinson":
        if not isinstance(p, HutchinsonParams):
            raise TypeError("hutchinson needs HutchinsonParams")
        return EquilibriumSet(model, [Equilibrium("zero", (0.0,), 0.0, True),
                                      Equilibrium("K", (p.K_cap,), 0.0, True)],
                              r0=(), tau_h=(), K=(p.K_cap,))
    if model not in ("madde", "adde"):
        raise ValueError(f"single_equilibria handles hutchinson/adde/madde, not {model!r}")
    root = madde_equilibrium(p) if model == "madde" else adde_equilibrium(p)
    eqs = [Equilibrium("zero", (0.0,), 0.0, True),
           Equilibrium("x*", (root.value,), root.residual, root.exists,
                       "" if root.exists else "R0 <= 1: no positive equilibrium")]
    return EquilibriumSet(model, eqs,
                          r0=(r0_single(p.gamma, p.mu, p.tau),),
                          tau_h=(tau_h(p.gamma, p.mu),),
                          K=(carrying_capacity(p.gamma, p.mu, p.kappa, p.tau),),
                          xstar=(root.value,))


def competition_xstar(p: CompetitionParams) -> tuple[float, float]:
    """Single-species equilibria ``(x1*, x2*)``, each 0 when that species is not viable."""
    return tuple(madde_equilibrium(p.species(i)).value for i in (1, 2))


def _competition_residual(p: CompetitionParams, x1: float, x2: float) -> float:
    m1 = p.mu1 + p.kappa1 * x1 + p.alpha2 * x2
    m2 = p.mu2 + p.alpha1 * x1 + p.kappa2 * x2
    r1 = p.gamma1 * math.exp(-p.tau1 * m1) - m1 if x1 != 0 else 0.0
    r2 = p.gamma2 * math.exp(-p.tau2 * m2) - m2 if x2 != 0 else 0.0
    return max(abs(r1), abs(r2))


def weak_competition(p: CompetitionParams, xstar=None) -> bool:
    x1, x2 = competition_xstar(p) if xstar is None else xstar
    return (p.kappa1 * p.kappa2 > p.alpha1 * p.alpha2
            and p.kappa1 * x1 > p.alpha2 * x2 and p.kappa2 * x2 > p.alpha1 * x1)


def strong_competition(p: CompetitionParams, xstar=None) -> bool:
    x1, x2 = competition_xstar(p) if xstar is None else xstar
    return (p.kappa1 * p.kappa2 < p.alpha1 * p.alpha2
            and p.kappa1 * x1 < p.alpha2 * x2 and p.kappa2 * x2 < p.alpha1 * x1)


def competition_equilibria(p: CompetitionParams) -> EquilibriumSet:
    """E0, E1, E2 and the coexistence equilibrium Ec with existence flags."""
    det = p.kappa1 * p.kappa2 - p.alpha1 * p.alpha2
    if det == 0.0:
        raise MarginalCaseError("kappa1*kappa2 == alpha1*alpha2: coexistence equilibria form a line")
    s1, s2 = p.species(1), p.species(2)
    r1, r2 = madde_equilibrium(s1), madde_equilibrium(s2)
    x1, x2 = r1.value, r2.value
    eqs = [Equilibrium("E0", (0.0, 0.0), 0.0, True),
           Equilibrium("E1", (x1, 0.0), _competition_residual(p, x1, 0.0), r1.exists),
           Equilibrium("E2", (0.0, x2), _competition_residual(p, 0.0, x2), r2.exists)]
    x1c = p.kappa2 * (p.kappa1 * x1 - p.alpha2 * x2) / det
    x2c = p.kappa1 * (p.kappa2 * x2 - p.alpha1 * x1) / det
    note = ""
    exists = r1.exists and r2.exists and x1c > EXISTENCE_MARGIN and x2c > EXISTENCE_MARGIN
    if not (r1.exists and r2.exists):
        note = "a species is not viable (R0 <= 1)"
    elif not exists:
        if min(x1c, x2c) >= -EXISTENCE_MARGIN:
            note = "degenerate: a coexistence component is zero"
        else:
            note = "a coexistence component is negative"
    resid = _competition_residual(p, x1c, x2c) if exists else float("nan")
    eqs.append(Equilibrium("Ec", (x1c, x2c), resid, exists, note))
    return EquilibriumSet(
        "competition", eqs,
        r0=(r0_single(p.gamma1, p.mu1, p.tau1), r0_single(p.gamma2, p.mu2, p.tau2)),
        tau_h=(tau_h(p.gamma1, p.mu1), tau_h(p.gamma2, p.mu2)),
        K=(carrying_capacity(p.gamma1, p.mu1, p.kappa1, p.tau1),
           carrying_capacity(p.gamma2, p.mu2, p.kappa2, p.tau2)),
        xstar=(x1, x2),
        extra={"H_S": weak_competition(p, (x1, x2)), "H_U": strong_competition(p, (x1, x2))},
    )


def ec_linear_residual(p: CompetitionParams, ec, xstar) -> float:
    """Residual of the linear system tying Ec to the single-species equilibria."""
    x1c, x2c = ec
    x1, x2 = xstar
    return max(abs(p.kappa1 * x1c + p.alpha2 * x2c - p.kappa1 * x1),
               abs(p.alpha1 * x1c + p.kappa2 * x2c - p.kappa2 * x2))
