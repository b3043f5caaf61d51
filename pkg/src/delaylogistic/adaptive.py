"""Invasion analysis and the evolutionarily stable delay.

With a growth/delay trade-off ``gamma(tau) = gamma0 * (1 + c*tau)`` and the
competition coefficient scaled to one, the equilibrium density ``x*(tau)``
solves ``gamma0*(1 + c*tau)*exp(-tau*(mu + x)) = mu + x``.  A mutant delay
invades a resident exactly when it gives the larger ``x*``, so the ESS is the
maximiser of ``x*`` over ``[0, tau_H]``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import golden

from .equilibria import Root, madde_equilibrium, root_bisect
from .models import CompetitionParams, SingleParams

__all__ = [
    "TradeoffParams", "ESSResult", "invasion_exponent", "competition_invasion_exponent",
    "xstar_tradeoff", "dxstar_dtau", "tau_h_tradeoff", "ess_tau", "write_ess_csv",
    "ESS_SAMPLES", "ESS_TOL",
]

ESS_SAMPLES = 1000
ESS_TOL = 1e-8
_FLAT = 1e-6


@dataclass(frozen=True)
class TradeoffParams:
    """``gamma0`` baseline growth, ``c`` trade-off slope, ``mu`` death rate (kappa = 1)."""

    gamma0: float
    c: float
    mu: float

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be positive, got {self.mu!r}")
        if not (self.gamma0 > self.mu and math.isfinite(self.gamma0)):
            raise ValueError(f"need gamma0 > mu for a positive threshold delay, got gamma0={self.gamma0!r}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError(f"c must be positive, got {self.c!r}")

    def growth(self, tau: float) -> float:
        return self.gamma0 * (1.0 + self.c * tau)

    def as_single(self, tau: float) -> SingleParams:
        return SingleParams(self.growth(tau), self.mu, 1.0, tau)


def invasion_exponent(resident: SingleParams, mutant: SingleParams, alpha1: float) -> float:
    """Growth rate ``kappa2*x2* - alpha1*x1*`` of a rare mutant at the resident's equilibrium.

    ``resident`` plays species 1 and ``mutant`` species 2 (its ``kappa`` is
    ``kappa2``); ``alpha1`` is the resident's competitive effect on the mutant.
    Positive means the mutant invades.
    """
    x1 = madde_equilibrium(resident).value
    x2 = madde_equilibrium(mutant).value
    return mutant.kappa * x2 - alpha1 * x1


def competition_invasion_exponent(p: CompetitionParams) -> float:
    """:func:`invasion_exponent` with species 2 of ``p`` invading species 1."""
    return invasion_exponent(p.species(1), p.species(2), p.alpha1)


def tau_h_tradeoff(tp: TradeoffParams) -> float:
    """Delay at which ``gamma0*(1 + c*tau)*exp(-mu*tau)`` falls to ``mu``."""
    h = lambda t: tp.growth(t) * math.exp(-tp.mu * t) - tp.mu  # noqa: E731
    hi = 1.0
    while h(hi) > 0:
        hi *= 2.0
    return root_bisect(h, 0.0, hi)


def xstar_tradeoff(tp: TradeoffParams, tau: float) -> Root:
    """Positive equilibrium under the trade-off; ``exists`` iff ``tau < tau_H``."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return madde_equilibrium(tp.as_single(tau))


def dxstar_dtau(tp: TradeoffParams, tau: float, x: float | None = None) -> float:
    """Implicit derivative of ``x*(tau)``.

    ``gamma0*E*(c - (1 + c*tau)*(mu + x)) / (1 + gamma0*(1 + c*tau)*tau*E)``
    with ``E = exp(-tau*(mu + x))``.  The numerator carries the sign; at
    ``tau = 0`` it is ``gamma0*(c - gamma0)``.
    """
    if x is None:
        x = xstar_tradeoff(tp, tau).value
    e = math.exp(-tau * (tp.mu + x))
    num = tp.gamma0 * e * (tp.c - (1.0 + tp.c * tau) * (tp.mu + x))
    return num / (1.0 + tp.growth(tau) * tau * e)


@dataclass
class ESSResult:
    tau_star: float
    xstar: float
    tau_h: float
    kind: str  # "interior-max" | "boundary-zero"
    dxstar_at_star: float
    sign_changes: int
    grid_tau: np.ndarray
    grid_xstar: np.ndarray
    grid_dxstar: np.ndarray


def ess_tau(tp: TradeoffParams, samples: int = ESS_SAMPLES, tol: float = ESS_TOL) -> ESSResult:
    """Global maximiser of ``x*(tau)`` on ``[0, tau_H]``.

    Sample ``samples`` points, then refine around the best sample by golden
    section.  The sign changes of the derivative on the grid are counted so
    that multimodal curves are visible to the caller.
    """
    th = tau_h_tradeoff(tp)
    grid = np.linspace(0.0, th, samples)
    xs = np.array([xstar_tradeoff(tp, float(t)).value for t in grid])
    ds = np.array([dxstar_dtau(tp, float(t), float(x)) for t, x in zip(grid, xs)])
    signs = np.sign(ds[np.abs(ds) > 0])
    changes = int(np.count_nonzero(signs[1:] != signs[:-1]))
    k = int(np.argmax(xs))
    neg = lambda t: -xstar_tradeoff(tp, min(max(t, 0.0), th)).value  # noqa: E731
    if k == 0:
        t_star = 0.0
        if ds[0] > 0:  # rising at 0 but peak narrower than the grid spacing
            t_star = float(golden(neg, brack=(0.0, float(grid[1])), tol=tol))
    else:
        t_star = float(golden(neg, brack=(float(grid[k - 1]), float(grid[k]), float(grid[k + 1])), tol=tol))
    t_star = min(max(t_star, 0.0), th)
    x_star = xstar_tradeoff(tp, t_star).value
    d_star = dxstar_dtau(tp, t_star, x_star)
    if t_star > _FLAT and abs(d_star) <= _FLAT:
        kind = "interior-max"
    else:
        kind = "boundary-zero"
        t_star, x_star, d_star = 0.0, float(xs[0]), float(ds[0])
    return ESSResult(t_star, x_star, th, kind, d_star, changes, grid, xs, ds)


def write_ess_csv(res: ESSResult, fh, header: str | None = None) -> None:
    """Sampled curve as ``tau, xstar, dxstar`` rows, then one ``# summary`` row."""
    if header:
        fh.write(header.rstrip("\n") + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("tau", "xstar", "dxstar"))
    for t, x, d in zip(res.grid_tau, res.grid_xstar, res.grid_dxstar):
        w.writerow([repr(float(t)), repr(float(x)), repr(float(d))])
    fh.write(f"# summary tau_star={res.tau_star!r} tau_H={res.tau_h!r} kind={res.kind} "
             f"xstar={res.xstar!r} sign_changes={res.sign_changes}\n")
