"""Characteristic functions, argument-principle root counts and equilibrium verdicts.

Verdicts come from closed-form criteria first.  Each is then checked by
counting the roots of the assembled characteristic function in the rectangle
``[0, L] x [-B, B]``.  When the two disagree the criterion is kept and a
:class:`StabilityDiscrepancyWarning` is emitted.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .equilibria import EquilibriumSet
from .errors import InconclusiveError
from .models import CompetitionParams, HutchinsonParams, SingleParams

__all__ = [
    "StabilityVerdict", "Block", "StabilityDiscrepancyWarning", "window_kernel",
    "char_single", "char_madde_zero", "char_adde", "char_hutchinson", "char_competition",
    "char_competition_blocks", "count_unstable_roots", "default_rectangle",
    "characteristic_function", "classify", "hutchinson_hopf_tau",
]

SERIES_CUTOFF = 1e-4
CONTOUR_SPACING = 0.01
MAX_CONTOUR_POINTS = 1_000_000


class StabilityDiscrepancyWarning(UserWarning):
    pass


@dataclass
class StabilityVerdict:
    label: str
    classification: str  # "stable" | "unstable" | "marginal/unknown"
    unstable_root_count: int | None
    search_rectangle: tuple[float, float]
    analytic_rule_applied: str
    discrepancy: bool = False
    note: str = ""


def window_kernel(lam, tau: float):
    """``(exp(-lam*tau) - 1) / lam`` with its removable singularity at 0 filled in."""
    lam = np.asarray(lam, dtype=complex)
    if tau == 0:
        return np.zeros_like(lam)
    x = lam * tau
    small = np.abs(x) < SERIES_CUTOFF
    safe = np.where(small, 1.0, lam)
    series = -tau + lam * tau ** 2 / 2 - lam ** 2 * tau ** 3 / 6
    return np.where(small, series, np.expm1(-x) / safe)


def char_single(p: SingleParams, x_bar: float, lam):
    """Characteristic function of the single-species model at a constant ``x_bar``.

    Written for ``kappa = 1`` after the substitution ``x -> kappa*x``; ``x_bar``
    is in the original units and is rescaled here.
    """
    u = p.kappa * x_bar
    lam = np.asarray(lam, dtype=complex)
    g = p.gamma * math.exp(-p.tau * (p.mu + u))
    return g * (np.exp(-lam * p.tau) + u * window_kernel(lam, p.tau)) - p.mu - 2 * u - lam


def char_madde_zero(p: SingleParams, lam):
    lam = np.asarray(lam, dtype=complex)
    return p.gamma * math.exp(-p.tau * p.mu) * np.exp(-lam * p.tau) - p.mu - lam


def char_adde(p: SingleParams, x_bar: float, lam):
    """Linearisation of the Arino et al. model at ``x_bar``: ``a*exp(-lam*tau) - mu - 2*kappa*x_bar - lam``."""
    lam = np.asarray(lam, dtype=complex)
    e = math.exp(-p.mu * p.tau)
    den = p.mu + p.kappa * (1 - e) * x_bar
    gain = p.gamma * p.mu * p.mu * e / (den * den)
    return gain * np.exp(-lam * p.tau) - p.mu - 2 * p.kappa * x_bar - lam


def char_hutchinson(p: HutchinsonParams, x_bar: float, lam):
    """Hutchinson's equation linearised at ``0`` (``lam - r``) or at ``K_cap``."""
    lam = np.asarray(lam, dtype=complex)
    if x_bar == 0:
        return lam - p.r
    # general constant state: r(1 - x/K) - lam - r x/K exp(-lam tau)
    return p.r * (1 - x_bar / p.K_cap) - lam - p.r * x_bar / p.K_cap * np.exp(-lam * p.tau)


def char_competition(p: CompetitionParams, state, lam):
    """Determinant of the full 2x2 characteristic matrix at ``state = (x1, x2)``."""
    x1, x2 = state
    lam = np.asarray(lam, dtype=complex)
    m1 = p.mu1 + p.kappa1 * x1 + p.alpha2 * x2
    m2 = p.mu2 + p.alpha1 * x1 + p.kappa2 * x2
    g1 = p.gamma1 * math.exp(-p.tau1 * m1)
    g2 = p.gamma2 * math.exp(-p.tau2 * m2)
    w1 = window_kernel(lam, p.tau1)
    w2 = window_kernel(lam, p.tau2)
    a11 = (g1 * np.exp(-lam * p.tau1) - p.mu1 - 2 * p.kappa1 * x1 - p.alpha2 * x2
           + g1 * w1 * p.kappa1 * x1 - lam)
    a12 = -p.alpha2 * x1 + g1 * w1 * p.alpha2 * x1
    a21 = -p.alpha1 * x2 + g2 * w2 * p.alpha1 * x2
    a22 = (g2 * np.exp(-lam * p.tau2) - p.mu2 - p.alpha1 * x1 - 2 * p.kappa2 * x2
           + g2 * w2 * p.kappa2 * x2 - lam)
    return a11 * a22 - a12 * a21


@dataclass
class Block:
    """One factor of a factorised characteristic equation."""

    name: str
    kind: str  # "transcendental" or "quadratic"
    func: Callable
    coefficients: tuple | None = None

    def positive_roots(self) -> int | None:
        """Roots with positive real part, when the factor is a polynomial."""
        if self.coefficients is None:
            return None
        return int(sum(r.real > 0 for r in np.roots(self.coefficients)))


def char_competition_blocks(p: CompetitionParams, label: str, state) -> list[Block]:
    """Factorisation of the characteristic equation at E0, E1, E2 or Ec."""
    x1, x2 = state
    if label == "E0":
        return [Block(f"species {i} at 0", "transcendental",
                      (lambda lam, s=p.species(i): char_madde_zero(s, lam))) for i in (1, 2)]
    if label in ("E1", "E2"):
        i, j = (1, 2) if label == "E1" else (2, 1)
        xi = x1 if i == 1 else x2
        sj = p.species(j)
        # cross-effect of the resident on the absent species' death rate
        cross = (p.alpha1 if i == 1 else p.alpha2) * xi
        m = sj.mu + cross

        def invader(lam, sj=sj, m=m):
            lam = np.asarray(lam, dtype=complex)
            return sj.gamma * np.exp(-lam * sj.tau - sj.tau * m) - m - lam

        return [Block(f"species {i} at x{i}*", "transcendental",
                      (lambda lam, si=p.species(i), xi=xi: char_single(si, xi, lam))),
                Block(f"species {j} invading", "transcendental", invader)]
    if label == "Ec":
        m1 = p.mu1 + p.kappa1 * x1 + p.alpha2 * x2
        m2 = p.mu2 + p.alpha1 * x1 + p.kappa2 * x2
        coeffs = (1.0, p.kappa1 * x1 + p.kappa2 * x2,
                  x1 * x2 * (p.kappa1 * p.kappa2 - p.alpha1 * p.alpha2))
        return [
            Block("species 1 window", "transcendental",
                  (lambda lam, m=m1, t=p.tau1: m * window_kernel(lam, t) - 1)),
            Block("species 2 window", "transcendental",
                  (lambda lam, m=m2, t=p.tau2: m * window_kernel(lam, t) - 1)),
            Block("competition quadratic", "quadratic",
                  (lambda lam, c=coeffs: (np.asarray(lam, dtype=complex) ** 2
                                          + c[1] * np.asarray(lam, dtype=complex) + c[2])),
                  coeffs),
        ]
    raise ValueError(f"unknown competition equilibrium {label!r}")


def default_rectangle(rate_scale: float, tau: float) -> tuple[float, float]:
    """``(L, B)`` for the search rectangle ``[0, L] x [-B, B]``."""
    lam_max = max(10.0, 5.0 * rate_scale)
    b = max(50.0, 20.0 * math.pi / tau) if tau > 0 else 50.0
    return lam_max, b


def _contour(lam_max: float, b: float, n_points: int) -> np.ndarray:
    corners = [complex(0, -b), complex(lam_max, -b), complex(lam_max, b), complex(0, b)]
    lengths = [lam_max, 2 * b, lam_max, 2 * b]
    perim = sum(lengths)
    pts = []
    for k in range(4):
        a, c = corners[k], corners[(k + 1) % 4]
        n = max(16, int(round(n_points * lengths[k] / perim)))
        pts.append(a + (c - a) * np.arange(n) / n)
    return np.concatenate(pts)


def _winding(f: Callable, z: np.ndarray) -> tuple[float, float]:
    fz = f(z)
    h = 1e-6 * np.maximum(1.0, np.abs(z))
    df = (f(z + h) - f(z - h)) / (2 * h)
    with np.errstate(divide="ignore", invalid="ignore"):  # zeros on the contour are caught below
        g = df / fz
    z_next = np.roll(z, -1)
    g_next = np.roll(g, -1)
    integral = np.sum(0.5 * (g + g_next) * (z_next - z))
    return integral / (2j * math.pi), float(np.min(np.abs(fz)) / max(1.0, float(np.median(np.abs(fz)))))


def count_unstable_roots(charfn: Callable, rect: tuple[float, float], panels: int | None = None,
                         max_retries: int = 5, refinements: int = 3) -> int:
    """Number of zeros of ``charfn`` inside ``[0, L] x [-B, B]``.

    Trapezoid quadrature of ``f'/f`` around the rectangle, with ``f'`` from
    central differences.  A contour sample with ``|f|`` below ``1e-9`` of the
    typical magnitude inflates the rectangle by 10% (up to ``max_retries``
    times); a rounding residue above 0.1 doubles the panel count (up to
    ``refinements`` times) before giving up.
    """
    lam_max, b = rect
    for _ in range(max_retries + 1):
        n = panels or min(MAX_CONTOUR_POINTS, int(math.ceil(2 * (lam_max + 2 * b) / CONTOUR_SPACING)))
        w, closeness = _winding(charfn, _contour(lam_max, b, n))
        if closeness < 1e-9:
            lam_max, b = 1.1 * lam_max, 1.1 * b
            continue
        for _ in range(refinements + 1):
            count = round(w.real)
            residue = abs(w - count)
            if residue <= 0.1:
                return int(count)
            n *= 2
            w, _ = _winding(charfn, _contour(lam_max, b, n))
        raise InconclusiveError(f"winding number {w:.4f} not within 0.1 of an integer")
    raise InconclusiveError("characteristic function vanishes on the contour")


def hutchinson_hopf_tau(r: float) -> float:
    """Delay at which Hutchinson's equilibrium ``K`` loses stability: ``pi / (2r)``."""
    return math.pi / (2.0 * r)


def _rate_scale(model: str, p) -> float:
    if model == "hutchinson":
        return p.r
    if model == "competition":
        return max(p.gamma1 + p.mu1, p.gamma2 + p.mu2)
    return p.gamma + p.mu


def _min_tau(model: str, p) -> float:
    if model == "competition":
        pos = [t for t in (p.tau1, p.tau2) if t > 0]
        return min(pos) if pos else 0.0
    return p.tau


def characteristic_function(model: str, p, state) -> Callable:
    """The assembled (unfactorised) characteristic function at a constant state."""
    if model == "competition":
        return lambda lam: char_competition(p, state, lam)
    x = state[0]
    if model == "madde":
        return lambda lam: char_single(p, x, lam)
    if model == "adde":
        return lambda lam: char_adde(p, x, lam)
    if model == "hutchinson":
        return lambda lam: char_hutchinson(p, x, lam)
    raise ValueError(f"unknown model {model!r}")


def _compare(a: float, b: float, tol: float = 0.0) -> int:
    if a > b + tol:
        return 1
    if a < b - tol:
        return -1
    return 0


def _criterion(model: str, p, eq_set: EquilibriumSet, label: str, state) -> tuple[str, str]:
    """Closed-form verdict and a description of the rule used."""
    if model in ("madde", "adde") and label == "zero":
        c = _compare(eq_set.r0[0], 1.0)
        return {1: "unstable", -1: "stable", 0: "marginal/unknown"}[c], f"R0 = {eq_set.r0[0]:.6g} vs 1"
    if model == "madde" and label == "x*":
        return "stable", "R0 > 1: positive equilibrium locally asymptotically stable"
    if model == "adde" and label == "x*":
        x = state[0]
        e = math.exp(-p.mu * p.tau)
        den = p.mu + p.kappa * (1 - e) * x
        gain = p.gamma * p.mu * p.mu * e / (den * den)
        if gain < p.mu + 2 * p.kappa * x:
            return "stable", "delayed gain < instantaneous loss rate"
        return "marginal/unknown", "delayed gain >= instantaneous loss rate: no closed-form rule"
    if model == "hutchinson":
        if label == "zero":
            return "unstable", "real root lambda = r > 0"
        c = _compare(p.r * p.tau, math.pi / 2)
        return ({-1: "stable", 1: "unstable", 0: "marginal/unknown"}[c],
                f"r*tau = {p.r * p.tau:.6g} vs pi/2")
    if model == "competition":
        r1, r2 = eq_set.r0
        x1, x2 = eq_set.xstar
        if label == "E0":
            if r1 < 1 and r2 < 1:
                return "stable", "R0(1) < 1 and R0(2) < 1"
            if r1 > 1 or r2 > 1:
                return "unstable", "R0(1) > 1 or R0(2) > 1"
            return "marginal/unknown", "a species at R0 = 1"
        if label == "E1":
            c = _compare(p.alpha1 * x1, p.kappa2 * x2)
            return ({1: "stable", -1: "unstable", 0: "marginal/unknown"}[c],
                    "alpha1*x1* vs kappa2*x2*")
        if label == "E2":
            c = _compare(p.alpha2 * x2, p.kappa1 * x1)
            return ({1: "stable", -1: "unstable", 0: "marginal/unknown"}[c],
                    "alpha2*x2* vs kappa1*x1*")
        if label == "Ec":
            if eq_set.extra.get("H_S"):
                return "stable", "weak competition (H_S)"
            if eq_set.extra.get("H_U"):
                return "unstable", "strong competition (H_U)"
            return "marginal/unknown", "neither (H_S) nor (H_U)"
    raise ValueError(f"no stability rule for {model!r} equilibrium {label!r}")


def classify(model: str, p, eq_set: EquilibriumSet, rect: tuple[float, float] | None = None,
             cross_check: bool = True, panels: int | None = None) -> list[StabilityVerdict]:
    """Stability verdicts for every existing equilibrium in ``eq_set``."""
    if rect is None:
        rect = default_rectangle(_rate_scale(model, p), _min_tau(model, p))
    verdicts = []
    for eq in eq_set.existing():
        verdict, rule = _criterion(model, p, eq_set, eq.label, eq.state)
        count = None
        note = ""
        discrepancy = False
        if cross_check:
            try:
                count = count_unstable_roots(characteristic_function(model, p, eq.state), rect, panels)
            except InconclusiveError as exc:
                note = f"root count inconclusive: {exc}"
            if count is not None:
                counted = "stable" if count == 0 else "unstable"
                if verdict == "marginal/unknown" and "no closed-form rule" in rule:
                    verdict = counted
                    rule += "; decided by root count"
                elif verdict != "marginal/unknown" and counted != verdict:
                    discrepancy = True
                    note = f"root count {count} contradicts closed-form verdict {verdict!r}"
                    warnings.warn(f"{model} {eq.label}: {note}", StabilityDiscrepancyWarning, stacklevel=2)
        verdicts.append(StabilityVerdict(eq.label, verdict, count, tuple(rect), rule, discrepancy, note))
    return verdicts
