"""Region maps of the (tau1, tau2) plane and equilibrium branches in tau.

Competition outcomes are labelled

* ``A``: species 1 wins (E1 stable, E2 unstable, or only species 1 viable);
* ``B``: species 2 wins;
* ``C``: the two comparisons agree in sign, so there is coexistence under weak
  competition or bistability under strong competition;
* ``D``: neither species viable.

A label is ``boundary`` when a deciding comparison is within ``BOUNDARY_TOL``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .equilibria import (adde_equilibrium, adde_residual, madde_equilibrium, madde_residual,
                         r0_single, root_bisect, single_equilibria, tau_h)
from .models import CompetitionParams, HutchinsonParams, SingleParams
from .stability import classify, hutchinson_hopf_tau

__all__ = [
    "RegionLabel", "RegionMap", "BranchPoint", "BranchDiagram", "BOUNDARY_TOL",
    "classify_region", "scan_grid", "branch_single", "write_region_csv", "write_branch_csv",
    "write_boundary_csv",
    "REGION_COLUMNS", "BRANCH_COLUMNS",
]

BOUNDARY_TOL = 1e-9
REGION_COLUMNS = ("tau1", "tau2", "label", "R0_1", "R0_2", "d1", "d2")
BRANCH_COLUMNS = ("tau", "value", "stability", "model", "branch")


@dataclass(frozen=True)
class RegionLabel:
    label: str
    R0_1: float
    R0_2: float
    d1: float  # alpha1*x1* - kappa2*x2*  (> 0: E1 resists invasion)
    d2: float  # alpha2*x2* - kappa1*x1*  (> 0: E2 resists invasion)

    @property
    def conditions_evaluated(self) -> tuple[float, float, float, float]:
        return (self.R0_1, self.R0_2, self.d1, self.d2)


def _single_xstar(gamma, mu, kappa, tau) -> float:
    return madde_equilibrium(SingleParams(gamma, mu, kappa, tau)).value


def _label(r1: float, r2: float, d1: float, d2: float, tol: float = BOUNDARY_TOL) -> str:
    if abs(r1 - 1.0) <= tol or abs(r2 - 1.0) <= tol:
        return "boundary"
    v1, v2 = r1 > 1.0, r2 > 1.0
    if not v1 and not v2:
        return "D"
    if v1 and not v2:
        return "A"
    if v2 and not v1:
        return "B"
    if abs(d1) <= tol or abs(d2) <= tol:
        return "boundary"
    if d1 > 0 > d2:
        return "A"
    if d2 > 0 > d1:
        return "B"
    return "C"


def _conditions(p: CompetitionParams, x1: float, x2: float) -> tuple[float, float, float, float]:
    return (r0_single(p.gamma1, p.mu1, p.tau1), r0_single(p.gamma2, p.mu2, p.tau2),
            p.alpha1 * x1 - p.kappa2 * x2, p.alpha2 * x2 - p.kappa1 * x1)


def classify_region(p: CompetitionParams) -> RegionLabel:
    """Outcome label of the competition model at the delays stored in ``p``."""
    x1 = _single_xstar(p.gamma1, p.mu1, p.kappa1, p.tau1)
    x2 = _single_xstar(p.gamma2, p.mu2, p.kappa2, p.tau2)
    r1, r2, d1, d2 = _conditions(p, x1, x2)
    return RegionLabel(_label(r1, r2, d1, d2), r1, r2, d1, d2)


@dataclass
class RegionMap:
    """Labels on a ``tau1 x tau2`` grid; ``labels[i][j]`` is at ``(tau1[i], tau2[j])``."""

    tau1: np.ndarray
    tau2: np.ndarray
    labels: list[list[RegionLabel]]
    boundaries: dict[str, list[tuple[float, float]]] = field(default_factory=dict)

    def cells(self):
        """``(tau1, tau2, RegionLabel)`` in row-major order."""
        for i, a in enumerate(self.tau1):
            for j, b in enumerate(self.tau2):
                yield float(a), float(b), self.labels[i][j]

    def label_grid(self) -> np.ndarray:
        return np.array([[c.label for c in row] for row in self.labels], dtype=object)


def _boundary_functions(p: CompetitionParams):
    x1 = lambda t1: _single_xstar(p.gamma1, p.mu1, p.kappa1, t1)  # noqa: E731
    x2 = lambda t2: _single_xstar(p.gamma2, p.mu2, p.kappa2, t2)  # noqa: E731
    return {
        "R0_1": lambda t1, t2: r0_single(p.gamma1, p.mu1, t1) - 1.0,
        "R0_2": lambda t1, t2: r0_single(p.gamma2, p.mu2, t2) - 1.0,
        "d1": lambda t1, t2: p.alpha1 * x1(t1) - p.kappa2 * x2(t2),
        "d2": lambda t1, t2: p.alpha2 * x2(t2) - p.kappa1 * x1(t1),
    }


def _trace(g, t1: np.ndarray, t2: np.ndarray, values: np.ndarray, keep) -> list[tuple[float, float]]:
    """Zero crossings of ``g`` on the grid edges, located by bisection."""
    pts = set()
    n1, n2 = values.shape
    for i in range(n1):
        for j in range(n2):
            v = values[i, j]
            if v == 0.0:
                pts.add((float(t1[i]), float(t2[j])))
                continue
            if i + 1 < n1 and v * values[i + 1, j] < 0:
                b = float(t2[j])
                s = root_bisect(lambda a: g(a, b), float(t1[i]), float(t1[i + 1]))
                pts.add((s, b))
            if j + 1 < n2 and v * values[i, j + 1] < 0:
                a = float(t1[i])
                s = root_bisect(lambda b: g(a, b), float(t2[j]), float(t2[j + 1]))
                pts.add((a, s))
    return sorted(pt for pt in pts if keep(*pt) and abs(g(*pt)) <= 1e-8)


def scan_grid(p: CompetitionParams, tau1_range=(0.0, 3.0), tau2_range=(0.0, 3.0), n: int = 200,
              boundaries: bool = True) -> RegionMap:
    """Label an ``n x n`` grid and trace the four boundary curves.

    The boundary polylines are ``R0_1 = 1``, ``R0_2 = 1``, ``d1 = 0`` and
    ``d2 = 0``.  The comparison curves are only kept where both species are
    viable; elsewhere both sides vanish identically.
    """
    if n < 1:
        raise ValueError("grid size must be >= 1")
    t1 = np.linspace(*tau1_range, n)
    t2 = np.linspace(*tau2_range, n)
    # x_i* depends on tau_i only, so solve once per grid line
    x1 = [_single_xstar(p.gamma1, p.mu1, p.kappa1, float(a)) for a in t1]
    x2 = [_single_xstar(p.gamma2, p.mu2, p.kappa2, float(b)) for b in t2]
    labels = []
    raw = np.empty((4, n, n))
    for i, a in enumerate(t1):
        row = []
        for j, b in enumerate(t2):
            q = p.with_taus(float(a), float(b))
            r1, r2, d1, d2 = _conditions(q, x1[i], x2[j])
            raw[:, i, j] = (r1 - 1.0, r2 - 1.0, d1, d2)
            row.append(RegionLabel(_label(r1, r2, d1, d2), r1, r2, d1, d2))
        labels.append(row)
    result = RegionMap(t1, t2, labels)
    if boundaries and n > 1:
        fns = _boundary_functions(p)
        th1, th2 = tau_h(p.gamma1, p.mu1), tau_h(p.gamma2, p.mu2)
        both_viable = lambda a, b: a < th1 and b < th2  # noqa: E731
        anywhere = lambda a, b: True  # noqa: E731
        for k, name in enumerate(("R0_1", "R0_2", "d1", "d2")):
            keep = anywhere if name.startswith("R0") else both_viable
            result.boundaries[name] = _trace(fns[name], t1, t2, raw[k], keep)
    return result


@dataclass(frozen=True)
class BranchPoint:
    tau: float
    equilibrium_value: float
    stability: str  # "stable" | "unstable" | "marginal/unknown"
    model: str
    branch: str = "interior"  # "interior" | "zero"
    residual: float = 0.0


@dataclass
class BranchDiagram:
    model: str
    points: list[BranchPoint]
    transcritical_tau: float | None
    hopf_tau: float | None = None

    def branch(self, name: str) -> list[BranchPoint]:
        return [b for b in self.points if b.branch == name]


def _verdicts(model: str, p) -> dict[str, str]:
    eqs = single_equilibria(model, p)
    out = {v.label: v.classification for v in classify(model, p, eqs, cross_check=False)}
    if any(v == "marginal/unknown" for v in out.values()):
        # fall back to an explicit root count where no closed-form rule decides
        out = {v.label: v.classification for v in classify(model, p, eqs, cross_check=True)}
    return out


def branch_single(model: str, params, taus) -> BranchDiagram:
    """Zero and interior equilibrium branches of a single-species model over ``taus``.

    ``params`` is a :class:`SingleParams` (``madde``/``adde``) or a
    :class:`HutchinsonParams`; its own ``tau`` is ignored.
    """
    pts: list[BranchPoint] = []
    for tau in taus:
        tau = float(tau)
        q = params.with_tau(tau)
        verdict = _verdicts(model, q)
        pts.append(BranchPoint(tau, 0.0, verdict["zero"], model, "zero"))
        if model == "hutchinson":
            pts.append(BranchPoint(tau, q.K_cap, verdict["K"], model, "interior"))
            continue
        root = madde_equilibrium(q) if model == "madde" else adde_equilibrium(q)
        if root.exists:
            res = abs((madde_residual if model == "madde" else adde_residual)(q, root.value))
            pts.append(BranchPoint(tau, root.value, verdict["x*"], model, "interior", res))
    if model == "hutchinson":
        if not isinstance(params, HutchinsonParams):
            raise TypeError("hutchinson branches need HutchinsonParams")
        return BranchDiagram(model, pts, None, hutchinson_hopf_tau(params.r))
    if model not in ("madde", "adde"):
        raise ValueError(f"no single-species branch for model {model!r}")
    return BranchDiagram(model, pts, tau_h(params.gamma, params.mu) if params.gamma > params.mu else None)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def write_region_csv(region: RegionMap, fh, header: str | None = None) -> None:
    if header:
        fh.write(header.rstrip("\n") + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REGION_COLUMNS)
    for a, b, lab in region.cells():
        w.writerow([_fmt(a), _fmt(b), lab.label, _fmt(lab.R0_1), _fmt(lab.R0_2), _fmt(lab.d1), _fmt(lab.d2)])


def write_boundary_csv(region: RegionMap, fh, header: str | None = None) -> None:
    if header:
        fh.write(header.rstrip("\n") + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("curve", "tau1", "tau2"))
    for name in sorted(region.boundaries):
        for a, b in region.boundaries[name]:
            w.writerow([name, _fmt(a), _fmt(b)])


def write_branch_csv(diagram: BranchDiagram, fh, header: str | None = None) -> None:
    if header:
        fh.write(header.rstrip("\n") + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(BRANCH_COLUMNS)
    for b in diagram.points:
        w.writerow([_fmt(b.tau), _fmt(b.equilibrium_value), b.stability, b.model, b.branch])
