"""Post-processing checks on simulated trajectories.

* :func:`lyapunov_series` evaluates ``Y = gamma*exp(-mu*tau - kappa*z) - mu - kappa*x``
  along a MADDE run, where ``z`` is the running window integral.  Along exact
  solutions ``Y' = -kappa*x*Y``, so ``|Y|`` can only shrink and ``Y`` never
  changes sign.
* :func:`convergence_report` decides whether a run settled on a target state,
  is oscillating, or is still undecided.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .history import DenseSolution
from .models import SingleParams

__all__ = [
    "ConvergenceReport", "lyapunov_series", "lyapunov_monotone", "convergence_report",
    "oscillation_amplitude", "count_peaks", "report_record", "write_reports_csv",
    "write_reports_json", "DEFAULT_TOL", "OSCILLATION_FLOOR", "DECAY_FRACTION",
]

DEFAULT_TOL = 1e-4
OSCILLATION_FLOOR = 1e-2
DECAY_FRACTION = 0.05
MIN_PEAKS = 3


def _sample_times(t0: float, t1: float, dt: float) -> np.ndarray:
    n = int(math.floor((t1 - t0) / dt + 1e-9))
    ts = t0 + dt * np.arange(n + 1)
    if t1 - ts[-1] > 1e-9 * max(1.0, t1):
        ts = np.append(ts, t1)
    return ts


def lyapunov_series(sol: DenseSolution, p: SingleParams, dt: float) -> np.ndarray:
    """``(t, Y(t))`` pairs on ``[0, t_end]`` as an ``(n, 2)`` array."""
    if sol.n_aux < 1:
        raise ValueError("solution carries no window integral; was it produced by the madde model?")
    if dt <= 0:
        raise ValueError("dt must be positive")
    ts = _sample_times(max(0.0, sol.t_start), sol.t_end, dt)
    base = -p.mu * p.tau
    out = np.empty((ts.size, 2))
    for k, t in enumerate(ts):
        x = sol.eval(t)[0]
        z = sol.eval_aux(t)[0]
        out[k] = t, p.gamma * math.exp(base - p.kappa * z) - p.mu - p.kappa * x
    return out


def lyapunov_monotone(series: np.ndarray, slack: float = 1e-9) -> bool:
    """True when ``|Y|`` never grows by more than ``slack`` between samples."""
    a = np.abs(series[:, 1])
    return bool(np.all(a[1:] <= a[:-1] + slack))


def _window(sol: DenseSolution, fraction: float) -> tuple[np.ndarray, np.ndarray, float]:
    if not (0 < fraction <= 1):
        raise ValueError("window fraction must be in (0, 1]")
    t1 = sol.t_end
    t0 = t1 - fraction * (t1 - sol.t_start)
    ts = sol.knot_times
    mask = ts >= t0 - 1e-12
    return ts[mask], sol.knot_states[mask][:, :sol.dim], t0


def oscillation_amplitude(sol: DenseSolution, window: float | tuple[float, float] = 0.2) -> np.ndarray:
    """Per-component ``max - min`` over the solution knots in a window.

    ``window`` is either a fraction of the run (the final part) or an explicit
    ``(t0, t1)`` interval.  Knots sit one integration step apart.
    """
    if isinstance(window, tuple):
        t0, t1 = window
        ts = sol.knot_times
        mask = (ts >= t0) & (ts <= t1)
        xs = sol.knot_states[mask][:, :sol.dim]
    else:
        _, xs, _ = _window(sol, float(window))
    if xs.size == 0:
        return np.zeros(sol.dim)
    return xs.max(axis=0) - xs.min(axis=0)


def count_peaks(values: np.ndarray) -> int:
    """Strict interior local maxima of a sampled signal."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return 0
    return int(np.count_nonzero((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])))


@dataclass
class ConvergenceReport:
    target: tuple
    terminal_state: tuple
    terminal_distance: float
    oscillation_amplitude: float
    window: tuple[float, float]
    verdict: str  # "converged" | "oscillating" | "undecided"
    peaks: int = 0


def convergence_report(sol: DenseSolution, target, window_fraction: float = 0.2,
                       tol: float = DEFAULT_TOL) -> ConvergenceReport:
    """Classify the tail of a run relative to ``target``.

    Converged: terminal distance and final-window amplitude both ``<= tol``.
    Oscillating: amplitude ``>= max(10*tol, 1e-2)``, the second half of the
    window has not lost 5% or more of the first half's amplitude, and the
    swing repeats at least three times.
    """
    target = tuple(float(v) for v in np.atleast_1d(target))
    if len(target) != sol.dim:
        raise ValueError(f"target has {len(target)} components, solution has {sol.dim}")
    ts, xs, t0 = _window(sol, window_fraction)
    terminal = tuple(float(v) for v in sol.eval(sol.t_end))
    dist = max(abs(a - b) for a, b in zip(terminal, target))
    amps = xs.max(axis=0) - xs.min(axis=0)
    amp = float(amps.max())
    k = int(np.argmax(amps))
    peaks = count_peaks(xs[:, k])
    verdict = "undecided"
    if dist <= tol and amp <= tol:
        verdict = "converged"
    elif amp >= max(10 * tol, OSCILLATION_FLOOR) and peaks >= MIN_PEAKS:
        mid = 0.5 * (t0 + sol.t_end)
        first, second = xs[ts < mid, k], xs[ts >= mid, k]
        a1 = float(first.max() - first.min()) if first.size else 0.0
        a2 = float(second.max() - second.min()) if second.size else 0.0
        if a2 >= (1.0 - DECAY_FRACTION) * a1:
            verdict = "oscillating"
    return ConvergenceReport(target, terminal, dist, amp, (t0, sol.t_end), verdict, peaks)


def report_record(report: ConvergenceReport, **params) -> dict:
    """Flat record of a report plus the run's parameters, for CSV/JSON output."""
    rec = dict(params)
    d = asdict(report)
    rec.update(verdict=d["verdict"], terminal_distance=d["terminal_distance"],
               amplitude=d["oscillation_amplitude"], peaks=d["peaks"],
               window_start=d["window"][0], window_end=d["window"][1])
    for i, v in enumerate(report.terminal_state, 1):
        rec[f"terminal_x{i}"] = v
    for i, v in enumerate(report.target, 1):
        rec[f"target_x{i}"] = v
    return rec


def write_reports_csv(records: list[dict], fh, header: str | None = None) -> None:
    if header:
        fh.write(header.rstrip("\n") + "\n")
    cols: list[str] = []
    for r in records:
        cols += [c for c in r if c not in cols]
    w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def write_reports_json(records: list[dict], fh, provenance: dict | None = None) -> None:
    json.dump({"provenance": provenance or {}, "runs": records}, fh, indent=2, sort_keys=True)
    fh.write("\n")
