"""Command-line entry point: ``delaylogistic <command> [options]``.

Commands: ``simulate``, ``equilibria``, ``stability``, ``bifurcate``, ``ess``
and ``reproduce-figure``.  Every file written starts with a ``#`` provenance
line (tool version, command, model, parameters, step, t_end) and the output
is a deterministic function of the arguments.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import os
import sys
from dataclasses import asdict, fields

import numpy as np

from . import __version__
from . import adaptive, bifurcation, diagnostics, equilibria, stability
from .errors import BlowUpError, ConfigurationError, InconclusiveError, MarginalCaseError
from .history import InitialHistory
from .integrator import IntegratorConfig, aligned_step, integrate, model_system
from .models import (FIG4_PARAMS, FIG4_PARAMS_GROWTH_SWAPPED, FIG5_PARAMS, FIG5_PARAMS_GROWTH_SWAPPED,
                     FIG6_HUTCHINSON, FIG6_PARAMS, MODEL_IDS, CompetitionParams, HutchinsonParams,
                     SingleParams)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
FIGURES = ("3", "4", "5", "6", "7")

PRESETS = {
    "fig4": FIG4_PARAMS, "fig5": FIG5_PARAMS,
    "fig4-swapped": FIG4_PARAMS_GROWTH_SWAPPED, "fig5-swapped": FIG5_PARAMS_GROWTH_SWAPPED,
    "fig6": FIG6_PARAMS, "fig6-hutchinson": FIG6_HUTCHINSON,
}
_ALIASES = {"K": "K_cap", "k": "K_cap"}

# published test points: (tau1, tau2, initial history, reported attractor)
FIG4_TEST_POINTS = (
    (1.0, 1.5, (0.8, 0.1), "E1"), (1.0, 1.5, (0.1, 0.8), "E2"),
    (1.0, 2.0, (0.8, 0.1), "E1"), (1.0, 2.0, (0.1, 0.8), "E1"),
    (1.5, 1.0, (0.8, 0.1), "E2"), (1.5, 1.0, (0.1, 0.8), "E2"),
)
FIG5_TEST_POINTS = ((1.0, 1.0, (0.8, 0.8), "Ec"),)


# ----------------------------------------------------------------------------
# parameter handling

def parse_param_text(text: str) -> dict:
    """``key=value`` pairs (newline/comma separated, ``#`` comments) or a JSON object."""
    s = text.strip()
    if s.startswith("{"):
        try:
            data = json.loads(s)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON parameters: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigurationError("JSON parameters must be an object")
        return {str(k): data[k] for k in data}
    out = {}
    for line in s.splitlines():
        line = line.split("#", 1)[0]
        for item in line.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                raise ConfigurationError(f"expected key=value, got {item!r}")
            k, v = (t.strip() for t in item.split("=", 1))
            out[k] = v
    return out


def _to_float(key, v) -> float:
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigurationError(f"parameter {key!r} is not a number: {v!r}") from None
    if not math.isfinite(x):
        raise ConfigurationError(f"parameter {key!r} must be finite")
    return x


def _params_class(model: str):
    return {"madde": SingleParams, "adde": SingleParams, "hutchinson": HutchinsonParams,
            "competition": CompetitionParams}[model]


def load_params(model: str, spec: str | None, growth_swapped: bool = False):
    """Build the parameter record for ``model`` from a preset, file or inline text."""
    cls = _params_class(model)
    if spec is None:
        if model in ("madde", "adde"):
            spec = "fig6"
        elif model == "hutchinson":
            spec = "fig6-hutchinson"
        else:
            raise ConfigurationError("the competition model needs --params (file, key=value list or fig4/fig5)")
    if spec in PRESETS:
        key = spec + ("-swapped" if growth_swapped and spec in ("fig4", "fig5") else "")
        p = PRESETS[key]
        if not isinstance(p, cls):
            raise ConfigurationError(f"preset {spec!r} does not fit model {model!r}")
        return p
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            raw = parse_param_text(fh.read())
    elif "=" in spec or spec.strip().startswith("{"):
        raw = parse_param_text(spec)
    else:
        raise ConfigurationError(f"--params {spec!r}: no such file or preset ({', '.join(PRESETS)})")
    names = {f.name for f in fields(cls)}
    kwargs = {}
    for k, v in raw.items():
        k = _ALIASES.get(k, k) if cls is HutchinsonParams else k
        if k not in names:
            raise ConfigurationError(f"unknown parameter {k!r} for model {model!r}; expected {sorted(names)}")
        kwargs[k] = _to_float(k, v)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(f"incomplete parameters for {model!r}: {exc}") from None
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def apply_delays(model: str, p, args):
    if model == "competition":
        t1 = p.tau1 if args.tau1 is None else args.tau1
        t2 = p.tau2 if args.tau2 is None else args.tau2
        if args.tau is not None:
            raise ConfigurationError("use --tau1/--tau2 for the competition model")
        return _checked(lambda: p.with_taus(t1, t2))
    if args.tau1 is not None or args.tau2 is not None:
        raise ConfigurationError(f"--tau1/--tau2 apply to the competition model, use --tau for {model!r}")
    return p if args.tau is None else _checked(lambda: p.with_tau(args.tau))


def _checked(fn):
    try:
        return fn()
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def _floats(text: str, n: int | None = None, what: str = "value") -> tuple[float, ...]:
    vals = tuple(_to_float(what, v) for v in text.split(","))
    if n is not None and len(vals) != n:
        raise ConfigurationError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    return vals


def params_text(p) -> str:
    return ",".join(f"{k}={v!r}" for k, v in asdict(p).items())


def provenance(command: str, model: str | None = None, params=None, step=None, t_end=None,
               **extra) -> str:
    parts = [f"# delaylogistic {__version__}", f"command={command}"]
    if model is not None:
        parts.append(f"model={model}")
    if params is not None:
        parts.append("params=" + (params if isinstance(params, str) else params_text(params)))
    if step is not None:
        parts.append(f"step={step!r}")
    if t_end is not None:
        parts.append(f"t_end={t_end!r}")
    parts += [f"{k}={v}" for k, v in extra.items()]
    return " ".join(parts)


@contextlib.contextmanager
def _sink(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _r(v) -> str:
    return repr(float(v))


# ----------------------------------------------------------------------------
# simulation helpers

def _history(model: str, p, values: tuple[float, ...]) -> InitialHistory:
    sysm = model_system(model, p)
    if len(values) == 1 and sysm.dim > 1:
        values = values * sysm.dim
    if len(values) != sysm.dim:
        raise ConfigurationError(f"--history-const needs {sysm.dim} value(s) for {model!r}")
    if any(v < 0 for v in values):
        raise ConfigurationError("initial history must be nonnegative")
    tau_max = max(sysm.delays.max_delay, 1e-12)
    return InitialHistory.constant(values if sysm.dim > 1 else values[0], tau_max)


def _step(model: str, p, step: float | None) -> float:
    delays = model_system(model, p).delays.all_delays
    return aligned_step(delays) if step is None else step


def run(model: str, p, history_values, step: float | None = None, t_end: float = 500.0):
    h = _step(model, p, step)
    cfg = IntegratorConfig(h, t_end)
    return integrate(model, p, _history(model, p, tuple(history_values)), cfg), cfg


def write_trajectory(sol, fh, dt: float, header: str) -> None:
    fh.write(header + "\n")
    cols = ["t"] + [f"x{i}" for i in range(1, sol.dim + 1)] + [f"z{i}" for i in range(1, sol.n_aux + 1)]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(cols)
    n = int(math.floor(sol.t_end / dt + 1e-9))
    ts = [k * dt for k in range(n + 1)]
    if sol.t_end - ts[-1] > 1e-9 * max(1.0, sol.t_end):
        ts.append(sol.t_end)
    for t in ts:
        t = min(t, sol.t_end)
        row = [_r(t)] + [_r(v) for v in sol.eval(t)]
        if sol.n_aux:
            row += [_r(v) for v in sol.eval_aux(t)]
        w.writerow(row)


def _nearest_equilibrium(eq_set, state) -> tuple[str, float]:
    best, dist = "none", math.inf
    for e in eq_set.existing():
        d = max(abs(a - b) for a, b in zip(e.state, state))
        if d < dist:
            best, dist = e.label, d
    return best, dist


def competition_verdicts(p: CompetitionParams, points, t_end: float = 500.0, tol: float = 1e-3) -> list[dict]:
    """Simulate each test point and report which equilibrium the run reached."""
    rows = []
    for t1, t2, phi, reported in points:
        q = p.with_taus(t1, t2)
        region = bifurcation.classify_region(q)
        eqs = equilibria.competition_equilibria(q)
        sol, cfg = run("competition", q, phi, t_end=t_end)
        terminal = tuple(float(v) for v in sol.eval(sol.t_end))
        reached, dist = _nearest_equilibrium(eqs, terminal)
        if dist > tol:
            reached = "none"
        rows.append(dict(tau1=t1, tau2=t2, phi1=phi[0], phi2=phi[1], region=region.label,
                         H_S=eqs.extra["H_S"], H_U=eqs.extra["H_U"], reported=reported,
                         reached=reached, distance=dist, x1_end=terminal[0], x2_end=terminal[1],
                         agrees=reached == reported))
    return rows


def _write_rows(fh, header: str, rows: list[dict]) -> None:
    fh.write(header + "\n")
    if not rows:
        return
    w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


# ----------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    p = apply_delays(args.model, load_params(args.model, args.params, args.growth_swapped), args)
    phi = _floats(args.history_const, what="--history-const")
    sol, cfg = run(args.model, p, phi, args.step, args.t_end)
    dt = args.dt if args.dt is not None else cfg.step
    if dt <= 0:
        raise ConfigurationError("--dt must be positive")
    with _sink(args.out) as fh:
        write_trajectory(sol, fh, dt, provenance("simulate", args.model, p, cfg.step, cfg.t_end,
                                                 history=args.history_const))
    return EXIT_OK


def _equilibrium_set(model, p):
    if model == "competition":
        return equilibria.competition_equilibria(p)
    return equilibria.single_equilibria(model, p)


def cmd_equilibria(args) -> int:
    p = apply_delays(args.model, load_params(args.model, args.params, args.growth_swapped), args)
    eqs = _equilibrium_set(args.model, p)
    dim = len(eqs.equilibria[0].state)
    with _sink(args.out) as fh:
        fh.write(provenance("equilibria", args.model, p) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label"] + [f"x{i}" for i in range(1, dim + 1)] + ["exists", "residual", "note"])
        for e in eqs.equilibria:
            w.writerow([e.label] + [_r(v) for v in e.state] + [e.exists, _r(e.residual), e.note])
        summary = [f"R0={list(eqs.r0)!r}", f"tau_H={list(eqs.tau_h)!r}", f"K={list(eqs.K)!r}"]
        summary += [f"{k}={v}" for k, v in sorted(eqs.extra.items())]
        fh.write("# thresholds " + " ".join(summary) + "\n")
    return EXIT_OK


def cmd_stability(args) -> int:
    p = apply_delays(args.model, load_params(args.model, args.params, args.growth_swapped), args)
    eqs = _equilibrium_set(args.model, p)
    verdicts = stability.classify(args.model, p, eqs, cross_check=not args.no_cross_check)
    dim = len(eqs.equilibria[0].state)
    with _sink(args.out) as fh:
        fh.write(provenance("stability", args.model, p) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label"] + [f"x{i}" for i in range(1, dim + 1)]
                   + ["classification", "unstable_root_count", "rect_L", "rect_B", "rule", "discrepancy", "note"])
        for v in verdicts:
            state = eqs.get(v.label).state
            w.writerow([v.label] + [_r(s) for s in state]
                       + [v.classification, "" if v.unstable_root_count is None else v.unstable_root_count,
                          _r(v.search_rectangle[0]), _r(v.search_rectangle[1]), v.analytic_rule_applied,
                          v.discrepancy, v.note])
    return EXIT_OK


def _stem(path: str) -> str:
    root, ext = os.path.splitext(path)
    return root if ext else path


def cmd_bifurcate(args) -> int:
    p = load_params(args.model, args.params, args.growth_swapped)
    n = args.grid
    if n < 1:
        raise ConfigurationError("--grid must be >= 1")
    if args.model == "competition":
        r1 = _floats(args.tau1_range, 2, "--tau1-range")
        r2 = _floats(args.tau2_range, 2, "--tau2-range")
        region = bifurcation.scan_grid(p, r1, r2, n)
        head = provenance("bifurcate", "competition", p, grid=n, tau1_range=args.tau1_range,
                          tau2_range=args.tau2_range)
        with _sink(args.out) as fh:
            bifurcation.write_region_csv(region, fh, head)
        if args.out and args.out != "-":
            with _sink(_stem(args.out) + "_boundaries.csv") as fh:
                bifurcation.write_boundary_csv(region, fh, head)
        return EXIT_OK
    lo, hi = _floats(args.tau_range, 2, "--tau-range")
    diagram = bifurcation.branch_single(args.model, p, np.linspace(lo, hi, n))
    extra = {"transcritical_tau": diagram.transcritical_tau, "hopf_tau": diagram.hopf_tau}
    with _sink(args.out) as fh:
        bifurcation.write_branch_csv(diagram, fh, provenance("bifurcate", args.model, p, grid=n,
                                                             tau_range=args.tau_range, **extra))
    return EXIT_OK


def _tradeoff(args) -> adaptive.TradeoffParams:
    if args.params is None:
        raw = {"gamma0": 3.0, "c": 8.0, "mu": 2.0}
    elif os.path.exists(args.params):
        with open(args.params, encoding="utf-8") as fh:
            raw = parse_param_text(fh.read())
    else:
        raw = parse_param_text(args.params)
    unknown = set(raw) - {"gamma0", "c", "mu"}
    if unknown:
        raise ConfigurationError(f"unknown trade-off parameters {sorted(unknown)}; expected gamma0, c, mu")
    try:
        return adaptive.TradeoffParams(**{k: _to_float(k, v) for k, v in raw.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from None


def cmd_ess(args) -> int:
    tp = _tradeoff(args)
    res = adaptive.ess_tau(tp)
    with _sink(args.out) as fh:
        adaptive.write_ess_csv(res, fh, provenance("ess", "tradeoff", params_text(tp)))
    return EXIT_OK


def _fig3(out: str, args) -> list[str]:
    path = os.path.join(out, "fig3_timeseries.csv")
    t_end = args.t_end if args.t_end is not None else 100.0
    with _sink(path) as fh:
        fh.write(provenance("reproduce-figure", "madde", FIG6_PARAMS, t_end=t_end, figure=3,
                            history=0.1) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "t", "x1", "Y"])
        for tau in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5):
            p = FIG6_PARAMS.with_tau(tau)
            sol, cfg = run("madde", p, (0.1,), t_end=t_end)
            if sol.n_aux and tau > 0:
                series = diagnostics.lyapunov_series(sol, p, 0.5)
            else:
                ts = np.arange(0.0, t_end + 1e-9, 0.5)
                series = np.array([[t, p.gamma - p.mu - p.kappa * sol.eval(t)[0]] for t in ts])
            for t, y in series:
                w.writerow([_r(tau), _r(t), _r(sol.eval(t)[0]), _r(y)])
    return [path]


def _fig_competition(fig: str, out: str, args) -> list[str]:
    swapped = args.growth_swapped
    if fig == "4":
        p = FIG4_PARAMS_GROWTH_SWAPPED if swapped else FIG4_PARAMS
        points = FIG4_TEST_POINTS
    else:
        p = FIG5_PARAMS_GROWTH_SWAPPED if swapped else FIG5_PARAMS
        points = FIG5_TEST_POINTS
    n = args.grid if args.grid is not None else 200
    t_end = args.t_end if args.t_end is not None else 500.0
    region = bifurcation.scan_grid(p, (0.0, 3.0), (0.0, 3.0), n)
    head = provenance("reproduce-figure", "competition", p, t_end=t_end, figure=fig, grid=n)
    paths = [os.path.join(out, f"fig{fig}_{kind}.csv") for kind in ("regions", "boundaries", "verdicts")]
    with _sink(paths[0]) as fh:
        bifurcation.write_region_csv(region, fh, head)
    with _sink(paths[1]) as fh:
        bifurcation.write_boundary_csv(region, fh, head)
    with _sink(paths[2]) as fh:
        _write_rows(fh, head, competition_verdicts(p, points, t_end))
    return paths


def _fig6(out: str, args) -> list[str]:
    n = args.grid if args.grid is not None else 301
    taus = np.linspace(0.0, 3.0, n)
    paths = []
    summary = []
    for model, p in (("hutchinson", FIG6_HUTCHINSON), ("adde", FIG6_PARAMS), ("madde", FIG6_PARAMS)):
        d = bifurcation.branch_single(model, p, taus)
        path = os.path.join(out, f"fig6_{model}.csv")
        with _sink(path) as fh:
            bifurcation.write_branch_csv(d, fh, provenance("reproduce-figure", model, p, figure=6, grid=n))
        paths.append(path)
        summary.append(dict(model=model, transcritical_tau=d.transcritical_tau, hopf_tau=d.hopf_tau))
    # periodic-orbit amplitude of the Hutchinson equation past its Hopf point
    t_end = args.t_end if args.t_end is not None else 300.0
    rows = []
    for tau in (1.0, 1.5, 1.75, 2.0, 2.5, 3.0):
        p = FIG6_HUTCHINSON.with_tau(tau)
        sol, cfg = run("hutchinson", p, (0.5,), t_end=t_end)
        rep = diagnostics.convergence_report(sol, (p.K_cap,))
        rows.append(dict(tau=tau, amplitude=rep.oscillation_amplitude, verdict=rep.verdict))
    path = os.path.join(out, "fig6_hutchinson_amplitude.csv")
    with _sink(path) as fh:
        _write_rows(fh, provenance("reproduce-figure", "hutchinson", FIG6_HUTCHINSON, t_end=t_end,
                                   figure=6, history=0.5), rows)
    paths.append(path)
    path = os.path.join(out, "fig6_summary.csv")
    with _sink(path) as fh:
        _write_rows(fh, provenance("reproduce-figure", figure=6), summary)
    paths.append(path)
    return paths


def _fig7(out: str, args) -> list[str]:
    tp = adaptive.TradeoffParams(3.0, 8.0, 2.0)
    res = adaptive.ess_tau(tp)
    head = provenance("reproduce-figure", "tradeoff", params_text(tp), figure=7)
    paths = [os.path.join(out, "fig7_curve.csv"), os.path.join(out, "fig7_summary.csv")]
    with _sink(paths[0]) as fh:
        adaptive.write_ess_csv(res, fh, head)
    with _sink(paths[1]) as fh:
        _write_rows(fh, head, [dict(tau_star=res.tau_star, tau_H=res.tau_h, kind=res.kind,
                                    xstar=res.xstar, dxstar=res.dxstar_at_star,
                                    sign_changes=res.sign_changes)])
    return paths


def cmd_reproduce_figure(args) -> int:
    out = args.out or "."
    fig = str(args.figure)
    if fig == "3":
        paths = _fig3(out, args)
    elif fig in ("4", "5"):
        paths = _fig_competition(fig, out, args)
    elif fig == "6":
        paths = _fig6(out, args)
    else:
        paths = _fig7(out, args)
    for pth in paths:
        print(pth)
    return EXIT_OK


# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="delaylogistic", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def model_opts(sp, default="madde"):
        sp.add_argument("--model", choices=MODEL_IDS, default=default)
        sp.add_argument("--params", help="parameter file (key=value or JSON), inline key=value list, "
                                         f"or preset ({', '.join(PRESETS)})")
        sp.add_argument("--growth-swapped", action="store_true",
                        help="with the fig4/fig5 presets, swap the two growth rates")
        sp.add_argument("--out", help="output path (default: stdout)")

    def delay_opts(sp):
        sp.add_argument("--tau", type=float)
        sp.add_argument("--tau1", type=float)
        sp.add_argument("--tau2", type=float)

    sp = sub.add_parser("simulate", help="integrate a model and write the trajectory")
    model_opts(sp)
    delay_opts(sp)
    sp.add_argument("--history-const", default="0.1", help="constant initial history v[,v2]")
    sp.add_argument("--step", type=float, help="integration step (default: aligned to the delays)")
    sp.add_argument("--t-end", type=float, default=500.0)
    sp.add_argument("--dt", type=float, help="output sampling interval (default: the step)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("equilibria", help="equilibria and thresholds")
    model_opts(sp)
    delay_opts(sp)
    sp.set_defaults(func=cmd_equilibria)

    sp = sub.add_parser("stability", help="stability verdicts with root-count cross-check")
    model_opts(sp)
    delay_opts(sp)
    sp.add_argument("--no-cross-check", action="store_true", help="skip the argument-principle count")
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("bifurcate", help="region map (competition) or equilibrium branches in tau")
    model_opts(sp)
    sp.add_argument("--grid", type=int, default=200)
    sp.add_argument("--tau-range", default="0,3")
    sp.add_argument("--tau1-range", default="0,3")
    sp.add_argument("--tau2-range", default="0,3")
    sp.set_defaults(func=cmd_bifurcate)

    sp = sub.add_parser("ess", help="evolutionarily stable delay under the growth/delay trade-off")
    sp.add_argument("--params", help="gamma0, c, mu as a file or inline key=value list (default 3, 8, 2)")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ess)

    sp = sub.add_parser("reproduce-figure", help="write the datasets behind a figure")
    sp.add_argument("--figure", required=True, choices=FIGURES)
    sp.add_argument("--out", help="output directory (default: .)")
    sp.add_argument("--grid", type=int)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--growth-swapped", action="store_true",
                    help="figures 4/5: use the growth-swapped parameter reading")
    sp.set_defaults(func=cmd_reproduce_figure)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, MarginalCaseError) as exc:
        print(f"delaylogistic: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, InconclusiveError) as exc:
        print(f"delaylogistic: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
