import io
import json

import numpy as np
import pytest

from delaylogistic import InitialHistory, IntegratorConfig, aligned_step, integrate
from delaylogistic.diagnostics import (convergence_report, count_peaks, lyapunov_monotone,
                                       lyapunov_series, oscillation_amplitude, report_record,
                                       write_reports_csv, write_reports_json)
from delaylogistic.equilibria import competition_equilibria, madde_equilibrium
from delaylogistic.models import FIG4_PARAMS_GROWTH_SWAPPED, FIG6_HUTCHINSON, FIG6_PARAMS


def run(model, p, phi, t_end, tau_max):
    delays = (p.tau1, p.tau2) if model == "competition" else (p.tau,)
    return integrate(model, p, InitialHistory.constant(phi, tau_max),
                     IntegratorConfig(aligned_step(delays), t_end))


class TestLyapunov:
    def test_zero_at_equilibrium(self):
        p = FIG6_PARAMS.with_tau(1.0)
        x = madde_equilibrium(p).value
        ys = lyapunov_series(run("madde", p, x, 20.0, 1.0), p, 0.5)
        assert np.max(np.abs(ys[:, 1])) <= 1e-10

    @pytest.mark.parametrize("tau,phi", [(0.5, 0.1), (1.0, 0.1), (1.0, 1.5), (2.0, 0.05)])
    def test_sign_constant_and_monotone(self, tau, phi):
        p = FIG6_PARAMS.with_tau(tau)
        ys = lyapunov_series(run("madde", p, phi, 100.0, tau), p, 0.05)
        y = ys[:, 1]
        big = np.abs(y) > 1e-12
        assert len(set(np.sign(y[big]))) == 1
        assert lyapunov_monotone(ys, 1e-9)

    def test_strict_decay_and_tail(self):
        p = FIG6_PARAMS.with_tau(1.0)
        ys = lyapunov_series(run("madde", p, 0.1, 200.0, 1.0), p, 0.05)
        a = np.abs(ys[:, 1])
        above = a[:-1] > 1e-12  # strictness is only meaningful above rounding level
        assert np.all(a[1:][above] < a[:-1][above])
        assert a[-1] <= 1e-8
        assert ys[-1, 0] == 200.0

    def test_requires_window_state(self):
        h = FIG6_HUTCHINSON.with_tau(1.0)
        with pytest.raises(ValueError):
            lyapunov_series(run("hutchinson", h, 0.5, 5.0, 1.0), FIG6_PARAMS, 0.1)


class TestConvergence:
    def test_extinction(self):
        p = FIG6_PARAMS.with_tau(3.0)
        rep = convergence_report(run("madde", p, 0.5, 500.0, 3.0), (0.0,))
        assert rep.verdict == "converged"

    def test_hutchinson_oscillates(self):
        h = FIG6_HUTCHINSON.with_tau(2.0)
        sol = run("hutchinson", h, 0.5, 300.0, 2.0)
        rep = convergence_report(sol, (1.0,))
        assert rep.verdict == "oscillating"
        assert rep.oscillation_amplitude > 0.1
        assert rep.window == (240.0, 300.0)
        assert rep.peaks >= 3

    def test_hutchinson_converges_below_hopf(self):
        h = FIG6_HUTCHINSON.with_tau(1.0)
        rep = convergence_report(run("hutchinson", h, 0.5, 500.0, 1.0), (1.0,))
        assert rep.verdict == "converged"

    def test_bistability_under_strong_competition(self):
        q = FIG4_PARAMS_GROWTH_SWAPPED.with_taus(1.0, 1.5)
        eqs = competition_equilibria(q)
        for phi, label in (((0.8, 0.1), "E1"), ((0.1, 0.8), "E2")):
            rep = convergence_report(run("competition", q, phi, 500.0, 1.5), eqs.get(label).state, tol=1e-3)
            assert rep.verdict == "converged", (phi, rep)

    def test_undecided_for_short_run(self):
        p = FIG6_PARAMS.with_tau(1.0)
        rep = convergence_report(run("madde", p, 0.1, 10.0, 1.0), (madde_equilibrium(p).value,))
        assert rep.verdict == "undecided"

    def test_target_dimension(self):
        p = FIG6_PARAMS.with_tau(1.0)
        with pytest.raises(ValueError):
            convergence_report(run("madde", p, 0.1, 5.0, 1.0), (0.1, 0.2))


class TestAmplitude:
    def test_constant_solution(self):
        h = FIG6_HUTCHINSON.with_tau(1.0)
        assert oscillation_amplitude(run("hutchinson", h, 1.0, 20.0, 1.0))[0] == 0.0

    def test_explicit_window(self):
        h = FIG6_HUTCHINSON.with_tau(2.0)
        sol = run("hutchinson", h, 0.5, 300.0, 2.0)
        assert oscillation_amplitude(sol, (200.0, 300.0))[0] > 0.1

    def test_decaying_run(self):
        p = FIG6_PARAMS.with_tau(1.0)
        assert oscillation_amplitude(run("madde", p, 0.1, 500.0, 1.0))[0] < 1e-6

    def test_count_peaks(self):
        t = np.linspace(0, 10 * np.pi, 1000)
        assert count_peaks(np.sin(t)) == 5
        assert count_peaks([1.0, 2.0]) == 0


def test_report_outputs():
    h = FIG6_HUTCHINSON.with_tau(1.0)
    rep = convergence_report(run("hutchinson", h, 0.5, 100.0, 1.0), (1.0,))
    rec = report_record(rep, model="hutchinson", tau=1.0)
    assert rec["verdict"] == rep.verdict and rec["terminal_x1"] == rep.terminal_state[0]
    buf = io.StringIO()
    write_reports_csv([rec], buf, "# prov")
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# prov" and lines[1].startswith("model,tau,verdict")
    buf = io.StringIO()
    write_reports_json([rec], buf, {"version": "x"})
    data = json.loads(buf.getvalue())
    assert data["runs"][0]["model"] == "hutchinson"
