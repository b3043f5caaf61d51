import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from delaylogistic import InitialHistory, IntegratorConfig, aligned_step, integrate
from delaylogistic.equilibria import madde_equilibrium
from delaylogistic.errors import BlowUpError, ConfigurationError
from delaylogistic.integrator import init_integral_state, model_system
from delaylogistic.models import (FIG6_HUTCHINSON, FIG6_PARAMS, CompetitionParams, HutchinsonParams,
                                  SingleParams)


def logistic(t, r, K, x0):
    return K / (1 + (K / x0 - 1) * math.exp(-r * t))


def run(model, p, phi, t_end, step=None, tau_max=None):
    sysm = model_system(model, p)
    h = aligned_step(sysm.delays.all_delays) if step is None else step
    hist = InitialHistory.constant(phi, tau_max if tau_max is not None else max(sysm.delays.max_delay, 1e-12))
    return integrate(model, p, hist, IntegratorConfig(h, t_end))


class TestAlignedStep:
    def test_divides_smallest_delay(self):
        h = aligned_step((1.0, 1.5))
        assert h <= 0.05
        assert (1.0 / h) == pytest.approx(round(1.0 / h))

    def test_short_delay_gives_quarter(self):
        assert aligned_step((0.1,)) == pytest.approx(0.025)

    def test_no_delay(self):
        assert aligned_step((0.0,)) == 0.01
        assert aligned_step(()) == 0.01

    def test_custom_max_step(self):
        assert aligned_step((1.0,), max_step=0.01) == pytest.approx(0.01)


class TestLimits:
    def test_tau_zero_matches_closed_form_logistic(self):
        p = SingleParams(1.5, 0.5, 1.0, 0.0)
        sol = run("madde", p, 0.1, 40.0, step=0.01)
        # r = gamma - mu = 1, K = r / kappa = 1
        assert abs(sol.eval(40.0)[0] - logistic(40.0, 1.0, 1.0, 0.1)) <= 1e-6
        assert abs(sol.eval(3.0)[0] - logistic(3.0, 1.0, 1.0, 0.1)) <= 1e-8

    def test_zero_history_stays_zero(self):
        sol = run("madde", FIG6_PARAMS.with_tau(1.0), 0.0, 50.0)
        assert np.all(sol.knot_states == 0.0)

    def test_equilibrium_history_stays_put(self):
        p = FIG6_PARAMS.with_tau(1.0)
        x = madde_equilibrium(p).value
        sol = run("madde", p, x, 50.0)
        assert np.max(np.abs(sol.knot_states[:, 0] - x)) <= 1e-10

    def test_hutchinson_equilibrium(self):
        sol = run("hutchinson", FIG6_HUTCHINSON.with_tau(1.0), 1.0, 20.0)
        assert np.max(np.abs(sol.knot_states[:, 0] - 1.0)) == 0.0

    def test_competition_without_cross_terms_matches_single_runs(self):
        p = CompetitionParams(2.0, 1.5, 0.5, 0.4, 0.8, 1.0, 0.0, 0.0, 1.0, 1.5)
        h = aligned_step((1.0, 1.5))
        both = integrate("competition", p, InitialHistory.constant((0.3, 0.6), 1.5), IntegratorConfig(h, 30.0))
        for i, phi in ((1, 0.3), (2, 0.6)):
            one = run("madde", p.species(i), phi, 30.0, step=h, tau_max=1.5)
            diff = np.max(np.abs(both.knot_states[:, i - 1] - one.knot_states[:, 0]))
            assert diff <= 1e-12


class TestAccuracy:
    @pytest.mark.parametrize("model,params,phi", [
        ("madde", FIG6_PARAMS.with_tau(1.0), 0.1),
        ("adde", FIG6_PARAMS.with_tau(1.0), 0.1),
        ("hutchinson", FIG6_HUTCHINSON.with_tau(1.0), 0.5),
    ])
    def test_step_halving_ratio_is_fourth_order(self, model, params, phi):
        ys = [run(model, params, phi, 20.0, step=1.0 / n).eval(20.0)[0] for n in (8, 16, 32)]
        ratio = abs(ys[0] - ys[1]) / abs(ys[1] - ys[2])
        assert 12 <= ratio <= 20

    def test_integral_state_tracks_dense_quadrature(self):
        p = FIG6_PARAMS.with_tau(1.0)
        sol = run("madde", p, 0.1, 100.0)
        ts, zs = sol.knot_times, sol.knot_states[:, 1]
        drift = max(abs(z - sol.integral_over(t - 1.0, t)) for t, z in zip(ts, zs))
        assert drift <= 1e-6

    def test_competition_window_states(self):
        p = CompetitionParams(1.5, 2.0, 0.5, 0.5, 1.2, 1.0, 1.0, 0.5, 1.0, 1.5)
        h = aligned_step((1.0, 1.5))
        sol = integrate("competition", p, InitialHistory.constant((0.8, 0.8), 1.5), IntegratorConfig(h, 40.0))
        (w1, w2) = p.window_weights
        t = 40.0
        z = sol.eval_aux(t)
        assert z[0] == pytest.approx(sol.integral_over(t - 1.0, t, w1), abs=1e-6)
        assert z[1] == pytest.approx(sol.integral_over(t - 1.5, t, w2), abs=1e-6)

    def test_t_end_is_hit_exactly(self):
        sol = run("madde", FIG6_PARAMS.with_tau(1.0), 0.1, 7.03)
        assert sol.t_end == 7.03


class TestInitialIntegral:
    def test_constant(self):
        h = InitialHistory.constant(0.4, 2.0)
        assert init_integral_state(h, 1.5, (1.0,)) == pytest.approx(0.6, rel=1e-12)

    def test_sampled_against_exact(self):
        h = InitialHistory.sampled(np.linspace(-1.0, 0.0, 11), np.linspace(0.0, 1.0, 11) ** 2)
        exact = h.integral(-1.0, 0.0)[0]
        assert init_integral_state(h, 1.0, (2.0,)) == pytest.approx(2 * exact, rel=1e-6)

    def test_window_too_long(self):
        with pytest.raises(ConfigurationError):
            init_integral_state(InitialHistory.constant(1.0, 1.0), 2.0, (1.0,))


class TestValidation:
    def test_step_too_large(self):
        with pytest.raises(ConfigurationError):
            run("madde", FIG6_PARAMS.with_tau(1.0), 0.1, 10.0, step=0.3)

    def test_history_too_short(self):
        with pytest.raises(ConfigurationError):
            run("madde", FIG6_PARAMS.with_tau(1.0), 0.1, 10.0, tau_max=0.5)

    def test_wrong_params_type(self):
        with pytest.raises(ConfigurationError):
            model_system("hutchinson", FIG6_PARAMS)
        with pytest.raises(ConfigurationError):
            model_system("nonsense", FIG6_PARAMS)

    def test_dimension_mismatch(self):
        p = CompetitionParams(1, 1, 0.5, 0.5, 1, 1, 0.5, 0.5, 1.0, 1.0)
        with pytest.raises(ConfigurationError):
            integrate("competition", p, InitialHistory.constant(0.5, 1.0), IntegratorConfig(0.05, 1.0))

    @pytest.mark.parametrize("kw", [dict(step=0.0), dict(step=0.1, t_end=-1.0),
                                    dict(step=0.1, integral_quadrature_panels=0)])
    def test_bad_config(self, kw):
        with pytest.raises(ConfigurationError):
            IntegratorConfig(**kw)

    def test_blow_up_detected(self):
        with pytest.raises(BlowUpError):
            run("hutchinson", HutchinsonParams(5.0, 1.0, 3.0), 0.5, 100.0)


@given(st.floats(0.2, 1.0), st.floats(1.5, 5.0), st.floats(0.5, 2.0), st.floats(0.0, 2.0))
def test_solutions_stay_nonnegative_and_bounded(mu, ratio, kappa, phi):
    p = SingleParams(mu * ratio, mu, kappa, 1.0)
    sol = run("madde", p, phi, 30.0)
    x = sol.knot_states[:, 0]
    assert np.all(x >= 0.0)
    # crowding caps the population at max(phi, (gamma - mu) / kappa)
    assert np.all(x <= max(phi, (p.gamma - p.mu) / kappa) + 1e-9)
