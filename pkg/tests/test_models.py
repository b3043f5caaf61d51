import math

import pytest

from delaylogistic.models import (FIG4_PARAMS, CompetitionParams, HutchinsonParams, SingleParams,
                                  rhs_adde, rhs_competition, rhs_hutchinson, rhs_madde,
                                  survival_factor)


def test_madde_rhs_by_hand():
    p = SingleParams(2.0, 0.5, 1.0, 1.0)
    # 2 * 0.3 * exp(-0.5 - 0.4) - 0.5*0.2 - 0.04
    expect = 2 * 0.3 * math.exp(-0.9) - 0.1 - 0.04
    assert rhs_madde(p, 0.2, 0.3, 0.4) == pytest.approx(expect, rel=1e-15)


def test_survival_factor_without_crowding():
    p = SingleParams(2.0, 0.5, 1.0, 2.0)
    assert survival_factor(1.0, p, 0.0) == pytest.approx(math.exp(-1.0))


def test_adde_rhs_by_hand():
    p = SingleParams(1.5, 0.5, 1.0, 1.0)
    e = math.exp(-0.5)
    expect = 1.5 * 0.5 * e * 0.3 / (0.5 + (1 - e) * 0.3) - 0.5 * 0.2 - 0.04
    assert rhs_adde(p, 0.2, 0.3) == pytest.approx(expect, rel=1e-15)


def test_tau_zero_reduces_to_logistic():
    p = SingleParams(1.5, 0.5, 1.0, 0.0)
    for x in (0.1, 0.7, 1.3):
        logistic = (1.5 - 0.5) * x - x * x
        assert rhs_madde(p, x, x, 0.0) == pytest.approx(logistic)
        assert rhs_adde(p, x, x) == pytest.approx(logistic)


def test_hutchinson_rhs():
    assert rhs_hutchinson(HutchinsonParams(2.0, 4.0, 1.0), 1.0, 2.0) == pytest.approx(1.0)


def test_competition_rhs_decouples_without_cross_competition():
    # the competition windows carry their weights: z_i integrates kappa_i * x_i here
    p = CompetitionParams(2.0, 1.5, 0.5, 0.4, 0.8, 1.0, 0.0, 0.0, 1.0, 1.5)
    x, d1, d2, w1, w2 = (0.3, 0.4), (0.25, 0.9), (0.7, 0.35), 0.2, 0.6
    f1, f2 = rhs_competition(p, x, d1, d2, 0.8 * w1, 1.0 * w2)
    assert f1 == pytest.approx(rhs_madde(p.species(1), 0.3, 0.25, w1), rel=1e-14)
    assert f2 == pytest.approx(rhs_madde(p.species(2), 0.4, 0.35, w2), rel=1e-14)


def test_competition_cross_terms():
    p = FIG4_PARAMS.with_taus(1.0, 1.0)
    f1, f2 = rhs_competition(p, (0.3, 0.4), (0.3, 0.4), (0.3, 0.4), 0.0, 0.0)
    g1 = 2.0 * 0.3 * math.exp(-0.5)
    g2 = 1.5 * 0.4 * math.exp(-0.5)
    assert f1 == pytest.approx(g1 - 0.5 * 0.3 - 0.8 * 0.09 - 1.5 * 0.12)
    assert f2 == pytest.approx(g2 - 0.5 * 0.4 - 1.0 * 0.16 - 1.0 * 0.12)


def test_window_weights_and_species():
    p = FIG4_PARAMS
    assert p.window_weights == ((0.8, 1.5), (1.0, 1.0))
    assert p.species(2) == SingleParams(1.5, 0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        p.species(3)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0),
                                  (1.0, 1.0, 1.0, -0.5), (float("nan"), 1.0, 1.0)])
def test_single_params_validation(args):
    with pytest.raises(ValueError):
        SingleParams(*args)


def test_competition_params_validation():
    with pytest.raises(ValueError):
        CompetitionParams(1, 1, 1, 1, 1, 1, -0.1, 1)
    # zero interspecific competition is allowed
    CompetitionParams(1, 1, 1, 1, 1, 1, 0.0, 0.0)


def test_with_tau_returns_copy():
    p = SingleParams(1.5, 0.5, 1.0)
    q = p.with_tau(2.0)
    assert p.tau == 0.0 and q.tau == 2.0
    assert FIG4_PARAMS.with_taus(1, 2).tau2 == 2.0
