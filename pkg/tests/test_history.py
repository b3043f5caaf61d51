import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from delaylogistic.errors import DomainError
from delaylogistic.history import DenseSolution, InitialHistory


def simpson(f, a, b, n=2000):
    """Independent composite Simpson rule used as the quadrature oracle."""
    if n % 2:
        n += 1
    h = (b - a) / n
    s = f(a) + f(b)
    for k in range(1, n):
        s += (4 if k % 2 else 2) * f(a + k * h)
    return s * h / 3


def cubic_solution(c, t_end=3.0, h=0.25, history=0.0):
    """Dense solution whose knots sample the cubic ``c0 + c1 t + c2 t^2 + c3 t^3``."""
    p = np.polynomial.Polynomial(c)
    dp = p.deriv()
    sol = DenseSolution(InitialHistory.constant(history, 1.0))
    for t in np.arange(0.0, t_end + 1e-12, h):
        sol.append(float(t), (p(t),), (dp(t),))
    return sol, p


class TestInitialHistory:
    def test_constant_value_and_integral(self):
        h = InitialHistory.constant(0.3, 2.0)
        assert h.value(-1.3) == (0.3,)
        assert h.integral(-2.0, 0.0)[0] == pytest.approx(0.6)
        assert h.dim == 1

    def test_vector_constant(self):
        h = InitialHistory.constant((0.8, 0.1), 1.5)
        assert h.dim == 2
        assert h.value(0.0) == (0.8, 0.1)

    def test_sampled_is_piecewise_linear(self):
        h = InitialHistory.sampled([-2.0, -1.0, 0.0], [0.0, 1.0, 0.5])
        assert h.value(-1.5)[0] == pytest.approx(0.5)
        assert h.value(-0.5)[0] == pytest.approx(0.75)
        # trapezoid areas: 0.5 + 0.75
        assert h.integral(-2.0, 0.0)[0] == pytest.approx(1.25)
        assert h.integral(-1.5, -0.5)[0] == pytest.approx(simpson(lambda s: h.value(s)[0], -1.5, -0.5))

    def test_outside_domain(self):
        h = InitialHistory.constant(1.0, 1.0)
        with pytest.raises(DomainError):
            h.value(-1.01)
        with pytest.raises(DomainError):
            h.value(0.01)

    @pytest.mark.parametrize("kwargs", [
        dict(times=[-1.0, -0.5], values=[1.0, 1.0]),       # does not end at 0
        dict(times=[-1.0, -1.0, 0.0], values=[1, 1, 1]),   # not increasing
        dict(times=[-1.0, 0.0], values=[1.0, -0.1]),       # negative
    ])
    def test_invalid_samples(self, kwargs):
        with pytest.raises(ValueError):
            InitialHistory.sampled(**kwargs)

    def test_negative_constant_rejected(self):
        with pytest.raises(ValueError):
            InitialHistory.constant(-0.1, 1.0)


class TestDenseSolution:
    def test_cubic_reproduced_exactly(self):
        sol, p = cubic_solution([1.0, -2.0, 0.5, 0.25])
        for t in np.linspace(0, 3, 37):
            assert sol.eval(t)[0] == pytest.approx(p(t), abs=1e-12)

    def test_history_before_start(self):
        sol, _ = cubic_solution([1.0, 0, 0, 0], history=0.7)
        assert sol.eval(-0.5)[0] == 0.7
        with pytest.raises(DomainError):
            sol.eval(-1.5)
        with pytest.raises(DomainError):
            sol.eval(3.5)

    def test_integral_of_cubic_is_exact(self):
        sol, p = cubic_solution([1.0, -2.0, 0.5, 0.25])
        P = p.integ()
        assert sol.integral_over(0.3, 2.9) == pytest.approx(P(2.9) - P(0.3), abs=1e-12)

    def test_integral_across_history(self):
        sol, p = cubic_solution([0.2, 1.0, 0.0, 0.0], history=0.4)
        P = p.integ()
        expect = 0.4 * 0.6 + (P(1.1) - P(0.0))
        assert sol.integral_over(-0.6, 1.1) == pytest.approx(expect, abs=1e-12)
        assert sol.integral_over(1.1, -0.6) == pytest.approx(-expect, abs=1e-12)

    def test_integral_matches_simpson_oracle_on_nonpolynomial(self):
        sol = DenseSolution(InitialHistory.constant(1.0, 1.0))
        for t in np.linspace(0.0, 4.0, 81):
            sol.append(float(t), (math.exp(-t) * math.cos(3 * t),),
                       (-math.exp(-t) * (math.cos(3 * t) + 3 * math.sin(3 * t)),))
        got = sol.integral_over(0.17, 3.61)
        oracle = simpson(lambda s: sol.eval(s)[0], 0.17, 3.61, 4000)
        assert got == pytest.approx(oracle, abs=1e-10)

    def test_weights(self):
        h = InitialHistory.constant((1.0, 2.0), 1.0)
        sol = DenseSolution(h)
        sol.append(0.0, (1.0, 2.0), (0.0, 0.0))
        sol.append(1.0, (1.0, 2.0), (0.0, 0.0))
        assert sol.integral_over(-1.0, 1.0, weights=(0.5, 3.0)) == pytest.approx(2 * (0.5 + 6.0))
        with pytest.raises(ValueError):
            sol.integral_over(0.0, 1.0, weights=(1.0,))

    def test_aux_channel(self):
        sol = DenseSolution(InitialHistory.constant(0.5, 1.0), n_aux=1)
        sol.append(0.0, (0.5, 0.5), (0.0, 1.0))
        sol.append(1.0, (0.5, 1.5), (0.0, 1.0))
        assert sol.eval(0.5)[0] == pytest.approx(0.5)
        assert sol.eval_aux(0.5)[0] == pytest.approx(1.0)
        assert sol.value(0.5) == pytest.approx((0.5,))
        with pytest.raises(DomainError):
            sol.eval_aux(-0.1)

    def test_rejects_bad_knots(self):
        sol = DenseSolution(InitialHistory.constant(0.5, 1.0))
        with pytest.raises(ValueError):
            sol.append(0.5, (1.0,), (0.0,))  # first knot not at t_start
        sol.append(0.0, (1.0,), (0.0,))
        with pytest.raises(ValueError):
            sol.append(0.0, (1.0,), (0.0,))  # zero-length segment
        with pytest.raises(ValueError):
            sol.append(1.0, (1.0, 2.0), (0.0, 0.0))  # wrong width

    def test_segments_and_coefficients(self):
        sol, p = cubic_solution([0.0, 1.0, -1.0, 2.0], t_end=1.0, h=0.5)
        seg = sol.segments[1]
        c = seg.coefficients()[:, 0]
        th = 0.3
        t = seg.a + th * (seg.b - seg.a)
        assert c[0] + c[1] * th + c[2] * th ** 2 + c[3] * th ** 3 == pytest.approx(p(t))
        assert len(sol) == 2
        assert sol.knot_states.shape == (3, 1)
        assert sol.sample([0.0, 0.25]).shape == (2, 1)


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4),
       st.floats(0.0, 2.5), st.floats(0.0, 2.5))
def test_hermite_integral_exact_for_cubics(c, a, b):
    sol, p = cubic_solution(c)
    P = p.integ()
    assert sol.integral_over(a, b) == pytest.approx(P(b) - P(a), abs=1e-10)
