import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geokp import kp_right
from geokp.dist import adjustment_root, mean, pgf_eval, step_from_left_tail, step_from_right_tail
from geokp.ladder import ladder_dp
from geokp.sim import lindley_fixed_point
from oracles import exact_sup_probability_right, negative_drift_law


GRID = [(xi, r) for xi in (0.2, 0.4, 0.6) for r in (0.3, 0.5, 0.8)]


def test_worked_example(gr1):
    sol = kp_right.solve(gr1)
    assert sol.s_star == pytest.approx(1.2, abs=1e-12)
    assert sol.p == pytest.approx(2 / 3, abs=1e-12)
    assert sol.decay == pytest.approx(5 / 6, abs=1e-12)
    assert abs(pgf_eval(gr1, sol.s_star) - 1) < 1e-12
    assert sol.decay == pytest.approx(1 / sol.s_star, abs=1e-12)
    s_q, p_q = exact_sup_probability_right(0.4, 0.5, {-1: 0.6})
    assert sol.s_star == pytest.approx(s_q, abs=1e-12)


def test_sup_law_values(gr1):
    sol = kp_right.solve(gr1)
    sf = kp_right.sup_sf(sol, 3)
    assert sf[0] == pytest.approx(2 / 3)
    assert sf[3] == pytest.approx((2 / 3) * (5 / 6) ** 3)
    law = kp_right.sup_law(sol, 200)
    assert law.pmf.sum() + law.tail_bound == pytest.approx(1.0, abs=1e-14)
    assert kp_right.renewal_cdf(sol, 0) == pytest.approx(1.0, abs=1e-14)


def test_rejects_nonnegative_drift():
    with pytest.raises(ValueError):
        kp_right.solve(step_from_right_tail(0.6, 0.5, {-1: 0.4}))


def test_rejects_left_tail():
    with pytest.raises(ValueError):
        kp_right.solve(step_from_left_tail(0.7, 0.6, {1: 0.3}))


@pytest.mark.parametrize("xi,r", GRID)
def test_unique_root(xi, r):
    step = negative_drift_law(xi, r)
    s = np.linspace(1.0, 1.0 / r, 10_002)[1:-1]
    g = np.array([pgf_eval(step, v) for v in s]) - 1.0
    assert np.count_nonzero(np.diff(np.sign(g)) != 0) == 1


@pytest.mark.parametrize("xi,r", GRID)
def test_against_lindley(xi, r):
    step = negative_drift_law(xi, r)
    sol = kp_right.solve(step)
    x_max = int(math.ceil(math.log(1e12) / math.log(adjustment_root(step))))
    law = lindley_fixed_point(step, x_max=x_max, tol=1e-11)
    assert np.max(np.abs(law.sf(50) - kp_right.sup_sf(sol, 50))) < 1e-8


@pytest.mark.parametrize("xi,r", GRID)
def test_identity_at_zero(xi, r):
    """sum_{y<=0} (1 - p rho**(-y)) F{y} = 1 - p."""
    step = negative_drift_law(xi, r)
    sol = kp_right.solve(step)
    y = np.arange(step.finite_part.lo, 1)
    lhs = float(np.sum((1 - sol.p * sol.decay ** (-y)) * step.atoms(y[0], 0)))
    assert lhs == pytest.approx(1 - sol.p, abs=1e-10)


def test_renewal_atoms_from_negative_binomial(gr1):
    sol = kp_right.solve(gr1)
    p, r = sol.p, gr1.r
    for x in range(1, 31):
        nb = sum(p ** n * math.comb(x - 1, n - 1) * (1 - r) ** n * r ** (x - n) for n in range(1, x + 1))
        assert nb == pytest.approx(kp_right.renewal_atom(sol, x), abs=1e-12)


@settings(max_examples=15)
@given(st.floats(0.1, 0.7), st.floats(0.1, 0.7))
def test_dp_matches_closed_form(xi, r):
    step = negative_drift_law(xi, r, drift_extra=0.5)
    sol = kp_right.solve(step)
    d = ladder_dp(step)
    assert abs(d.p - sol.p) < 1e-8
