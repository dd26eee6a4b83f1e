import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geokp.dist import (IntegerPMF, PowerSeries, Side, convolve, convolve_power, mean, pgf_eval,
                        series_mul, series_reciprocal, series_sqrt, step_from_left_tail,
                        step_from_right_tail, SupremumLaw, tv_distance)


# -- construction ---------------------------------------------------------------

def test_right_tail_atoms(gr1):
    assert gr1.atom(0) == pytest.approx(0.2, abs=1e-15)
    assert gr1.atom(1) == pytest.approx(0.1, abs=1e-15)
    assert gr1.sf(1) == pytest.approx(0.1, abs=1e-15)  # P(X >= 2)
    # geometric series cross-check of P(X >= 2)
    assert sum(gr1.atom(x) for x in range(2, 200)) == pytest.approx(0.1, abs=1e-15)


def test_left_tail_atoms():
    s = step_from_left_tail(0.6, 0.5, {1: 0.4})
    assert s.atom(0) == pytest.approx(0.3, abs=1e-15)
    assert s.atom(-1) == pytest.approx(0.15, abs=1e-15)
    assert s.cdf(-2) == pytest.approx(0.15, abs=1e-15)


@pytest.mark.parametrize("build", [
    lambda: step_from_right_tail(0.5, 0.5, {}),
    lambda: step_from_left_tail(0.6, 0.5, {}),
    lambda: step_from_right_tail(0.4, 0.5, {-1: 0.5}),
    lambda: step_from_right_tail(1.2, 0.5, {-1: 0.6}),
    lambda: step_from_right_tail(0.4, 1.0, {-1: 0.6}),
    lambda: step_from_right_tail(0.4, 0.5, {1: 0.6}),
    lambda: step_from_left_tail(0.6, 0.5, {0: 0.4}),
])
def test_invalid_laws_rejected(build):
    with pytest.raises(ValueError):
        build()


def test_integer_pmf_invariants():
    with pytest.raises(ValueError):
        IntegerPMF(0, 1, np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        IntegerPMF(2, 1, np.array([]))
    with pytest.raises(ValueError):
        IntegerPMF(0, 1, np.array([1.5, -0.5]))


def test_integer_pmf_json_roundtrip():
    a = IntegerPMF(-2, 1, np.array([0.1, 0.2, 0.3, 0.3]), 0.05, 0.05)
    b = IntegerPMF.from_json(a.to_json())
    assert a == b
    assert set(json.loads(a.to_json())) == {"lo", "hi", "mass", "left_tail_mass", "right_tail_mass"}


# -- mean -----------------------------------------------------------------------

def test_mean_right(gr1):
    assert mean(gr1) == pytest.approx(-0.2, abs=1e-15)
    numeric = -0.6 + sum(x * 0.2 * 0.5 ** x for x in range(0, 200))
    assert abs(mean(gr1) - numeric) < 1e-14


@pytest.mark.parametrize("xi,r", [(0.3, 0.4), (0.7, 0.2), (0.5, 0.9)])
def test_mean_left_single_atom(xi, r):
    s = step_from_left_tail(xi, r, {1: 1 - xi})
    assert mean(s) == pytest.approx((1 - xi) - xi * r / (1 - r), abs=1e-14)


def test_mean_tandem(tandem_step):
    assert mean(tandem_step) == pytest.approx(1 / 0.7 - 2.0, abs=1e-12)
    x = np.arange(-2000, tandem_step.finite_part.hi + 1)
    assert abs(float(np.dot(x, tandem_step.atoms(-2000, x[-1]))) - mean(tandem_step)) < 1e-12


# -- pgf ------------------------------------------------------------------------

def test_pgf(gr1):
    assert pgf_eval(gr1, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert pgf_eval(gr1, 1.2) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        pgf_eval(gr1, 2.0)


def test_pgf_left_domain():
    s = step_from_left_tail(0.6, 0.5, {1: 0.4})
    with pytest.raises(ValueError):
        pgf_eval(s, 0.5)
    direct = sum(0.6 ** x * s.atom(x) for x in range(-400, 2))
    assert pgf_eval(s, 0.6) == pytest.approx(direct, rel=1e-12)


# -- convolution ------------------------------------------------------------------

def test_convolve_identity():
    a = IntegerPMF(-1, 2, np.array([0.1, 0.2, 0.3, 0.4]))
    assert convolve(a, IntegerPMF.unit(0)) == a


def test_convolve_units():
    c = convolve(IntegerPMF.unit(1), IntegerPMF.unit(2))
    assert (c.lo, c.hi, c.mass.tolist()) == (3, 3, [1.0])


def test_convolve_geometric_is_negative_binomial():
    r = 0.5
    xs = np.arange(1, 80)
    g = IntegerPMF(1, 79, (1 - r) * r ** (xs - 1), 0.0, r ** 79)
    c = convolve(g, g)
    for x in range(2, 40):
        assert c[x] == pytest.approx((x - 1) * 0.25 * 0.5 ** (x - 2), abs=1e-15)
    assert c.left_tail_mass + c.right_tail_mass <= 2 * r ** 79


pmfs = st.lists(st.integers(0, 100), min_size=1, max_size=6).filter(lambda v: sum(v) > 0).map(
    lambda v: IntegerPMF(-2, len(v) - 3, np.array(v, float) / sum(v)))


@given(pmfs, pmfs)
def test_convolve_commutes(a, b):
    ab, ba = convolve(a, b), convolve(b, a)
    assert ab.lo == ba.lo and np.allclose(ab.mass, ba.mass, atol=1e-15, rtol=0)


@given(pmfs, pmfs, pmfs)
def test_convolve_associates(a, b, c):
    x, y = convolve(convolve(a, b), c), convolve(a, convolve(b, c))
    assert x.lo == y.lo and np.allclose(x.mass, y.mass, atol=1e-15, rtol=0)


def test_convolve_power():
    a = IntegerPMF(0, 1, np.array([0.5, 0.5]))
    c = convolve_power(a, 4)
    assert np.allclose(c.mass, np.array([1, 4, 6, 4, 1]) / 16)


# -- power series -------------------------------------------------------------------

def test_reciprocal_geometric():
    q = 0.3
    rec = series_reciprocal(PowerSeries.from_coeffs([1.0, -q], 20))
    assert np.allclose(rec.coeffs, q ** np.arange(21), atol=1e-16)


def test_series_mul():
    prod = series_mul(PowerSeries.from_coeffs([1, 1], 5), PowerSeries.from_coeffs([1, -1], 5))
    assert prod.coeffs.tolist() == [1, 0, -1, 0, 0, 0]


def test_reciprocal_zero_constant():
    with pytest.raises(ZeroDivisionError):
        series_reciprocal(PowerSeries.from_coeffs([0.0, 1.0], 3))


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=10), st.floats(0.5, 3))
def test_reciprocal_inverts(tail, c0):
    a = PowerSeries.from_coeffs([c0] + tail, 12)
    one = series_mul(a, series_reciprocal(a))
    assert one.coeffs[0] == pytest.approx(1.0)
    scale = max(1.0, float(np.abs(series_reciprocal(a).coeffs).max()))
    assert np.allclose(one.coeffs[1:], 0.0, atol=1e-10 * scale)


def test_series_sqrt():
    a = PowerSeries.from_coeffs([1.0, -0.5], 30)
    b = series_sqrt(a)
    assert np.allclose(series_mul(b, b).coeffs, a.coeffs, atol=1e-15)
    # binomial series of sqrt(1 - x/2)
    coeff = [math.comb(2 * k, k) / ((1 - 2 * k) * 4 ** k) * 0.5 ** k for k in range(31)]
    assert np.allclose(b.coeffs, coeff, atol=1e-15)


# -- invariants ---------------------------------------------------------------------

right_laws = st.builds(
    lambda xi, r, w: step_from_right_tail(xi, r, {-1: (1 - xi) * w, -3: (1 - xi) * (1 - w)}),
    st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.0, 1.0).filter(lambda w: w < 1))
left_laws = st.builds(
    lambda xi, r, w: step_from_left_tail(xi, r, {1: (1 - xi) * w, 4: (1 - xi) * (1 - w)}),
    st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.01, 1.0))


@given(st.one_of(right_laws, left_laws), st.integers(60, 120))
def test_materialized_window_sums_to_one(step, B):
    m = step.materialize(-B, B)
    assert abs(m.mass.sum() + m.left_tail_mass + m.right_tail_mass - 1.0) < 1e-12


@given(right_laws)
def test_memoryless_ratio(step):
    for x in range(0, 10):
        assert step.sf(x - 1) / step.sf(x) == pytest.approx(1 / step.r, rel=1e-12)


@given(st.one_of(right_laws, left_laws))
def test_pgf_normalized(step):
    assert abs(pgf_eval(step, 1.0) - 1.0) < 1e-12


@given(st.one_of(right_laws, left_laws))
def test_mean_matches_window_sum(step):
    B = 2000
    x = np.arange(-B, B + 1)
    atoms = step.atoms(-B, B)
    assert abs(float(np.dot(x, atoms)) - mean(step)) < 1e-12


def test_negated(gr1):
    neg = gr1.negated()
    assert neg.side is Side.LEFT
    assert neg.atom(1) == pytest.approx(0.6)
    assert mean(neg) == pytest.approx(0.2)


def test_sampler_matches_atoms(gr1):
    rng = np.random.default_rng(5)
    x = gr1.sample(rng, 200_000)
    for v in (-1, 0, 1, 2):
        p = gr1.atom(v)
        assert abs(np.mean(x == v) - p) < 4 * math.sqrt(p * (1 - p) / x.size)


def test_supremum_law_helpers():
    law = SupremumLaw(np.array([0.5, 0.25, 0.125]), 0.125)
    assert law.sf(3).tolist() == [0.5, 0.25, 0.125, 0.125]
    assert tv_distance(law.pmf, np.array([0.5, 0.25])) == pytest.approx(0.125)
