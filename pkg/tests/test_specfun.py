import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_gegenbauer

from confpoisson.params import ParameterRangeError, euclidean, heisenberg
from confpoisson.specfun import (DivergenceError, PoleError, c_heis, c_real, c_real_higher,
                                 eigenvalue, gamma_fn, gamma_ratio, gauss_2f1, gauss_2f1_array,
                                 gegenbauer, gegenbauer_two_var, iso_heis, iso_real,
                                 log_gamma_signed, lp_bound, lp_exponent, model_constants,
                                 pochhammer, pochhammer_ratio_partial_sums, rgamma)

mpmath.mp.dps = 30


# --- gamma family ----------------------------------------------------------

@pytest.mark.parametrize("x, expected", [(0.5, math.sqrt(math.pi)), (5, 24.0), (1, 1.0),
                                         (-0.5, -2 * math.sqrt(math.pi))])
def test_gamma_classical_values(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-14)


def test_gamma_duplication():
    x = 0.7
    lhs = gamma_fn(2 * x)
    rhs = gamma_fn(x) * gamma_fn(x + 0.5) * 2 ** (2 * x - 1) / math.sqrt(math.pi)
    assert abs(lhs - rhs) < 1e-13


@settings(max_examples=100, deadline=None)
@given(st.floats(-49.9, 50.0).filter(lambda x: abs(x - round(x)) > 1e-3))
def test_gamma_against_mpmath(x):
    assert gamma_fn(x) == pytest.approx(float(mpmath.gamma(x)), rel=1e-13)


def test_gamma_reflection():
    rng = np.random.default_rng(1)
    for x in rng.uniform(0.001, 0.999, 100):
        assert gamma_fn(x) * gamma_fn(1 - x) * math.sin(math.pi * x) / math.pi == pytest.approx(
            1.0, abs=1e-12)


@pytest.mark.parametrize("x", [0, -1, -7])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        gamma_fn(x)
    assert rgamma(x) == 0.0


def test_log_gamma_sign():
    assert log_gamma_signed(-0.5)[1] == -1.0
    assert log_gamma_signed(-1.5)[1] == 1.0
    assert log_gamma_signed(3.0) == (pytest.approx(math.log(2.0)), 1.0)


def test_gamma_ratio_large_arguments():
    # plain products overflow, the log path must not
    val = gamma_ratio((200.5,), (200.0,))
    assert val == pytest.approx(float(mpmath.gamma(200.5) / mpmath.gamma(200)), rel=1e-12)
    assert gamma_ratio((1.5,), (-2.0,)) == 0.0
    with pytest.raises(PoleError):
        gamma_ratio((-1.0,), (-2.0,))


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=-5, max_value=5, max_denominator=12),
       st.integers(0, 10), st.integers(0, 10))
def test_pochhammer_splitting_is_exact(x, m, n):
    assert pochhammer(x, m + n) == pochhammer(x, m) * pochhammer(x + m, n)


def test_pochhammer_float_regimes():
    assert pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)
    assert pochhammer(1.25, 100) == pytest.approx(float(mpmath.rf(1.25, 100)), rel=1e-12)
    assert pochhammer(-3.0, 100) == 0.0
    with pytest.raises(ValueError):
        pochhammer(1.0, -1)


# --- Gauss hypergeometric ----------------------------------------------------

def test_2f1_spec_examples():
    assert gauss_2f1(0.3, 1.2, 2.0, 0.0) == 1.0
    assert gauss_2f1(1.0, 0.3, 2.5, 1.0) == pytest.approx(1.25, rel=1e-14)
    assert gauss_2f1(1.0, 1.5, 2.0, 0.75) == pytest.approx(8.0 / 3.0, rel=1e-13)


@pytest.mark.parametrize("a, b, c", [(0.3, 0.7, 1.9), (1.5, -0.25, 2.5), (2.0, 3.0, 4.5),
                                     (0.75, 0.75, 2.0), (1.25, 1.25, 3.0), (0.5, 1.0, 1.5)])
@pytest.mark.parametrize("z", [-20.0, -3.0, -0.6, -0.2, 0.3, 0.6, 0.85, 0.95, 0.999, 1 - 1e-9])
def test_2f1_against_mpmath(a, b, c, z):
    ref = float(mpmath.hyp2f1(a, b, c, z))
    assert gauss_2f1(a, b, c, z) == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("a, b, c", [(0.5, 0.5, 1.0), (0.75, 0.75, 2.5), (1.0, 1.0, 2.0),
                                     (1.5, 1.5, 2.0), (0.25, 1.75, 1.0)])
@pytest.mark.parametrize("z", [0.95, 0.999, 1 - 1e-8])
def test_2f1_integer_c_minus_a_minus_b(a, b, c, z):
    # logarithmic case of the connection formula
    ref = float(mpmath.hyp2f1(a, b, c, z))
    assert gauss_2f1(a, b, c, z) == pytest.approx(ref, rel=1e-11)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 6), st.floats(-10, 0.99))
def test_2f1_random_against_mpmath(a, b, c, z):
    s = c - a - b
    if 1e-12 < abs(s - round(s)) < 1e-5 and z > 0.9:
        return
    ref = float(mpmath.hyp2f1(a, b, c, z))
    if not math.isfinite(ref) or abs(ref) > 1e12:
        return
    assert gauss_2f1(a, b, c, z) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_2f1_terminating():
    assert gauss_2f1(-2.0, 1.5, 3.0, 1.0) == pytest.approx(float(mpmath.hyp2f1(-2, 1.5, 3, 1)))
    assert gauss_2f1(-3.0, 2.0, 0.5, 0.7) == pytest.approx(float(mpmath.hyp2f1(-3, 2, 0.5, 0.7)))


def test_2f1_errors():
    with pytest.raises(DivergenceError):
        gauss_2f1(1.0, 1.0, 1.5, 1.0)
    with pytest.raises(PoleError):
        gauss_2f1(1.0, 1.0, -2.0, 0.3)
    with pytest.raises(ValueError):
        gauss_2f1(1.0, 1.0, 3.0, 1.5)


def test_2f1_array_matches_scalar():
    z = np.linspace(-2, 1, 7)
    out = gauss_2f1_array(0.5, 0.25, 1.75, z)
    assert out.shape == z.shape
    assert out == pytest.approx([gauss_2f1(0.5, 0.25, 1.75, zi) for zi in z])


@pytest.mark.parametrize("x, y", [(0.3, 2.5), (-1.2, 1.0), (2.0, 4.5), (-0.5, 0.8)])
def test_pochhammer_partial_sums_approach_gauss_sum(x, y):
    sums = pochhammer_ratio_partial_sums(x, y, 200_000)
    limit = (y - 1) / (y - x - 1)
    # terms decay like m^(x-y); tail bound from the integral test
    tail = abs(sums[-1] - sums[-2]) * len(sums) / (y - x - 1)
    assert abs(sums[-1] - limit) <= tail + 1e-10
    assert gauss_2f1(1.0, x, y, 1.0) == pytest.approx(limit, rel=1e-12)


# --- Gegenbauer --------------------------------------------------------------

def test_gegenbauer_low_degrees():
    al = Fraction(3, 4)
    assert gegenbauer_two_var(0, al).coeffs == {(0, 0): 1}
    assert gegenbauer_two_var(1, al).coeffs == {(0, 1): 2 * al}
    assert gegenbauer_two_var(2, al).coeffs == {(0, 2): 2 * al * (al + 1), (1, 0): -al}


@pytest.mark.parametrize("alpha", [Fraction(1, 2), Fraction(-3, 4), 2, Fraction(7, 3)])
def test_gegenbauer_recurrence_exact(alpha):
    # (j+1) C_{j+1} = 2 (j + al) y C_j - (j + 2 al - 1) C_{j-1} at x = 1,
    # carried out on exact coefficient lists in y
    def poly(j):
        p = gegenbauer_two_var(j, alpha)
        assert p.exact
        out = [Fraction(0)] * (j + 1)
        for (px, q), c in p.coeffs.items():
            assert 2 * px + q == j
            out[q] += c
        return out
    al = Fraction(alpha)
    for j in range(1, 20):
        lhs = [(j + 1) * c for c in poly(j + 1)]
        cj, cm = poly(j), poly(j - 1)
        rhs = [Fraction(0)] * (j + 2)
        for q, c in enumerate(cj):
            rhs[q + 1] += 2 * (j + al) * c
        for q, c in enumerate(cm):
            rhs[q] -= (j + 2 * al - 1) * c
        assert lhs == rhs


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 12), st.fractions(min_value=Fraction(-5, 2), max_value=5, max_denominator=8),
       st.fractions(min_value=-3, max_value=3, max_denominator=7))
def test_gegenbauer_homogeneity(j, alpha, lam):
    p = gegenbauer_two_var(j, alpha)
    for (px, q), c in p.coeffs.items():
        # C(l^2 x, l y) = l^j C(x, y), monomial by monomial
        assert c * lam ** (2 * px + q) == c * lam ** j


@pytest.mark.parametrize("j", [0, 1, 3, 6])
@pytest.mark.parametrize("alpha", [0.25, 1.5, -0.75])
def test_gegenbauer_one_var_matches_scipy(j, alpha):
    z = np.linspace(-1, 1, 9)
    ref = eval_gegenbauer(j, alpha, z)
    assert gegenbauer_two_var(j, alpha).one_var(z) == pytest.approx(ref, abs=1e-12)
    assert gegenbauer(j, alpha, z) == pytest.approx(ref, abs=1e-12)


def test_gegenbauer_irrational_order_is_float():
    p = gegenbauer_two_var(3, math.sqrt(2))
    assert not p.exact
    assert p.one_var(0.3) == pytest.approx(eval_gegenbauer(3, math.sqrt(2), 0.3))


# --- constants ---------------------------------------------------------------

def test_model_constants_examples():
    mc = model_constants(euclidean(3, 0.0))
    assert mc.c_real == pytest.approx(1 / (2 * math.pi), rel=1e-12)
    assert mc.iso_real == pytest.approx(2.0, rel=1e-12)
    assert math.isnan(mc.c_heis)
    mh = model_constants(heisenberg(2, -2.0))
    assert mh.c_heis == pytest.approx(1 / (2 * math.pi), rel=1e-12)
    assert mh.iso_heis == pytest.approx(math.pi / 3, rel=1e-12)


@pytest.mark.parametrize("n", [3, 4, 6])
def test_constants_positive_on_range(n):
    for a in np.linspace(2 - n, 1, 9)[1:-1]:
        mc = model_constants(euclidean(n, a))
        assert mc.c_real > 0 and mc.iso_real > 0 and mc.lp_bound_real > 0
    for a in np.linspace(-2 * n, 0, 9)[1:-1]:
        mc = model_constants(heisenberg(n, a))
        assert mc.c_heis > 0 and mc.iso_heis > 0 and mc.lp_bound_heis > 0


def test_constants_closed_forms():
    n, a = 4, -0.3
    assert c_real(n, a) == pytest.approx(
        math.gamma((n - a) / 2) / (math.pi ** ((n - 1) / 2) * math.gamma((1 - a) / 2)))
    assert c_heis(n, -1.7) == pytest.approx(
        2 ** ((2 * n + 1.7 - 4) / 2) * math.gamma((2 * n + 1.7) / 4) ** 2
        / (math.pi ** n * math.gamma(0.85)))
    assert iso_real(-0.5) == pytest.approx(
        2 ** -0.5 * math.pi * math.gamma(2.5) / (math.gamma(0.75) * math.gamma(1.75)))
    assert iso_heis(3, -2.0) == pytest.approx(math.pi * -2 / -8)
    assert c_real_higher(n, a, 0) == pytest.approx(c_real(n, a))


def test_constants_outside_range():
    with pytest.raises(ParameterRangeError):
        model_constants(euclidean(3, 1.5))
    with pytest.raises(ParameterRangeError):
        model_constants(heisenberg(2, 0.5))


def test_lp_exponent_and_bound():
    p = euclidean(3, -0.5)
    assert lp_exponent(p, 2.0) == pytest.approx(3.0)
    assert lp_exponent(heisenberg(2, -1.0), 4.0) == pytest.approx(6.0)
    assert lp_bound(p, math.inf) == 1.0
    assert lp_bound(p, 2.0) == pytest.approx((2 * c_real(3, -0.5) ** 0.5) ** (1 / 3))


@pytest.mark.parametrize("field, k, a, expected", [
    ("euclidean", 0, 0.3, 0.0), ("euclidean", 1, -2.0, -2.0), ("heisenberg", 1, -6.0, -8.0),
    ("heisenberg", 0, -1.0, 0.0)])
def test_eigenvalue_examples(field, k, a, expected):
    assert eigenvalue(field, k, a) == expected


@pytest.mark.parametrize("field, k, a", [("euclidean", 1, 0.0), ("heisenberg", 1, -3.0),
                                         ("euclidean", -1, 0.0), ("other", 0, 0.0)])
def test_eigenvalue_range_errors(field, k, a):
    with pytest.raises(ParameterRangeError):
        eigenvalue(field, k, a)
