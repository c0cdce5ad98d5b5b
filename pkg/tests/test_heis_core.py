import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from confpoisson.euclid_field import GridField
from confpoisson.heis_core import (apply_cr_laplacian, apply_L_a, biradial_reduced_apply, dilate,
                                   embed_boundary, heis_inv, heis_mul, koranyi_norm,
                                   radial_reduced_apply)

pt = arrays(np.float64, 5, elements=st.floats(-3, 3))


@settings(max_examples=100)
@given(pt, pt, pt)
def test_group_law_associative(p, q, r):
    assert np.allclose(heis_mul(heis_mul(p, q), r), heis_mul(p, heis_mul(q, r)), atol=1e-10)


@settings(max_examples=100)
@given(pt, pt)
def test_inverse_and_norm(p, q):
    assert np.allclose(heis_mul(p, heis_inv(p)), 0.0, atol=1e-12)
    assert koranyi_norm(heis_inv(p)) == pytest.approx(koranyi_norm(p))
    # the gauge satisfies the triangle inequality on H^5
    assert koranyi_norm(heis_mul(p, q)) <= koranyi_norm(p) + koranyi_norm(q) + 1e-9


@settings(max_examples=50)
@given(pt, pt, st.floats(0.1, 5))
def test_dilation_is_automorphism(p, q, r):
    lhs = dilate(heis_mul(p, q), r)
    assert np.allclose(lhs, heis_mul(dilate(p, r), dilate(q, r)), atol=1e-9)
    assert koranyi_norm(dilate(p, r)) == pytest.approx(r * koranyi_norm(p), abs=1e-12)


def test_group_law_example():
    p = np.array([1.0, 0.0, 0.0])
    q = np.array([0.0, 1.0, 0.0])
    # t picks up 2 Im(z conj(z')) = 2 Im(1 * (-i)) = -2
    assert heis_mul(p, q) == pytest.approx([1.0, 1.0, -2.0])


def test_embed_boundary():
    assert embed_boundary(np.array([1.0, 2.0, 3.0])) == pytest.approx([1, 2, 0, 0, 3])


def _grid(func, h=0.1):
    ax = [np.linspace(-0.5, 0.5, 11), np.linspace(0.2, 1.0, 9), np.linspace(-0.4, 0.4, 9)]
    return GridField.from_function(func, ax)


@pytest.mark.parametrize("func, expected", [
    (lambda p: p[:, 0] ** 2 + p[:, 1] ** 2, lambda p: 4.0 + 0 * p[:, 0]),
    (lambda p: p[:, 2] ** 2, lambda p: 8.0 * (p[:, 0] ** 2 + p[:, 1] ** 2)),
    (lambda p: p[:, 0] * p[:, 2], lambda p: 4.0 * p[:, 1]),
])
def test_cr_laplacian_exact_on_quadratics(func, expected):
    u = _grid(func)
    out = apply_cr_laplacian(u)
    ref = expected(u.points()).reshape(u.dims)
    assert np.allclose(out.samples[out.valid], ref[out.valid], atol=1e-10)


@pytest.mark.parametrize("a", [-1.5, -0.5])
def test_L_a_on_radial_quadratic(a):
    u = _grid(lambda p: p[:, 0] ** 2 + p[:, 1] ** 2)
    out = apply_L_a(u, a)
    r2 = (u.mesh()[0] ** 2 + u.mesh()[1] ** 2)
    assert np.allclose(out.samples[out.valid], ((4 + 2 * a) * r2)[out.valid], atol=1e-10)


def test_reduced_forms_agree_with_full_operator():
    # n = 1: radial functions of z, reduced over (rho, t)
    a = -0.7
    g = lambda r2, t: np.exp(-r2 - t * t)
    h = 0.01
    full = GridField.from_function(lambda p: g(p[:, 0] ** 2 + p[:, 1] ** 2, p[:, 2]),
                                   [0.6 + h * np.arange(-1, 2), h * np.arange(-1, 2),
                                    0.3 + h * np.arange(-1, 2)])
    red = GridField.from_function(lambda p: g(p[:, 0] ** 2, p[:, 1]),
                                  [0.6 + h * np.arange(-1, 2), 0.3 + h * np.arange(-1, 2)])
    v_full = apply_L_a(full, a).samples[1, 1, 1]
    v_red = radial_reduced_apply(red, a).samples[1, 1]
    # exact value from rho^2 (f'' + f'/rho + 4 rho^2 f_tt) + a rho f'
    rho, t = 0.6, 0.3
    e = np.exp(-rho ** 2 - t * t)
    fr, frr, ftt = -2 * rho * e, (4 * rho ** 2 - 2) * e, (4 * t * t - 2) * e
    exact = rho ** 2 * (frr + fr / rho + 4 * rho ** 2 * ftt) + a * rho * fr
    assert v_full == pytest.approx(exact, rel=1e-3)
    assert v_red == pytest.approx(exact, rel=1e-3)


def test_biradial_matches_analytic():
    n, a = 2, -1.0
    h = 0.005
    R0, rho0, t0 = 0.5, 0.7, 0.2
    u = GridField.from_function(lambda p: np.exp(-p[:, 0] ** 2 - 2 * p[:, 1] ** 2 - p[:, 2] ** 2),
                                [R0 + h * np.arange(-1, 2), rho0 + h * np.arange(-1, 2),
                                 t0 + h * np.arange(-1, 2)])
    v = biradial_reduced_apply(u, n, a).samples[1, 1, 1]
    e = np.exp(-R0 ** 2 - 2 * rho0 ** 2 - t0 ** 2)
    fR, fRR = -2 * R0 * e, (4 * R0 ** 2 - 2) * e
    fr, frr = -4 * rho0 * e, (16 * rho0 ** 2 - 4) * e
    ftt = (4 * t0 ** 2 - 2) * e
    exact = rho0 ** 2 * (fRR + (2 * n - 3) / R0 * fR + 4 * R0 ** 2 * ftt
                         + frr + (a + 1) / rho0 * fr + 4 * rho0 ** 2 * ftt)
    assert v == pytest.approx(exact, rel=1e-4)
