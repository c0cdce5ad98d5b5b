import math

import numpy as np
import pytest

from confpoisson.euclid_field import GridField, trace_restrict
from confpoisson.euclid_poisson import (BoundaryData, ToleranceNotMet, boundary_op_coefficients,
                                        boundary_op_real, bump, constant_one,
                                        continuous_family_real, gaussian, higher_poisson_real,
                                        kernel_mass_real, kinv_boundary, kinv_solution_real,
                                        multiplier_symbol, ode_check, phi1_integral,
                                        phi1_integral_closed, poisson_kernel_real,
                                        poisson_multiplier_real, poisson_transform_real,
                                        profile_transform)
from confpoisson.params import ParameterRangeError, euclidean

PTS3 = np.array([[0.2, -0.1, 0.5], [1.0, 0.3, -1.2], [-0.4, 0.8, 2.0]])


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.5])
def test_kernel_mass_is_one(a):
    assert np.allclose(kernel_mass_real(PTS3, euclidean(3, a)), 1.0, atol=1e-9)


@pytest.mark.parametrize("n, a", [(2, 0.0), (3, -0.5), (3, 0.5), (4, -1.0)])
def test_quadrature_matches_closed_form(n, a):
    p = euclidean(n, a)
    rng = np.random.default_rng(3)
    x = rng.uniform(-1.5, 1.5, (4, n))
    num = poisson_transform_real(kinv_boundary(p), x, p, tol=1e-11)
    assert num == pytest.approx(kinv_solution_real(x, p), rel=1e-8)


def test_kernel_is_positive_and_scales():
    p = euclidean(3, 0.0)
    x, y = np.array([0.1, 0.2, 0.7]), np.array([0.5, -0.3])
    k = poisson_kernel_real(x, y, p)
    # K(lx, ly) = l^(1-n) K(x, y)
    assert k > 0
    assert poisson_kernel_real(2 * x, 2 * y, p) == pytest.approx(k * 2.0 ** (1 - 3))


def test_boundary_points_return_data():
    p = euclidean(3, 0.0)
    f = gaussian([0.0, 0.0], 1.0)
    x = np.array([[0.3, 0.4, 0.0]])
    assert poisson_transform_real(f, x, p)[0] == pytest.approx(math.exp(-0.125))


def test_translation_equivariance():
    p = euclidean(3, -0.5)
    v = np.array([0.4, -0.7])
    f = gaussian([0.1, 0.2], 0.8)
    g = gaussian([0.5, -0.5], 0.8)
    u_f = poisson_transform_real(f, PTS3 - np.append(v, 0.0), p)
    u_g = poisson_transform_real(g, PTS3, p)
    assert u_g == pytest.approx(u_f, rel=1e-9)


def test_out_of_range_rejected():
    with pytest.raises(ParameterRangeError):
        poisson_transform_real(constant_one(), PTS3, euclidean(3, 1.2))
    with pytest.raises(ParameterRangeError):
        higher_poisson_real(constant_one(), 1, PTS3, euclidean(3, 0.0))


def test_tolerance_not_met_for_rough_data():
    p = euclidean(2, 0.0)
    disc = BoundaryData(lambda y: (np.abs(y[..., 0]) < 1.0).astype(float))
    with pytest.raises(ToleranceNotMet) as info:
        poisson_transform_real(disc, np.array([[0.9, 0.05]]), p, tol=1e-14)
    assert info.value.achieved > 1e-14


def test_bump_support():
    b = bump([0.0, 0.0], 0.5)
    assert b(np.array([0.6, 0.0])) == 0.0
    assert b(np.array([0.0, 0.0])) == pytest.approx(1.0)


def test_continuous_family_symmetries():
    p = euclidean(3, -0.5)
    f = gaussian([0.1, 0.0], 0.7)
    x = PTS3[:1]
    v = continuous_family_real(f, 0.5, 0, x, p)
    assert np.iscomplexobj(v) and abs(v[0]) > 0
    # nu -> -nu is complex conjugation for real data
    assert continuous_family_real(f, -0.5, 0, x, p) == pytest.approx(np.conj(v), rel=1e-9)
    # eps = 1 is odd in x_n
    mirror = x * [1, 1, -1]
    odd = continuous_family_real(f, 0.5, 1, np.vstack([x, mirror]), p)
    assert odd[1] == pytest.approx(-odd[0], rel=1e-12)


def test_multiplier_matches_quadrature():
    p = euclidean(2, 0.0)
    f = gaussian([0.0], 1.0)
    L, h = 256, 0.125
    data = f.sample((int(2 * L / h),), h)
    u = poisson_multiplier_real(data, p, [0.5, 1.0])
    i = data.grid.dims[0] // 2
    pts = np.array([[data.grid.axis(0)[i], 0.5], [data.grid.axis(0)[i], 1.0]])
    ref = poisson_transform_real(f, pts, p)
    # periodisation error decays slowly in n = 2
    assert u.samples[i, :] == pytest.approx(ref, rel=1e-4)


def test_profile_transform_half_order():
    # a = 0 gives b = 1/2 and Phi(r) = e^(-r)
    r = np.linspace(0, 5, 11)
    assert profile_transform(r, 0.0) == pytest.approx(np.exp(-r), rel=1e-12)
    assert profile_transform(np.array([0.0]), -0.7)[0] == 1.0


def test_multiplier_symbol_homogeneity():
    s = multiplier_symbol(np.array([2.0]), np.array([3.0]), -0.5)
    assert multiplier_symbol(np.array([1.0]), np.array([1.5]), -0.5) == pytest.approx(2 * s)


@pytest.mark.parametrize("a", [-1.0, -0.5, 0.0, 0.5])
def test_profile_ode(a):
    z = np.linspace(-10, 10, 41)
    assert np.max(np.abs(ode_check(a, "phi1", z))) < 1e-10
    assert np.max(np.abs(ode_check(a, "phi2", z))) < 1e-8
    val, _ = phi1_integral(a)
    assert val == pytest.approx(phi1_integral_closed(a), rel=1e-8)


def test_boundary_op_coefficients_low_order():
    assert boundary_op_coefficients(0, -0.5) == {(0, 0): pytest.approx(1.0)}
    c1 = boundary_op_coefficients(1, -2.0)
    assert c1 == {(0, 1): pytest.approx(1.0)}
    with pytest.raises(ParameterRangeError):
        boundary_op_coefficients(1, 1.0)


def test_boundary_op_real_on_polynomial_profile():
    # u = g(x') (1 + 3 x_n): D_0 u = g, D_1 u = 3 g
    p = euclidean(2, -2.0)
    xs = np.linspace(-8, 8, 129)[:-1]
    xn = np.linspace(-0.1, 0.1, 5)
    u = GridField.from_function(lambda x: np.exp(-x[:, 0] ** 2) * (1 + 3 * x[:, 1]), [xs, xn])
    g = np.exp(-xs ** 2)
    assert boundary_op_real(u, 0, p).samples == pytest.approx(g)
    assert boundary_op_real(u, 1, p).samples == pytest.approx(3 * g, abs=1e-12)
    assert trace_restrict(u).samples == pytest.approx(g)
    with pytest.raises(ParameterRangeError):
        boundary_op_real(u, 2, p)


def test_solution_even_in_normal_variable():
    p = euclidean(3, 0.25)
    f = gaussian([0.3, -0.2], 0.9)
    u = poisson_transform_real(f, np.vstack([PTS3, PTS3 * [1, 1, -1]]), p)
    assert u[3:] == pytest.approx(u[:3], rel=1e-12)


def test_kernel_mass_at_random_points():
    rng = np.random.default_rng(7)
    x = np.column_stack([rng.uniform(-2, 2, (20, 2)), rng.uniform(0.1, 2, 20)])
    assert np.allclose(kernel_mass_real(x, euclidean(3, -0.5)), 1.0, atol=1e-9)
