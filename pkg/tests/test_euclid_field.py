import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from confpoisson.euclid_field import (DecayWarning, GridField, apply_delta_a, dft, dilate,
                                      group_action_euclid, idft, invert, lp_norm, sobolev_norm,
                                      star_stencil_field, trace_restrict, translate)


def gauss(x):
    return np.exp(-0.5 * np.sum(np.asarray(x) ** 2, axis=-1))


@pytest.fixture
def grid2d():
    return GridField.centered((64, 64), 0.25, gauss)


def test_centered_grid_contains_origin():
    g = GridField.centered((5, 7), (0.5, 0.1))
    assert g.axis(0)[2] == pytest.approx(0.0)
    assert g.axis(1)[3] == pytest.approx(0.0)
    assert g.points().shape == (35, 2)
    assert g.names == ("x1", "x2")


def test_dft_matches_continuum_transform(grid2d):
    s = dft(grid2d)
    k = s.abs_frequency()
    assert np.max(np.abs(s.coeffs - np.exp(-0.5 * k ** 2))) < 1e-12


def test_dft_roundtrip_with_offset_origin():
    g = GridField.from_function(gauss, [np.linspace(-3, 5, 33), np.linspace(-4, 4, 32)])
    back = idft(dft(g), real=True)
    assert np.allclose(back.samples, g.samples, atol=1e-14)
    assert back.origin == g.origin


def test_plancherel():
    # odd field, so the omitted zero frequency carries nothing
    u = GridField.centered((64, 64), 0.25, lambda x: x[:, 0] * gauss(x))
    assert sobolev_norm(u, 0.0) == pytest.approx(lp_norm(u, 2), rel=1e-10)
    assert lp_norm(u, 2) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-10)


def test_sobolev_gradient_norm(grid2d):
    # ||grad u||_2 for the Gaussian: int |x|^2 e^{-|x|^2} = pi
    assert sobolev_norm(grid2d, 1.0) == pytest.approx(math.sqrt(math.pi), rel=1e-8)


def test_sobolev_rejects_nonintegrable_weight(grid2d):
    with pytest.raises(ValueError):
        sobolev_norm(grid2d, -1.0)


def test_lp_norm_values(grid2d):
    assert lp_norm(GridField.centered((65, 65), 0.25, gauss), math.inf) == pytest.approx(1.0)
    # int e^{-|x|^2} over R^2 = pi
    assert lp_norm(grid2d, 2) == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    with pytest.raises(ValueError):
        lp_norm(grid2d, 0.5)


@pytest.mark.parametrize("a", [-0.5, 0.0, 0.7])
def test_delta_a_exact_on_quadratics(a):
    # u = x1^2 + x_n^2 gives x_n^2 (4) + a x_n (2 x_n)
    g = GridField.from_function(lambda x: x[:, 0] ** 2 + x[:, 1] ** 2,
                                [np.linspace(-1, 1, 9), np.linspace(0.5, 2, 7)])
    out = apply_delta_a(g, a)
    xn = g.mesh()[1]
    assert np.allclose(out.samples[out.valid], ((4 + 2 * a) * xn ** 2)[out.valid])
    assert not out.valid[0, 0] and out.samples[0, 0] == 0.0


def test_trace_restrict():
    g = GridField.centered((4, 5), 0.5, lambda x: x[:, 0] + 10 * x[:, 1])
    tr = trace_restrict(g)
    assert tr.dims == (4,)
    assert np.allclose(tr.samples, g.axis(0))
    with pytest.raises(ValueError):
        trace_restrict(GridField.centered((4, 4), 0.5))


def test_check_decay_warns():
    g = GridField.centered((9,), 0.1, gauss)
    with pytest.warns(DecayWarning):
        g.check_decay()
    assert GridField.centered((201,), 0.1, gauss).check_decay() < 1e-6


def test_star_stencil_has_nan_corners():
    s = star_stencil_field(gauss, [0.3, 0.4], 0.1)
    assert s.dims == (3, 3)
    assert np.isnan(s.samples[0, 0])
    assert s.samples[1, 1] == pytest.approx(gauss(np.array([0.3, 0.4])))
    assert s.samples[2, 1] == pytest.approx(gauss(np.array([0.4, 0.4])))


@settings(max_examples=30)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3).filter(lambda v: sum(x * x for x in v) > 0.01),
       st.floats(-1, 1), st.floats(-2, 0.5))
def test_group_actions(x, s, mu):
    x = np.array(x)
    f = lambda y: np.exp(-np.sum((np.asarray(y) - 0.3) ** 2, axis=-1))
    rho = 1.5
    # inversion is an involution
    assert invert(invert(f, mu, rho), mu, rho)(x) == pytest.approx(f(x), rel=1e-9)
    # dilations compose additively
    d = dilate(dilate(f, s, mu, rho), -s, mu, rho)
    assert d(x) == pytest.approx(f(x), rel=1e-12)
    t = translate(f, [0.5, -0.2])
    assert t(x) == pytest.approx(f(x - np.array([0.5, -0.2, 0.0])))
    assert group_action_euclid("dilate", f, mu, rho, s)(x) == dilate(f, s, mu, rho)(x)


def test_group_action_unknown():
    with pytest.raises(ValueError):
        group_action_euclid("rotate", gauss, 0.0, 1.0)
