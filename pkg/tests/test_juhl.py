from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from confpoisson.euclid_field import GridField
from confpoisson.juhl import (DegenerateParameterError, IDENTITY, add, apply_tree, compose, expand,
                              from_sexpr, gen, juhl_apply, juhl_build, juhl_parameter,
                              restrict_D_ak, scale, to_sexpr, tree_depth)
from confpoisson.params import heisenberg

L_, LP_, T_ = sp.symbols("L Lp T", commutative=False)
SYM = {"L": L_, "Lp": LP_, "T": T_}


def sympy_reference(s, k, n):
    """Recursion written directly over noncommutative sympy symbols."""
    s = sp.Rational(s)
    m = 2 * s + n
    if k == 0:
        return sp.Integer(1)
    if k == 1:
        if 0 in (s, m):
            raise ZeroDivisionError
        return ((m - 1) * L_ - m * LP_) / (16 * s ** 2 * m)
    j = k - 1
    if 0 in (s, m, m - 1, s - j):
        raise ZeroDivisionError
    first = ((m - 2 * j - 1) * L_ - m * LP_) * sympy_reference(s, j, n)
    c2 = -sp.Integer(j * j) * (m - 2 * j - 1) / (16 * s ** 2 * (m - 1) * m)
    second = c2 * (L_ * L_ + 16 * m ** 2 * T_) * sympy_reference(s - 1, j - 1, n)
    return sp.expand((first + second) / (16 * (s - j) ** 2 * m))


def to_sympy(poly):
    out = sp.Integer(0)
    for word, c in poly.items():
        term = sp.Rational(c.numerator, c.denominator)
        for letter in word:
            term = term * SYM[letter]
        out += term
    return sp.expand(out)


@pytest.mark.parametrize("s", [Fraction(-1, 4), Fraction(3, 2), Fraction(-7, 3), 2])
@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("n", [2, 3])
def test_expansion_matches_sympy(s, k, n):
    try:
        ref = sympy_reference(s, k, n)
    except ZeroDivisionError:
        with pytest.raises(DegenerateParameterError):
            juhl_build(s, k, n)
        return
    op = juhl_build(s, k, n)
    assert sp.expand(to_sympy(op.expand()) - ref) == 0


def test_known_order_two_operator():
    op = juhl_build(juhl_parameter(heisenberg(3, -5.0)), 2, 3)
    assert op.s == Fraction(-1, 4)
    assert op.expand() == {("L", "L"): Fraction(-1, 375), ("L", "Lp"): Fraction(1, 125),
                           ("Lp", "L"): Fraction(-3, 125), ("Lp", "Lp"): Fraction(1, 25),
                           ("T",): Fraction(16, 75)}
    assert tree_depth(op.tree) == 2


def test_order_zero_is_identity():
    assert juhl_build(Fraction(1, 3), 0, 2).expand() == {(): 1}


@pytest.mark.parametrize("s, k, n", [(0, 1, 3), (Fraction(-3, 2), 1, 3), (1, 2, 2)])
def test_degenerate_parameters(s, k, n):
    with pytest.raises(DegenerateParameterError):
        juhl_build(s, k, n)


def test_irrational_parameter_gives_floats():
    op = juhl_build(2 ** 0.5, 1, 2)
    assert all(isinstance(c, float) for c in op.expand().values())


leaves = st.sampled_from([IDENTITY, gen("L"), gen("Lp"), gen("T")])
coeffs = st.fractions(min_value=-50, max_value=50, max_denominator=97)
trees = st.recursive(
    leaves,
    lambda ch: st.one_of(
        st.builds(scale, coeffs, ch),
        st.lists(ch, min_size=1, max_size=3).map(lambda xs: add(*xs)),
        st.lists(ch, min_size=1, max_size=3).map(lambda xs: compose(*xs))),
    max_leaves=12)


@settings(max_examples=100)
@given(trees)
def test_sexpr_round_trip(tree):
    text = to_sexpr(tree)
    back = from_sexpr(text)
    assert back == tree
    assert to_sexpr(back) == text
    assert expand(back) == expand(tree)


def test_sexpr_decimal_and_errors():
    node = from_sexpr("(scale 0.5 (compose L Lp))")
    assert expand(node) == {("L", "Lp"): 0.5}
    for bad in ["(scale 1 L", "(foo L)", "(sum)", "L Lp", "X", ")"]:
        with pytest.raises(ValueError):
            from_sexpr(bad)


def _biradial(func, n=4, h=0.1):
    ax = [h * np.arange(n + 2), h * np.arange(n + 2), 0.3 + h * np.arange(-n, n + 1)]
    return GridField.from_function(func, ax)


@pytest.mark.parametrize("name, expected", [
    ("L", lambda R, r, t, n: 4 * (n - 1) + 4 + 8 * (R ** 2 + r ** 2)),
    ("Lp", lambda R, r, t, n: 4 * (n - 1) + 8 * R ** 2),
    ("T", lambda R, r, t, n: 2 + 0 * R),
])
@pytest.mark.parametrize("n", [2, 3])
def test_biradial_generators_exact_on_quadratics(name, expected, n):
    # u = |z'|^2 + |z_n|^2 + t^2, including the reflected R = 0 and rho = 0 rows
    u = _biradial(lambda p: p[:, 0] ** 2 + p[:, 1] ** 2 + p[:, 2] ** 2)
    v = juhl_apply(juhl_build(1, 0, n), u)
    assert np.allclose(v.samples, u.samples)
    res = apply_tree(gen(name), u, n)
    R, r, t = u.mesh()
    ref = expected(R, r, t, n)
    assert np.allclose(res.samples[res.valid], ref[res.valid], atol=1e-9)
    assert res.valid[0, 0, 4]


def test_full_and_biradial_layouts_agree():
    n = 2
    s = Fraction(3, 4)
    op = juhl_build(s, 1, n)
    h = 0.1
    ax = h * np.arange(-2, 3)
    full = GridField.from_function(
        lambda p: p[:, 0] ** 2 + p[:, 1] ** 2 + 2 * (p[:, 2] ** 2 + p[:, 3] ** 2) + p[:, 4] ** 2,
        [ax + 0.4, ax, ax + 0.5, ax, ax + 0.2])
    bi = GridField.from_function(lambda p: p[:, 0] ** 2 + 2 * p[:, 1] ** 2 + p[:, 2] ** 2,
                                 [ax + 0.4, ax + 0.5, ax + 0.2])
    vf = juhl_apply(op, full, layout="full").samples[2, 2, 2, 2, 2]
    vb = juhl_apply(op, bi).samples[2, 2, 2]
    assert vf == pytest.approx(vb, rel=1e-10)
    with pytest.raises(ValueError):
        juhl_apply(op, bi, layout="full")


def test_restrict_order_one_on_rho_squared():
    p = heisenberg(3, -5.0)
    u = _biradial(lambda q: q[:, 1] ** 2)
    res = restrict_D_ak(u, 1, p)
    s = Fraction(-1, 4)
    m = 2 * s + 3
    expected = float(4 * (m - 1) / (16 * s * s * m))
    assert res.dims == (6, 9)
    assert np.allclose(res.samples[res.valid], expected)
    shifted = GridField(u.samples, u.spacing, (0.0, 0.05, 0.0))
    with pytest.raises(ValueError):
        restrict_D_ak(shifted, 1, p)
