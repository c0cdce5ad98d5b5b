import pytest

from confpoisson.params import ModelParams, ParameterRangeError, euclidean, heisenberg


def test_derived_quantities_euclidean():
    p = euclidean(4, -0.5)
    assert p.mu == pytest.approx(-1.25)
    assert p.rho == 2.0 and p.rho_prime == 1.5
    assert p.nu == pytest.approx(-0.75)
    assert p.d == 1 and p.euclidean


def test_derived_quantities_heisenberg():
    p = heisenberg(3, -2.0)
    assert p.rho == 4.0 and p.rho_prime == 3.0 and p.d == 2
    assert not p.euclidean


@pytest.mark.parametrize("field, n", [("euclidean", 1), ("heisenberg", 0), ("spherical", 3)])
def test_invalid_construction(field, n):
    with pytest.raises(ParameterRangeError):
        ModelParams(field, n, 0.0)


def test_n_must_be_integer():
    with pytest.raises(ParameterRangeError):
        euclidean(2.5, 0.0)
    assert euclidean(3.0, 0).n == 3


@pytest.mark.parametrize("p, dirichlet, selfadj, formula", [
    (euclidean(3, 0.5), True, True, True),
    (euclidean(3, 1.5), False, True, False),
    (euclidean(3, -1.0), False, False, True),
    (heisenberg(2, -1.0), True, True, True),
    (heisenberg(2, 1.0), False, True, False),
    (heisenberg(2, -4.0), False, False, True),
])
def test_ranges(p, dirichlet, selfadj, formula):
    assert p.in_dirichlet_range() == dirichlet
    assert p.in_formula_range() == formula
    if selfadj:
        p.require_selfadjoint()
    else:
        with pytest.raises(ParameterRangeError):
            p.require_selfadjoint()
    if not dirichlet:
        with pytest.raises(ParameterRangeError):
            p.require_dirichlet()


def test_with_a():
    assert euclidean(3, 0.0).with_a(0.25) == euclidean(3, 0.25)
