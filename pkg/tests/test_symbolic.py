import json
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finrig.errors import BudgetError, ValidationError
from finrig.symbolic import (
    CylinderFunction,
    ThetaMetric,
    Word,
    cylinder_decomposition_sum,
    d_theta,
    equilibrium_data,
    normalize_potential,
    periodic_sum,
    shift_equidistribution_error,
    transfer_cylinder,
)

L13 = CylinderFunction(2, 1, np.log([1 / 3, 2 / 3]))
HALF = CylinderFunction(2, 1, np.log([0.5, 0.5]))


def brute_periodic_sum(psi, phi, n):
    """Direct enumeration over words, reading functions off ``w w w ...``."""
    s = psi.s
    acc = Z = 0.0
    for w in product(range(s), repeat=n):
        x = (w * (psi.depth + phi.depth + n))
        S = sum(psi(x[k:]) for k in range(n))
        Z += np.exp(S)
        acc += np.exp(S) * phi(x)
    return acc, Z


def test_d_theta_examples():
    assert d_theta((0, 1, 1), (0, 0, 1), 0.5) == 0.5
    assert d_theta((1, 1), (1, 1), 0.5) == 0.25
    assert d_theta((1, 0), (0, 1), 0.3) == 1
    assert ThetaMetric(0.5)(Word((0, 1), 2), Word((0, 1, 1), 2)) == 0.25
    with pytest.raises(ValidationError):
        d_theta((), (0,), 0.5)
    with pytest.raises(ValidationError):
        ThetaMetric(1.0)


def test_word_and_function_validation():
    assert Word((1, 0, 1), 2).index == 5
    for bad in ((), (0, 2)):
        with pytest.raises(ValidationError):
            Word(bad, 2)
    with pytest.raises(ValidationError):
        CylinderFunction(2, 2, [1.0, 2.0, 3.0])
    f = CylinderFunction(3, 2, np.arange(9.0))
    assert f((2, 1, 0)) == 7
    assert CylinderFunction.from_json(f.to_json()).values.tolist() == f.values.tolist()
    assert json.loads(f.to_json())["depth"] == 2
    np.testing.assert_array_equal(f.extend(3)((2, 1, 0)), 7)


def test_equilibrium_examples():
    eq = equilibrium_data(HALF)
    assert eq.pressure == pytest.approx(0, abs=1e-15)
    np.testing.assert_allclose(eq.probabilities, [0.5, 0.5])
    eq = equilibrium_data(L13)
    assert eq.pressure == pytest.approx(0, abs=1e-15)
    assert eq.measure((0,)) == pytest.approx(1 / 3)
    assert eq.measure((0, 0)) == pytest.approx(1 / 9)
    np.testing.assert_allclose(transfer_cylinder(L13, eq.eigenfunction).values, 1.0)
    eq = equilibrium_data(CylinderFunction.constant(0, 3))
    assert eq.pressure == pytest.approx(np.log(3))
    np.testing.assert_allclose(eq.cylinder_measures(1), 1 / 3)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.integers(1, 7))
def test_cylinder_measures_sum_to_one(vals, depth):
    eq = equilibrium_data(CylinderFunction(3, 1, vals))
    assert abs(eq.cylinder_measures(depth).sum() - 1) <= 1e-12


def test_periodic_sum_examples():
    assert periodic_sum(L13, CylinderFunction.constant(1, 2), 3)[1] == pytest.approx(1, abs=1e-15)
    assert periodic_sum(HALF, CylinderFunction.indicator((0,), 2), 2)[0] == pytest.approx(0.5)
    assert periodic_sum(CylinderFunction.constant(0, 2), CylinderFunction.constant(1, 2), 4)[1] == 16
    with pytest.raises(BudgetError):
        periodic_sum(HALF, HALF, 25)


def test_periodic_sum_reads_periodic_continuation():
    # n < depth(phi): word (0) is 000..., so chi_[00] sees it
    assert periodic_sum(L13, CylinderFunction.indicator((0, 0), 2), 1)[0] == pytest.approx(1 / 3)


def test_decomposition_examples():
    chi0 = CylinderFunction.indicator((0,), 2)
    assert cylinder_decomposition_sum(L13, chi0, 2) == pytest.approx(1 / 3, rel=1e-14)
    assert cylinder_decomposition_sum(L13, CylinderFunction.constant(0, 2), 3) == 0


def _random_pair(rng, s):
    psi = CylinderFunction(s, 1, rng.normal(size=s))
    m = int(rng.integers(1, 3))
    phi = CylinderFunction(s, m, rng.normal(size=s ** m))
    return psi, phi


def test_decomposition_identity_random():
    rng = np.random.default_rng(7)
    for _ in range(100):
        s = int(rng.choice([2, 3]))
        psi, phi = _random_pair(rng, s)
        n = int(rng.integers(phi.depth, 13 if s == 2 else 10))
        a, _ = periodic_sum(psi, phi, n)
        b = cylinder_decomposition_sum(psi, phi, n)
        assert b == pytest.approx(a, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("s,n", [(2, 1), (2, 3), (3, 3), (2, 6)])
def test_decomposition_exhaustive_and_brute_force(s, n):
    rng = np.random.default_rng(s * 10 + n)
    psi, phi = _random_pair(rng, s)
    n = max(n, phi.depth)
    a, Z = periodic_sum(psi, phi, n)
    ref, Zref = brute_periodic_sum(psi, phi, n)
    assert a == pytest.approx(ref, rel=1e-12) and Z == pytest.approx(Zref, rel=1e-12)
    assert cylinder_decomposition_sum(psi, phi, n, exhaustive=True) == pytest.approx(a, rel=1e-10)


def test_exhaustive_budget():
    with pytest.raises(BudgetError):
        cylinder_decomposition_sum(HALF, HALF, 13, exhaustive=True)


def test_normalized_partition_function_is_one():
    rng = np.random.default_rng(3)
    psi = normalize_potential(CylinderFunction(3, 1, rng.normal(size=3)))
    one = CylinderFunction.constant(1, 3)
    for n in range(1, 13):
        assert periodic_sum(psi, one, n)[1] == pytest.approx(1, abs=1e-12)


@settings(max_examples=20)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_partition_function_bounded(vals):
    psi = CylinderFunction(2, 1, vals)
    P = equilibrium_data(psi).pressure
    one = CylinderFunction.constant(1, 2)
    r = [periodic_sum(psi, one, n)[1] * np.exp(-n * P) for n in range(1, 17)]
    np.testing.assert_allclose(r, 1, rtol=1e-12)


def test_equidistribution_examples():
    assert shift_equidistribution_error(L13, CylinderFunction.indicator((0,), 2), 3) < 1e-15
    assert shift_equidistribution_error(L13, CylinderFunction.indicator((0, 0), 2), 1) == pytest.approx(2 / 9)
    assert shift_equidistribution_error(L13, CylinderFunction.constant(4.0, 2), 5) < 1e-14


def test_equidistribution_exact_beyond_depth():
    # Bernoulli periodic averages are exact once n >= depth(phi)
    rng = np.random.default_rng(11)
    psi = CylinderFunction(2, 1, rng.normal(size=2))
    phi = CylinderFunction(2, 4, rng.normal(size=16))
    err = [shift_equidistribution_error(psi, phi, n) for n in range(1, 16)]
    assert min(err[:3]) > 1e-6
    assert max(err[3:]) < 1e-13


def test_transfer_cylinder_against_definition():
    rng = np.random.default_rng(5)
    psi = CylinderFunction(3, 2, rng.normal(size=9))
    phi = CylinderFunction(3, 1, rng.normal(size=3))
    out = transfer_cylinder(psi, phi)
    for w in product(range(3), repeat=2):
        ref = sum(np.exp(psi((i,) + w)) * phi((i,) + w) for i in range(3))
        assert out(w) == pytest.approx(ref, rel=1e-13)


def test_transfer_preserves_equilibrium_integral():
    rng = np.random.default_rng(9)
    psi = normalize_potential(CylinderFunction(2, 1, rng.normal(size=2)))
    phi = CylinderFunction(2, 3, rng.normal(size=8))
    eq = equilibrium_data(psi)
    assert eq.integrate(transfer_cylinder(psi, phi)) == pytest.approx(eq.integrate(phi), rel=1e-13)
