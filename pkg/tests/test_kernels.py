"""The numba kernels and their numpy twins must agree."""
import numpy as np
import pytest

from finrig import _kernels
from finrig._kernels import _numpy as ref

jit = _kernels.jit_backend
pytestmark = pytest.mark.skipif(jit is None, reason="numba unavailable")

MAPS = [
    (2, np.array([]), np.array([])),
    (2, np.array([0.5]), np.array([])),
    (3, np.array([0.4, -0.3]), np.array([])),
    (2, np.array([]), np.array([0.2])),
    (2, np.array([0.3]), np.array([0.2, -0.4])),
]


@pytest.mark.parametrize("params", MAPS)
def test_lift_eval(params, rng):
    x = rng.uniform(-1, 2, 500)
    for a, b in zip(ref.lift_eval(x, *params), jit.lift_eval(x, *params)):
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


@pytest.mark.parametrize("params", MAPS)
def test_branch_solve(params, rng):
    d = params[0]
    y = rng.uniform(0, 1, 300)
    j = rng.integers(0, d, 300)
    xa, oka = ref.branch_solve(y, j, *params)
    xb, okb = jit.branch_solve(y, j, *params)
    assert oka.all() and okb.all()
    np.testing.assert_allclose(xa, xb, atol=1e-14)


@pytest.mark.parametrize("params", MAPS)
def test_periodic_table(params):
    d = params[0]
    N = 6 if d == 2 else 4
    pa, oka = ref.periodic_table(N, *params, 1e-14, 5000)
    pb, okb = jit.periodic_table(N, *params, 1e-14, 5000)
    assert oka.all() and okb.all()
    np.testing.assert_allclose(pa, pb, atol=1e-13)


def test_compose_and_itinerary(rng):
    params = MAPS[4]
    digits = rng.integers(0, 2, (50, 12))
    seed = np.zeros(50)
    np.testing.assert_allclose(ref.compose_branches(digits, seed, *params)[0],
                               jit.compose_branches(digits, seed, *params)[0], atol=1e-14)
    x = rng.uniform(0, 1, 200)
    np.testing.assert_array_equal(ref.itinerary(x, 8, *params), jit.itinerary(x, 8, *params))


def test_transfer_step(rng):
    G, d = 64, 3
    phi = rng.normal(size=G)
    idx = rng.integers(0, G, (G, d))
    frac = rng.uniform(0, 1, (G, d))
    w = rng.uniform(0, 1, (G, d))
    np.testing.assert_allclose(ref.transfer_step(phi, idx, frac, w), jit.transfer_step(phi, idx, frac, w),
                               rtol=1e-14)


@pytest.mark.parametrize("s,n,pd,fd", [(2, 10, 1, 2), (3, 6, 2, 1), (2, 1, 1, 2)])
def test_word_sums(s, n, pd, fd, rng):
    psi = rng.normal(size=s ** pd)
    phi = rng.normal(size=s ** fd)
    a = ref.word_sums(psi, pd, phi, fd, s, n)
    b = jit.word_sums(psi, pd, phi, fd, s, n)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_large_scale_quotient(rng):
    v = rng.normal(size=257)
    for delta in (0.0, 0.1, 0.37):
        assert ref.large_scale_quotient(v, delta) == pytest.approx(jit.large_scale_quotient(v, delta), rel=1e-14)


def test_backend_flag(monkeypatch):
    import importlib

    monkeypatch.setenv("FINRIG_DISABLE_JIT", "1")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND_NAME == "numpy"
        assert mod.backend is ref
    finally:
        monkeypatch.delenv("FINRIG_DISABLE_JIT")
        importlib.reload(_kernels)
