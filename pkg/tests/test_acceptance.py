"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from finrig import (
    ValidationError,
    bowen_measure,
    conjugate_map,
    doubling,
    make_trig_map,
    partition_bound_check,
    periodic_points,
)
from finrig.cones import (
    ConeParams,
    diameter_bound,
    hilbert_metric,
    theta_seminorm,
    verify_certified_decay,
)
from finrig.conjugacy import (
    build_hN,
    c0_distance,
    c1_distance,
    cdf_error,
    conjugacy_point,
    conjugated_map,
    equidistribution_error,
    fit_rate,
    large_scale_quotient,
    c1_quotient_bound,
    periodic_data_defect,
)
from finrig.symbolic import (
    CylinderFunction,
    cylinder_decomposition_sum,
    normalize_potential,
    periodic_sum,
    transfer_cylinder,
)


@pytest.fixture
def report(capsys):
    def _report(label, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance] {label}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return _report


def test_ac1_doubling_periodic_exactness(report):
    t0 = time.perf_counter()
    worst = 0.0
    f = doubling()
    for N in range(1, 17):
        n = 2 ** N - 1
        mu = bowen_measure(f, None, N)
        worst = max(
            worst,
            np.abs(mu.atoms - np.arange(n) / n).max(),
            np.abs(mu.weights - 1 / n).max(),
            abs(mu.Z - n / 2 ** N),
        )
    elapsed = time.perf_counter() - t0
    report("1 doubling exactness", worst <= 1e-12 and elapsed < 10, f"max err {worst:.2e}, {elapsed:.2f} s")


def test_ac2_cdf_discrepancy_closed_form(report):
    f = doubling()
    errs = {N: cdf_error(f, N) for N in range(3, 15)}
    worst = max(abs(e - 1 / (2 ** N - 1)) for N, e in errs.items())
    fit = fit_rate([(N, errs[N]) for N in range(4, 15)])
    ok = worst <= 1e-10 and 0.49 <= fit.lam <= 0.51 and fit.r2 >= 0.999
    report("2 cdf discrepancy", ok, f"max err {worst:.2e}, lambda {fit.lam:.4f}, R2 {fit.r2:.5f}")


def test_ac3_nonlinear_equidistribution_decay(report):
    t0 = time.perf_counter()
    f = make_trig_map(2, [0.5])
    phi = lambda x: np.sin(2 * np.pi * x)
    pts = [(N, equidistribution_error(f, phi, N)) for N in range(6, 17)]
    elapsed = time.perf_counter() - t0
    try:
        fit = fit_rate(pts)
        ok = fit.lam < 0.8 and fit.r2 >= 0.98 and elapsed < 60
        detail = f"lambda {fit.lam:.4f}, R2 {fit.r2:.4f}, {elapsed:.1f} s"
    except ValidationError as exc:
        ok = False
        detail = f"max error {max(e for _, e in pts):.1e}, no fit: {exc}"
    report("3 nonlinear equidistribution", ok, detail)


def test_ac4_conjugacy_recovery(report):
    g = doubling()
    f = conjugate_map(g, 0.2)
    G = 1 << 14
    defect = max(periodic_data_defect(f, g, N) for N in range(1, 11))
    hN = build_hN(f, g, G)
    c0 = c0_distance(lambda x: conjugacy_point(f, g, x, 40), hN.h, G)
    c1 = c1_distance(f, conjugated_map(g, hN), G)
    same = all(build_hN(f, g, G, N=N).h.values.tobytes() == hN.h.values.tobytes() for N in (4, 7, 10))
    ok = defect <= 1e-8 and c0 <= 1e-4 and c1 <= 1e-3 and same
    report("4 conjugacy recovery", ok, f"defect {defect:.1e}, c0 {c0:.1e}, c1 {c1:.1e}, N-independent {same}")


def test_ac5_shift_identity(report):
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(100):
        s = int(rng.choice([2, 3]))
        psi = CylinderFunction(s, 1, rng.normal(size=s))
        m = int(rng.integers(1, 3))
        phi = CylinderFunction(s, m, rng.normal(size=s ** m))
        n = int(rng.integers(m, 13))
        a, _ = periodic_sum(psi, phi, n)
        b = cylinder_decomposition_sum(psi, phi, n)
        worst = max(worst, abs(a - b) / abs(a))
    zdev = 0.0
    for s in (2, 3):
        psi = normalize_potential(CylinderFunction(s, 1, rng.normal(size=s)))
        for n in range(1, 13):
            zdev = max(zdev, abs(periodic_sum(psi, CylinderFunction.constant(1, s), n)[1] - 1))
    report("5 shift identity", worst <= 1e-10 and zdev <= 1e-12, f"max rel gap {worst:.1e}, max |Z_n - 1| {zdev:.1e}")


def _cone_element(rng, s, m, theta, L):
    g = np.zeros((s,) * m) + rng.normal(size=s).reshape((s,) + (1,) * (m - 1))
    for j in range(1, m):
        shape = [1] * m
        shape[j] = s
        g = g + (rng.uniform(-1, 1, size=s) * L * theta ** j * (1 - theta) / 2).reshape(shape)
    return CylinderFunction(s, m, np.exp(g).reshape(-1))


def test_ac6_certificate_soundness(report):
    theta, xi = 0.5, 0.75
    psi = CylinderFunction(2, 1, np.log([1 / 3, 2 / 3]))
    rng = np.random.default_rng(6)
    phis = [CylinderFunction.indicator((0,), 2), CylinderFunction.indicator((1,) * 12, 2)]
    phis += [CylinderFunction(2, m, rng.normal(size=2 ** m)) for m in (2, 5, 8)]
    decay = all(verify_certified_decay(psi, phi, 20, theta=theta, xi=xi) for phi in phis)
    worst = -np.inf
    for _ in range(100):
        pot = normalize_potential(CylinderFunction(2, 1, rng.uniform(0, 1.5, size=2)))
        L = theta * theta_seminorm(pot, theta) / (xi - theta) + 0.1
        p = ConeParams(theta, xi, L)
        a, b = _cone_element(rng, 2, 3, theta, L), _cone_element(rng, 2, 3, theta, L)
        tau = math.tanh(diameter_bound(xi, L) / 4)
        after = hilbert_metric(transfer_cylinder(pot, a), transfer_cylinder(pot, b), p)
        worst = max(worst, after - tau * hilbert_metric(a, b, p))
    diam = abs(diameter_bound(0.5, 1.0) - (2 * math.log(3) + 1))
    ok = decay and worst <= 1e-9 and diam <= 1e-12
    report("6 certificate soundness", ok, f"decay {decay}, max contraction excess {worst:.1e}, diameter err {diam:.1e}")


def test_ac7_large_scale_quotient_oracle(report):
    rng = np.random.default_rng(7)
    G = 1 << 12
    x = np.arange(G) / G
    worst = np.inf
    for _ in range(50):
        k = np.arange(1, int(rng.integers(1, 6)) + 1)
        amp = rng.normal(size=k.size) * 0.05 / k
        ph = rng.uniform(0, 2 * np.pi, size=k.size)
        arg = 2 * np.pi * np.outer(x, k) + ph
        phi = np.sin(arg) @ amp
        dphi = np.cos(arg) @ (2 * np.pi * k * amp)
        M = float(np.sum(np.abs(amp) * (2 * np.pi * k) ** 2))
        for delta in (0.05, 0.1):
            eps = large_scale_quotient(phi, delta)
            worst = min(worst, c1_quotient_bound(M, 1.0, eps, delta) - np.abs(dphi).max())
    report("7 C1 bound from large-scale quotients", worst >= 0, f"min slack {worst:.2e}")


def test_ac8_partition_band(report):
    D = partition_bound_check(doubling(), None, 14)
    report("8 partition band", abs(D - 2) <= 1e-10, f"D = {D!r}")
