"""Numba-compiled twins of the kernels in ``_numpy``.

Scalar inner loops; no ``parallel=True`` so that every reduction runs in a
fixed order and results are bit-stable from run to run.
"""
import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
ROOT_TOL = 1e-14
ROOT_MAX_ITER = 100
BLOCK = 4096


@njit(cache=True)
def _h(y, a):
    s = math.sin(TWO_PI * y)
    return y + a * s / TWO_PI, 1.0 + a * math.cos(TWO_PI * y), -TWO_PI * a * s


@njit(cache=True)
def _hinv(v, a):
    k = math.floor(v)
    r = v - k
    half = abs(a) / TWO_PI
    lo = r - half
    hi = r + half
    y = r
    for _ in range(ROOT_MAX_ITER):
        val, der, _ = _h(y, a)
        res = val - r
        if res < 0.0:
            lo = y
        elif res > 0.0:
            hi = y
        yn = y - res / der
        bad = yn <= lo or yn >= hi
        if abs(res) <= ROOT_TOL:
            # keep the polish step only if it stays bracketed
            return (y if bad else yn) + k
        y = 0.5 * (lo + hi) if bad else yn
    return np.nan


@njit(cache=True)
def _eval_scalar(x, d, coeffs, conj, scratch):
    K = conj.shape[0]
    for level in range(K - 1, -1, -1):
        scratch[level] = x
        x = _h(x, conj[level])[0]
    F = d * x
    dF = float(d)
    d2F = 0.0
    for k in range(1, coeffs.shape[0] + 1):
        c = coeffs[k - 1]
        if c == 0.0:
            continue
        w = TWO_PI * k
        s = math.sin(w * x)
        F += c * s / w
        dF += c * math.cos(w * x)
        d2F -= c * w * s
    for level in range(K):
        a = conj[level]
        _, h1x, h2x = _h(scratch[level], a)
        y = _hinv(F, a)
        _, h1y, h2y = _h(y, a)
        dFn = dF * h1x / h1y
        d2F = (d2F * h1x * h1x + dF * h2x) / h1y - dFn * dFn * h2y / h1y
        F = y
        dF = dFn
    return F, dF, d2F


@njit(cache=True)
def lift_eval(x, d, coeffs, conj):
    n = x.shape[0]
    F = np.empty(n)
    dF = np.empty(n)
    d2F = np.empty(n)
    scratch = np.empty(max(conj.shape[0], 1))
    for i in range(n):
        F[i], dF[i], d2F[i] = _eval_scalar(x[i], d, coeffs, conj, scratch)
    return F, dF, d2F


@njit(cache=True)
def _solve_scalar(t, F0, d, coeffs, conj, scratch, guess=-1.0):
    lo = 0.0
    hi = 1.0
    if 0.0 <= guess <= 1.0:
        x = guess
    else:
        x = min(max((t - F0) / d, 0.0), 1.0)
    for _ in range(ROOT_MAX_ITER):
        val, der, _ = _eval_scalar(x, d, coeffs, conj, scratch)
        res = val - t
        if res < 0.0:
            lo = x
        elif res > 0.0:
            hi = x
        xn = x - res / der
        bad = xn < lo or xn > hi
        if abs(res) <= ROOT_TOL:
            return (x if bad else xn), True
        x = 0.5 * (lo + hi) if bad else xn
    return x, False


@njit(cache=True)
def branch_solve(y, j, d, coeffs, conj):
    n = y.shape[0]
    out = np.empty(n)
    ok = np.empty(n, dtype=np.bool_)
    scratch = np.empty(max(conj.shape[0], 1))
    F0 = _eval_scalar(0.0, d, coeffs, conj, scratch)[0]
    for i in range(n):
        out[i], ok[i] = _solve_scalar(y[i] + j[i], F0, d, coeffs, conj, scratch)
    return out, ok


@njit(cache=True)
def compose_branches(digits, seed, d, coeffs, conj):
    m, n = digits.shape
    out = np.empty(m)
    ok = np.ones(m, dtype=np.bool_)
    scratch = np.empty(max(conj.shape[0], 1))
    F0 = _eval_scalar(0.0, d, coeffs, conj, scratch)[0]
    for r in range(m):
        x = seed[r]
        for col in range(n - 1, -1, -1):
            x, good = _solve_scalar(x + digits[r, col], F0, d, coeffs, conj, scratch)
            if not good:
                ok[r] = False
        out[r] = x
    return out, ok


@njit(cache=True)
def periodic_table(N, d, coeffs, conj, tol, max_iter):
    total = d ** N
    points = np.empty(total)
    ok = np.zeros(total, dtype=np.bool_)
    scratch = np.empty(max(conj.shape[0], 1))
    F0 = _eval_scalar(0.0, d, coeffs, conj, scratch)[0]
    digits = np.empty(N, dtype=np.int64)
    orbit = np.empty(N)
    for w in range(total):
        k = w
        for i in range(N - 1, -1, -1):
            digits[i] = k % d
            k //= d
            orbit[i] = -1.0
        x = 0.0
        for _ in range(max_iter):
            y = x
            good = True
            for col in range(N - 1, -1, -1):
                # previous pass's orbit point is an excellent Newton start
                y, g = _solve_scalar(y + digits[col], F0, d, coeffs, conj, scratch, orbit[col])
                orbit[col] = y
                good = good and g
            step = abs(y - x)
            x = y
            if not good:
                break
            if step < tol:
                ok[w] = True
                break
        points[w] = x
    return points, ok


@njit(cache=True)
def itinerary(x, n, d, coeffs, conj):
    m = x.shape[0]
    out = np.empty((m, n), dtype=np.int64)
    scratch = np.empty(max(conj.shape[0], 1))
    F0 = _eval_scalar(0.0, d, coeffs, conj, scratch)[0]
    for r in range(m):
        y = x[r] - math.floor(x[r])
        for i in range(n):
            F = _eval_scalar(y, d, coeffs, conj, scratch)[0]
            sym = int(math.floor(F - F0))
            out[r, i] = min(max(sym, 0), d - 1)
            y = F - math.floor(F)
    return out


@njit(cache=True)
def transfer_step(phi, idx, frac, weights):
    G, d = idx.shape
    out = np.empty(G)
    for i in range(G):
        acc = 0.0
        for j in range(d):
            k = idx[i, j]
            k1 = k + 1
            if k1 == G:
                k1 = 0
            t = frac[i, j]
            acc += weights[i, j] * ((1.0 - t) * phi[k] + t * phi[k1])
        out[i] = acc
    return out


@njit(cache=True)
def word_sums(psi_vals, psi_depth, phi_vals, phi_depth, s, n):
    total = s ** n
    digits = np.empty(n, dtype=np.int64)
    acc_w = 0.0
    acc_z = 0.0
    nblocks = (total + BLOCK - 1) // BLOCK
    for b in range(nblocks):
        bw = 0.0
        bz = 0.0
        for w in range(b * BLOCK, min(total, (b + 1) * BLOCK)):
            k = w
            for i in range(n - 1, -1, -1):
                digits[i] = k % s
                k //= s
            S = 0.0
            for i in range(n):
                cyl = 0
                for j in range(psi_depth):
                    cyl = cyl * s + digits[(i + j) % n]
                S += psi_vals[cyl]
            cyl = 0
            for j in range(phi_depth):
                cyl = cyl * s + digits[j % n]
            e = math.exp(S)
            bw += e * phi_vals[cyl]
            bz += e
        acc_w += bw
        acc_z += bz
    return acc_w, acc_z


@njit(cache=True)
def large_scale_quotient(values, delta):
    G = values.shape[0]
    best = 0.0
    for k in range(1, G // 2 + 1):
        dist = min(k, G - k) / G
        if dist <= delta:
            continue
        for i in range(G):
            j = i + k
            if j >= G:
                j -= G
            q = abs(values[j] - values[i]) / dist
            if q > best:
                best = q
    return best
