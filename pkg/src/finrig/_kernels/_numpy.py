"""Vectorized numpy implementations of the hot kernels.

Every function here has a twin in ``_jit`` with the same signature and the
same numerical contract; the pair is cross-checked in the test-suite.

Map parameters are passed as ``(d, coeffs, conj)``: the degree, the trig
coefficients ``c_1..c_K`` of the base lift and the chain of conjugation
parameters (innermost first).
"""
import numpy as np

TWO_PI = 2.0 * np.pi
ROOT_TOL = 1e-14
ROOT_MAX_ITER = 100
CHUNK = 1 << 15


def _trig_eval(x, d, coeffs):
    F = d * x
    dF = np.full_like(x, float(d))
    d2F = np.zeros_like(x)
    for k in range(1, len(coeffs) + 1):
        c = coeffs[k - 1]
        if c == 0.0:
            continue
        w = TWO_PI * k
        s = np.sin(w * x)
        F = F + c * s / w
        dF = dF + c * np.cos(w * x)
        d2F = d2F - c * w * s
    return F, dF, d2F


def _h(y, a):
    s = np.sin(TWO_PI * y)
    return y + a * s / TWO_PI, 1.0 + a * np.cos(TWO_PI * y), -TWO_PI * a * s


def _hinv(v, a):
    """Invert ``y + a sin(2 pi y)/(2 pi)`` on the lift (periodic up to +1)."""
    k = np.floor(v)
    r = v - k
    half = abs(a) / TWO_PI
    lo = r - half
    hi = r + half
    y = r.copy()
    done = np.zeros(r.shape, dtype=bool)
    for _ in range(ROOT_MAX_ITER):
        val, der, _ = _h(y, a)
        res = val - r
        lo = np.where(res < 0.0, y, lo)
        hi = np.where(res > 0.0, y, hi)
        yn = y - res / der
        bad = (yn <= lo) | (yn >= hi)
        small = np.abs(res) <= ROOT_TOL
        # a converged point keeps its polish step only if it stays bracketed
        yn = np.where(bad, np.where(small, y, 0.5 * (lo + hi)), yn)
        y = np.where(done, y, yn)
        done |= small
        if done.all():
            break
    if not done.all():
        raise FloatingPointError("conjugating diffeomorphism inversion did not converge")
    return y + k


def lift_eval(x, d, coeffs, conj):
    """Return ``(F, F', F'')`` of the (possibly conjugated) lift at ``x``."""
    x = np.asarray(x, dtype=np.float64)
    K = len(conj)
    xs = []
    for level in range(K - 1, -1, -1):
        # outermost conjugation acts first on the way in
        xs.append(x)
        x, _, _ = _h(x, conj[level])
    F, dF, d2F = _trig_eval(x, d, coeffs)
    for level in range(K):
        a = conj[level]
        xk = xs[K - 1 - level]
        _, h1x, h2x = _h(xk, a)
        y = _hinv(F, a)
        _, h1y, h2y = _h(y, a)
        dFn = dF * h1x / h1y
        d2F = (d2F * h1x * h1x + dF * h2x) / h1y - dFn * dFn * h2y / h1y
        F, dF = y, dFn
    return F, dF, d2F


def _lift_only(x, d, coeffs, conj):
    F, dF, _ = lift_eval(x, d, coeffs, conj)
    return F, dF


def branch_solve(y, j, d, coeffs, conj, guess=None):
    """Solve ``F(x) = y + j`` for ``x`` in ``[0, 1]``, safeguarded Newton.

    ``y`` must already lie in ``[F(0), F(0) + 1]``; no reduction mod 1 is done,
    so compositions of branches stay continuous at the endpoints.
    """
    y = np.asarray(y, dtype=np.float64)
    t = y + np.asarray(j, dtype=np.float64)
    F0 = lift_eval(np.zeros(1), d, coeffs, conj)[0][0]
    lo = np.zeros_like(t)
    hi = np.ones_like(t)
    x = np.clip((t - F0) / d, 0.0, 1.0)
    if guess is not None:
        x = np.where((guess >= 0.0) & (guess <= 1.0), guess, x)
    done = np.zeros(t.shape, dtype=bool)
    for _ in range(ROOT_MAX_ITER):
        val, der = _lift_only(x, d, coeffs, conj)
        res = val - t
        lo = np.where(res < 0.0, x, lo)
        hi = np.where(res > 0.0, x, hi)
        xn = x - res / der
        bad = (xn < lo) | (xn > hi)
        small = np.abs(res) <= ROOT_TOL
        xn = np.where(bad, np.where(small, x, 0.5 * (lo + hi)), xn)
        x = np.where(done, x, xn)
        done |= small
        if done.all():
            break
    return x, done


def compose_branches(digits, seed, d, coeffs, conj, orbit=None):
    """Apply ``b_{w_0} o ... o b_{w_{n-1}}`` row-wise to ``seed``.

    ``orbit`` (same shape as ``digits``), when given, supplies Newton starting
    points and is overwritten with the intermediate points.
    """
    digits = np.asarray(digits, dtype=np.int64)
    m, n = digits.shape
    x = np.broadcast_to(np.asarray(seed, dtype=np.float64), (m,)).copy()
    ok = np.ones(m, dtype=bool)
    for col in range(n - 1, -1, -1):
        guess = None if orbit is None else orbit[:, col]
        x, good = branch_solve(x, digits[:, col], d, coeffs, conj, guess)
        if orbit is not None:
            orbit[:, col] = x
        ok &= good
    return x, ok


def word_digits(start, stop, base, n):
    k = np.arange(start, stop, dtype=np.int64)
    out = np.empty((k.size, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        out[:, i] = k % base
        k = k // base
    return out


def periodic_table(N, d, coeffs, conj, tol, max_iter):
    """Fixed points of every composed inverse branch ``g_w``, ``|w| = N``.

    Returns the points indexed by word (first symbol most significant) and a
    flag per word telling whether the contraction iteration converged.
    """
    total = d ** N
    points = np.empty(total, dtype=np.float64)
    ok = np.zeros(total, dtype=bool)
    for start in range(0, total, CHUNK):
        stop = min(total, start + CHUNK)
        digits = word_digits(start, stop, d, N)
        x = np.zeros(stop - start)
        active = np.ones(stop - start, dtype=bool)
        conv = np.zeros(stop - start, dtype=bool)
        orbit = np.full(digits.shape, -1.0)
        for _ in range(max_iter):
            idx = np.nonzero(active)[0]
            orb = orbit[idx]
            xn, good = compose_branches(digits[idx], x[idx], d, coeffs, conj, orb)
            orbit[idx] = orb
            step = np.abs(xn - x[idx])
            x[idx] = xn
            finished = (step < tol) & good
            conv[idx[finished]] = True
            active[idx[finished | ~good]] = False
            if not active.any():
                break
        points[start:stop] = x
        ok[start:stop] = conv
    return points, ok


def itinerary(x, n, d, coeffs, conj):
    x = np.asarray(x, dtype=np.float64)
    x = x - np.floor(x)
    F0 = lift_eval(np.zeros(1), d, coeffs, conj)[0][0]
    out = np.empty((x.size, n), dtype=np.int64)
    for i in range(n):
        F = lift_eval(x, d, coeffs, conj)[0]
        out[:, i] = np.clip(np.floor(F - F0), 0, d - 1).astype(np.int64)
        x = F - np.floor(F)
    return out


def transfer_step(phi, idx, frac, weights):
    G = phi.shape[0]
    nxt = idx + 1
    nxt[nxt == G] = 0
    vals = (1.0 - frac) * phi[idx] + frac * phi[nxt]
    return np.sum(weights * vals, axis=1)


def word_sums(psi_vals, psi_depth, phi_vals, phi_depth, s, n):
    """Sum ``exp(S_n psi) phi`` and ``exp(S_n psi)`` over all period-n words."""
    total = s ** n
    acc_w = 0.0
    acc_z = 0.0
    cols = np.arange(n)
    for start in range(0, total, CHUNK):
        stop = min(total, start + CHUNK)
        digits = word_digits(start, stop, s, n)
        S = np.zeros(stop - start)
        for i in range(n):
            cyl = np.zeros(stop - start, dtype=np.int64)
            for j in range(psi_depth):
                cyl = cyl * s + digits[:, (i + j) % n]
            S += psi_vals[cyl]
        cyl = np.zeros(stop - start, dtype=np.int64)
        for j in range(phi_depth):
            cyl = cyl * s + digits[:, cols[j % n]]
        e = np.exp(S)
        acc_w += float(np.sum(e * phi_vals[cyl]))
        acc_z += float(np.sum(e))
    return acc_w, acc_z


def large_scale_quotient(values, delta):
    """``max |v_i - v_j| / dist`` over node pairs at circle distance ``> delta``."""
    values = np.asarray(values, dtype=np.float64)
    G = values.size
    best = 0.0
    for k in range(1, G // 2 + 1):
        dist = min(k, G - k) / G
        if dist <= delta:
            continue
        diff = np.abs(np.roll(values, -k) - values).max()
        best = max(best, diff / dist)
    return best
