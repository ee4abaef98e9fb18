"""Conjugacy recovery from periodic data.

The topological conjugacy ``h`` (``h o f = g o h``, ``h(0) = 0``) is evaluated
by reading ``f``-itineraries through ``g``'s inverse branches. The smooth
candidate ``h_N = I_g^{-1} o I_f`` is built from the invariant CDFs, and the
remaining helpers measure C^0 / C^1 distances, CDF discrepancies of the
periodic-orbit measures and exponential rates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels
from .circle_map import GridFunction, circle_distance
from .errors import ValidationError
from .periodic import bowen_measure, discrete_cdf, periodic_points
from .transfer import cdf, inverse_cdf, invariant_density

#: Points below this are treated as the floating-point floor by :func:`fit_rate`.
FIT_FLOOR = 1e-11
DEFAULT_GRID = 1 << 14
CDF_GRID = 1 << 12


def _check_degrees(f, g):
    if f.degree != g.degree:
        raise ValidationError(
            f"maps of degree {f.degree} and {g.degree} are not topologically conjugate"
        )


def itinerary(f, x, n):
    """Branch symbols of ``x, f(x), ..., f^{n-1}(x)``.

    Scalar ``x`` gives a tuple; arrays give an int array of shape ``x.shape + (n,)``.
    """
    if n < 1:
        raise ValidationError("itinerary length must be >= 1")
    xs = np.asarray(x, dtype=np.float64)
    out = _kernels.itinerary(xs.reshape(-1), int(n), *f._params)
    if xs.ndim == 0:
        return tuple(int(c) for c in out[0])
    return out.reshape(xs.shape + (n,))


def conjugacy_point(f, g, x, n=40):
    """``h(x)`` to within ``lambda_g^{-n}``, normalized by ``h(0) = 0``."""
    _check_degrees(f, g)
    xs = np.asarray(x, dtype=np.float64)
    words = _kernels.itinerary(xs.reshape(-1), int(n), *f._params)
    seed = np.full(words.shape[0], g.F0)
    y, _ = _kernels.compose_branches(words, seed, *g._params)
    y = y - np.floor(y)
    return y.reshape(xs.shape) if xs.ndim else float(y[0])


def conjugacy_residual(f, g, n=40, G=1 << 10):
    """``sup circle-dist(h(f(x)), g(h(x)))`` over the nodes ``i/G``."""
    x = np.arange(G) / G
    hx = conjugacy_point(f, g, x, n)
    return float(circle_distance(conjugacy_point(f, g, f(x), n), g(hx)).max())


def periodic_data_defect(f, g, N):
    """``max |log (f^N)'(p) - log (g^N)'(h p)|`` over word-matched period-``N`` points."""
    _check_degrees(f, g)
    of, og = periodic_points(f, N), periodic_points(g, N)
    sf = of.birkhoff_table(f.potential())[of.indices]
    sg = og.birkhoff_table(g.potential())[og.indices]
    return float(np.abs(sf - sg).max())


@lru_cache(maxsize=16)
def _density(f, G):
    return invariant_density(f, G)[0]


class SmoothConjugacy(NamedTuple):
    h: GridFunction
    deriv: GridFunction


def build_hN(f, g, G=DEFAULT_GRID, N=None):
    """``h_N = I_g^{-1} o I_f`` on the ``G``-node grid, with ``h_N' = rho_f / rho_g o h_N``.

    The construction only uses the invariant densities; ``N`` is accepted as
    metadata and ignored.
    """
    _check_degrees(f, g)
    rho_f, rho_g = _density(f, G), _density(g, G)
    I_f, I_g = cdf(rho_f), cdf(rho_g)
    h = GridFunction(inverse_cdf(I_g, I_f.values), periodic_offset=1, monotone=True)
    deriv = GridFunction(rho_f.values / rho_g(h.values))
    return SmoothConjugacy(h, deriv)


def conjugated_map(g, hN):
    """``f_N = h_N^{-1} o g o h_N`` and ``f_N' = g'(h_N x) h_N'(x) / h_N'(f_N x)``."""
    h, dh = hN

    def f_N(x):
        return inverse_cdf(h, g(h(np.asarray(x, dtype=np.float64) % 1.0)))

    def f_N_deriv(x):
        x = np.asarray(x, dtype=np.float64) % 1.0
        hx = h(x)
        return g.deriv(hx) * dh(x) / dh(inverse_cdf(h, g(hx)))

    return f_N, f_N_deriv


def winding_number(u, G=1 << 12):
    """Degree of a circle map from its values on ``i/G`` (sum of wrapped increments)."""
    v = np.asarray(u(np.arange(G) / G), dtype=np.float64)
    step = np.diff(np.append(v, v[0]))
    # increments of a degree-d map are ~d/G; anything near 1 is a wrap
    step = np.mod(step, 1.0)
    if np.any(step >= 0.5):
        raise ValidationError("grid too coarse to resolve the winding")
    return int(round(step.sum()))


def c0_distance(u, v, G=1 << 12, *, circle=True):
    """``sup |u - v|`` over ``i/G``; circle distance for circle-valued maps."""
    if G < 1 << 10:
        raise ValidationError("C^0 distances need G >= 2^10")
    x = np.arange(G) / G
    a, b = np.asarray(u(x)), np.asarray(v(x))
    diff = circle_distance(a, b) if circle else np.abs(a - b)
    return float(diff.max())


def c1_distance(f, fN, G=1 << 12):
    """``d_C0(f, f_N) + sup |f' - f_N'|`` over ``i/G``."""
    f_N, f_N_deriv = fN
    x = np.arange(G) / G
    return c0_distance(f, f_N, G) + float(np.abs(f.deriv(x) - f_N_deriv(x)).max())


def cdf_error(f, N, *, grid=DEFAULT_GRID, points=CDF_GRID, mu=None):
    """``sup_x |mu_f^N[0, x] - I_f(x)|`` over ``x = i/points``, ``i = 0..points``."""
    if mu is None:
        mu = bowen_measure(f, None, N)
    I_f = cdf(_density(f, grid))
    x = np.arange(points + 1) / points
    return float(np.abs(discrete_cdf(mu, x) - I_f(x)).max())


def integrate_density(phi, rho):
    """``int_0^1 phi rho dx`` by the trapezoid rule on the density's grid."""
    G = rho.resolution
    x = np.arange(G + 1) / G
    vals = np.asarray(phi(x), dtype=np.float64) * rho.grid.extended()
    return float(np.sum(0.5 * (vals[:-1] + vals[1:])) / G)


def equidistribution_error(f, phi, N, *, grid=DEFAULT_GRID, mu=None):
    """``|int phi d mu_f^N - int phi rho_f dx|``."""
    if mu is None:
        mu = bowen_measure(f, None, N)
    return abs(float(mu.integrate(phi)) - integrate_density(phi, _density(f, grid)))


@dataclass(frozen=True)
class TentFunction:
    """Trapezoid ``phi_x^s``: ramps of width ``w`` up from ``-s`` and down to ``x + s``.

    On the circle the interval profile is clamped to ``[0, 1]`` and maximized
    over lifts, so it stays valid when the support wraps around 0.
    """

    x: float
    s: float
    w: float

    def __post_init__(self):
        if not self.w > 0:
            raise ValidationError("ramp width must be positive")
        if not 0.0 <= self.s <= self.w:
            raise ValidationError("shift must lie in [0, w]")

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64) % 1.0
        out = np.zeros_like(y)
        for k in (-1.0, 0.0, 1.0):
            yk = y + k
            val = np.minimum((yk + self.s) / self.w, (self.x + self.s - yk) / self.w)
            out = np.maximum(out, np.clip(val, 0.0, 1.0))
        return out

    @property
    def lipschitz(self):
        return 1.0 / self.w

    @property
    def lip_norm(self):
        return 1.0 + 1.0 / self.w

    def lebesgue_integral(self):
        """``x + 2s - w`` while the support ``[-s, x + s]`` is shorter than the circle."""
        if self.x + 2 * self.s > 1.0 or self.x + 2 * self.s < 2 * self.w:
            y = (np.arange(1 << 16) + 0.5) / (1 << 16)
            return float(self(y).mean())
        return self.x + 2 * self.s - self.w


def tent_function(x, s, w):
    return TentFunction(float(x), float(s), float(w))


@dataclass(frozen=True)
class SmoothedGap:
    s_star: float
    w: float
    gap: float
    equidist: float
    cdf_gap: float
    collar_bound: float


def smoothed_cdf_gap(f, N, x, *, w=None, grid=DEFAULT_GRID, mu=None, tol=1e-15):
    """Smooth the indicator of ``[0, x]`` by a tent matched to ``mu_f^N``.

    Finds ``s*`` with ``int phi_x^{s*} d mu_f^N = mu_f^N[0, x]`` by bisection and
    returns the gap ``|int phi_x^{s*} d mu_f - I_f(x)|`` with the equidistribution
    term ``|int phi_x^{s*} d(mu_f^N - mu_f)|`` and the CDF gap it controls.
    The default ramp width is ``d^{-N/2}``.
    """
    if not 0.0 < x < 1.0:
        raise ValidationError("smoothed_cdf_gap needs x in (0, 1)")
    if mu is None:
        mu = bowen_measure(f, None, N)
    if w is None:
        w = float(f.degree) ** (-N / 2.0)
    rho = _density(f, grid)
    target = discrete_cdf(mu, x)

    def Phi(s):
        return float(mu.integrate(tent_function(x, s, w))) - target

    lo, hi = 0.0, w
    f_lo, f_hi = Phi(lo), Phi(hi)
    if f_lo > 0 or f_hi < 0:
        raise ValidationError(f"no sign change: Phi(0)={f_lo:.3g}, Phi(w)={f_hi:.3g}")
    if f_lo == 0:
        hi = lo
    elif f_hi == 0:
        lo = hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if Phi(mid) < 0:
            lo = mid
        else:
            hi = mid
    s_star = 0.5 * (lo + hi)
    tent = tent_function(x, s_star, w)
    fine = _fine_integral(tent, rho)
    I_x = float(cdf(rho)(x))
    return SmoothedGap(
        s_star=s_star,
        w=w,
        gap=abs(fine - I_x),
        equidist=abs(float(mu.integrate(tent)) - fine),
        cdf_gap=abs(target - I_x),
        collar_bound=2.0 * w * float(rho.values.max()),
    )


def _fine_integral(phi, rho, points=1 << 16):
    y = np.arange(points + 1) / points
    vals = phi(y) * rho(y)
    return float(np.sum(0.5 * (vals[:-1] + vals[1:])) / points)


@dataclass(frozen=True)
class RateFit:
    K: float
    lam: float
    r2: float
    n_range: tuple

    @property
    def decaying(self):
        return self.lam < 1.0 - 1e-12

    def as_dict(self):
        return {"K": self.K, "lambda": self.lam, "r2": self.r2, "n_range": list(self.n_range),
                "decaying": self.decaying}


def fit_rate(points, *, floor=FIT_FLOOR):
    """Least squares for ``log err = log K + N log lambda``.

    Points below ``floor`` are dropped; nonpositive errors are rejected.
    """
    pts = sorted((int(n), float(e)) for n, e in points)
    if any(not e > 0 for _, e in pts):
        raise ValidationError("fit_rate needs positive errors; truncate the range first")
    pts = [(n, e) for n, e in pts if e >= floor]
    if len(pts) < 4:
        raise ValidationError(f"fit_rate needs >= 4 points above {floor}, got {len(pts)}")
    n = np.array([p[0] for p in pts], dtype=np.float64)
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(n, y, 1)
    resid = y - (intercept + slope * n)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid ** 2)) / ss_tot)
    if ss_tot == 0.0:
        slope = 0.0
    return RateFit(K=float(np.exp(intercept)), lam=float(np.exp(slope)), r2=r2,
                   n_range=(int(n[0]), int(n[-1])))


def c1_quotient_bound(M, alpha, eps, delta):
    """``M delta^alpha / (alpha + 1) + eps``: a ``C^1`` bound from large-scale quotients."""
    if M < 0:
        raise ValidationError("M must be >= 0")
    if not 0.0 < alpha <= 1.0:
        raise ValidationError("alpha must lie in (0, 1]")
    if not (eps >= 0 and delta > 0):
        raise ValidationError("need eps >= 0 and delta > 0")
    return M * delta ** alpha / (alpha + 1.0) + eps


def large_scale_quotient(values, delta):
    """``sup |F(x) - F(y)| / |x - y|`` over grid pairs at circle distance ``> delta``."""
    return float(_kernels.large_scale_quotient(np.ascontiguousarray(values, dtype=np.float64), float(delta)))


def c1_from_c0(f, fN, delta, M, alpha=1.0, G=1 << 12):
    """Bound ``|f - f_N|_{C^1}`` from the large-scale quotient of ``F = f_N - f``."""
    x = np.arange(G) / G
    F = np.asarray(fN[0](x)) - np.asarray(f(x))
    F = F - np.round(F)
    return c1_quotient_bound(M, alpha, large_scale_quotient(F, delta), delta)
