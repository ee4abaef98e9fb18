"""Grid discretization of the transfer operator ``L_psi`` on the circle.

``(L_psi phi)(x) = sum_{f(y) = x} exp(psi(y)) phi(y)`` is evaluated at the
nodes ``i/G``; the preimages of every node are solved once per ``(f, G)`` and
``phi(y)`` is read off by linear interpolation. For the geometric potential
``psi_f = -log f'`` the leading eigenvalue is 1 and the eigenfunction is the
invariant density ``rho_f``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .circle_map import GridFunction, inverse_branches
from .errors import ConvergenceError, ValidationError

DENSITY_MAX_ITER = 100_000
DEFAULT_TOL = 1e-12
#: Diagnostic band ``[1/C, C]`` for invariant densities.
DENSITY_BAND = 5.0


@lru_cache(maxsize=16)
def _preimages(f, G):
    nodes = np.arange(G) / G
    y = inverse_branches(f, nodes)
    t = y * G
    idx = np.minimum(np.floor(t).astype(np.int64), G - 1)
    frac = t - idx
    for a in (y, idx, frac):
        a.setflags(write=False)
    return y, idx, frac


@lru_cache(maxsize=16)
def _geometric_weights(f, G):
    y = _preimages(f, G)[0]
    w = 1.0 / f.deriv(y)
    w.setflags(write=False)
    return w


def _weights(f, psi, G):
    if psi is None:
        return _geometric_weights(f, G)
    y = _preimages(f, G)[0]
    return np.exp(np.asarray(psi(y), dtype=np.float64))


class TransferOperator:
    """``L_psi`` on the ``G``-node grid; ``psi=None`` means ``psi_f``."""

    def __init__(self, f, psi=None, G=1 << 12):
        if G < 16:
            raise ValidationError(f"grid resolution must be >= 16, got {G}")
        self.f = f
        self.G = int(G)
        _, self._idx, self._frac = _preimages(f, self.G)
        self._w = np.ascontiguousarray(_weights(f, psi, self.G))

    def __call__(self, values):
        values = np.ascontiguousarray(values, dtype=np.float64)
        return _kernels.transfer_step(values, self._idx, self._frac, self._w)

    def power(self, values, n):
        out = np.asarray(values, dtype=np.float64)
        for _ in range(n):
            out = self(out)
        return out


def apply_transfer(f, psi, phi):
    """One application of ``L_psi`` to the grid function ``phi``."""
    op = TransferOperator(f, psi, phi.resolution)
    return GridFunction(op(phi.values))


@dataclass(frozen=True)
class Density:
    """Strictly positive grid density of unit (trapezoid) mass."""

    grid: GridFunction
    mass_tolerance: float = 1e-10
    iterations: int = 0

    def __post_init__(self):
        v = self.grid.values
        if not np.all(v > 0):
            raise ValidationError("density must be strictly positive at every node")
        mass = self.grid.integral()
        if abs(mass - 1.0) > self.mass_tolerance:
            raise ValidationError(f"density mass {mass!r} differs from 1")

    @property
    def values(self):
        return self.grid.values

    @property
    def resolution(self):
        return self.grid.resolution

    def __call__(self, x):
        return self.grid(x)

    def band(self, C=DENSITY_BAND):
        """Report whether the density lies in ``[1/C, C]``."""
        lo, hi = float(self.values.min()), float(self.values.max())
        return {"min": lo, "max": hi, "C": float(C), "ok": bool(lo >= 1.0 / C and hi <= C)}

    def holder_quotient(self, alpha=1.0, max_lag=None):
        """Finite-difference estimate of the ``alpha``-Hoelder seminorm.

        Diagnostic only: grid data cannot certify a Hoelder bound.
        """
        v = self.values
        G = v.size
        max_lag = G // 2 if max_lag is None else min(max_lag, G // 2)
        best = 0.0
        for k in range(1, max_lag + 1):
            diff = np.abs(np.roll(v, -k) - v).max()
            best = max(best, diff / (k / G) ** alpha)
        return best

    def write_csv(self, path):
        self.grid.write_csv(path)


def _power_iteration(op, tol, max_iter):
    """Normalized power iteration from 1; returns (vector, eigenvalue, iterations)."""
    v = np.ones(op.G)
    lam = np.nan
    for it in range(1, max_iter + 1):
        w = op(v)
        mass = w.mean()
        if not mass > 0:
            raise ConvergenceError("transfer iterate lost positivity")
        w /= mass
        lam = mass / v.mean()
        change = np.abs(w - v).max()
        v = w
        if change < tol:
            return v, lam, it
    raise ConvergenceError(f"power iteration did not reach {tol} in {max_iter} steps")


def invariant_density(f, G=1 << 12, tol=DEFAULT_TOL, *, max_iter=DENSITY_MAX_ITER):
    """Power iteration for ``rho_f`` starting from 1.

    Returns
    -------
    (Density, int)
        The normalized density and the number of iterations used.
    """
    if G < 256:
        raise ValidationError(f"density grid must have G >= 256, got {G}")
    if tol < 1e-13:
        raise ValidationError(f"tolerance below 1e-13 is not attainable, got {tol}")
    v, _, it = _power_iteration(TransferOperator(f, None, G), tol, max_iter)
    v = v / v.mean()
    return Density(GridFunction(v), iterations=it), it


def pressure(f, psi=None, G=1 << 12, tol=DEFAULT_TOL, *, max_iter=DENSITY_MAX_ITER):
    """``log`` of the Perron eigenvalue from the L1 ratio of successive iterates."""
    if G < 256:
        raise ValidationError(f"pressure grid must have G >= 256, got {G}")
    _, lam, _ = _power_iteration(TransferOperator(f, psi, G), tol, max_iter)
    return float(np.log(lam))


def cdf(rho):
    """``I(x) = int_0^x rho`` by cumulative trapezoid sums, scaled so ``I(1) = 1``."""
    grid = rho.grid if isinstance(rho, Density) else rho
    ext = grid.extended()
    G = grid.resolution
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (ext[:-1] + ext[1:])) / G))
    cum /= cum[-1]
    return GridFunction(cum[:-1], periodic_offset=1, monotone=True)


def inverse_cdf(I, u):
    """Smallest ``x`` in ``[0, 1]`` with ``I(x) = u``.

    The bracketing cell is located by binary search over the node values and
    the linear piece is inverted exactly.
    """
    ext = I.extended()
    G = I.resolution
    us = np.asarray(u, dtype=np.float64)
    if np.any((us < ext[0]) | (us > ext[-1])):
        raise ValidationError(f"u must lie in [{ext[0]}, {ext[-1]}]")
    k = np.searchsorted(ext, us, side="left")
    at_node = ext[k] == us
    i = np.clip(k - 1, 0, G - 1)
    span = ext[i + 1] - ext[i]
    t = np.where(span > 0, (us - ext[i]) / np.where(span > 0, span, 1.0), 0.0)
    x = np.where(at_node, k / G, (i + t) / G)
    return x if x.ndim else float(x)


def empirical_decay(f, phi, n_max, *, rho=None):
    """``e_n = sup |L^n phi - rho int phi|`` for ``n = 1..n_max`` (geometric potential)."""
    if n_max > 60:
        raise ValidationError("empirical_decay supports n_max <= 60")
    G = phi.resolution
    if rho is None:
        rho, _ = invariant_density(f, G)
    if rho.resolution != G:
        raise ValidationError("density and test function must share the grid")
    op = TransferOperator(f, None, G)
    target = rho.values * phi.integral()
    v = np.array(phi.values, dtype=np.float64)
    out = np.empty(n_max)
    for n in range(n_max):
        v = op(v)
        out[n] = np.abs(v - target).max()
    return out
