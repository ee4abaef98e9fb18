"""Expanding circle maps given by their lifts, and periodic grid functions.

Two families are supported:

* ``trig``: ``F(x) = d x + sum_k c_k sin(2 pi k x) / (2 pi k)``;
* ``conjugated``: ``h0^{-1} o G o h0`` for a base map ``G`` and the
  diffeomorphism ``h0(x) = x + a sin(2 pi x) / (2 pi)``.

Both fix ``F(0) = 0``, so the fixed point with itinerary ``0^inf`` is ``0``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ConvergenceError, ValidationError

#: Number of samples used to estimate the expansion rate / C^2 bound of conjugated maps.
SAMPLE_GRID = 4096


def _as_1d(x):
    arr = np.asarray(x, dtype=np.float64)
    return arr.reshape(-1), arr.shape


@dataclass(frozen=True, eq=False)
class CircleMap:
    """A C^2 orientation-preserving expanding map of the circle.

    Parameters
    ----------
    degree : int
        Topological degree ``d >= 2``.
    coeffs : tuple of float
        Trig coefficients of the innermost base lift.
    conj : tuple of float
        Conjugation parameters, innermost first.
    expansion : float
        Lower bound ``lambda_f`` for ``F'``.
    c2_bound : float
        Upper bound for ``sup |F''|``.
    """

    degree: int
    coeffs: tuple
    conj: tuple
    expansion: float
    c2_bound: float
    family: str = "trig"
    base: Optional["CircleMap"] = field(default=None, repr=False)
    a: Optional[float] = None

    @property
    def _params(self):
        return (
            int(self.degree),
            np.asarray(self.coeffs, dtype=np.float64),
            np.asarray(self.conj, dtype=np.float64),
        )

    def evaluate(self, x):
        """Return ``(F, F', F'')`` at ``x`` (array-valued, same shape as ``x``)."""
        flat, shape = _as_1d(x)
        F, dF, d2F = _kernels.lift_eval(flat, *self._params)
        if np.isnan(F).any():
            raise ConvergenceError("lift evaluation failed to invert the conjugating map")
        return F.reshape(shape), dF.reshape(shape), d2F.reshape(shape)

    def lift(self, x):
        return self.evaluate(x)[0]

    def deriv(self, x):
        return self.evaluate(x)[1]

    def deriv2(self, x):
        return self.evaluate(x)[2]

    def __call__(self, x):
        F = self.lift(x)
        return F - np.floor(F)

    @property
    def F0(self):
        return float(self.lift(0.0))

    def potential(self):
        """The geometric potential ``psi_f = -log f'`` as a vectorized callable."""
        return lambda x: -np.log(self.deriv(x))

    def to_spec(self):
        if self.family == "trig":
            return {"family": "trig", "degree": int(self.degree), "coeffs": [float(c) for c in self.coeffs]}
        return {"family": "conjugated", "base": self.base.to_spec(), "a": float(self.a)}

    def to_json(self):
        return json.dumps(self.to_spec(), sort_keys=True)

    def __eq__(self, other):
        return isinstance(other, CircleMap) and self.to_spec() == other.to_spec()

    def __hash__(self):
        return hash(self.to_json())


def make_trig_map(d, coeffs=()):
    """Build ``F(x) = d x + sum_k c_k sin(2 pi k x)/(2 pi k)``.

    Rejects ``sum |c_k| >= d - 1`` since then ``F'`` can reach 1.
    """
    d = int(d)
    coeffs = tuple(float(c) for c in coeffs)
    if d < 2:
        raise ValidationError(f"degree must be >= 2, got {d}")
    total = sum(abs(c) for c in coeffs)
    if total >= d - 1:
        raise ValidationError(
            f"not expanding: sum |c_k| = {total} >= d - 1 = {d - 1}"
        )
    c2 = sum(abs(c) * 2 * np.pi * k for k, c in enumerate(coeffs, start=1))
    return CircleMap(degree=d, coeffs=coeffs, conj=(), expansion=d - total, c2_bound=float(c2))


def doubling():
    return make_trig_map(2, ())


def conjugate_map(g, a):
    """Return ``f = h0^{-1} o g o h0`` with ``h0(x) = x + a sin(2 pi x)/(2 pi)``."""
    a = float(a)
    if not abs(a) < 1.0:
        raise ValidationError(f"|a| must be < 1 for h0 to be a diffeomorphism, got {a}")
    f = CircleMap(
        degree=g.degree,
        coeffs=g.coeffs,
        conj=g.conj + (a,),
        expansion=np.nan,
        c2_bound=np.nan,
        family="conjugated",
        base=g,
        a=a,
    )
    xs = np.arange(SAMPLE_GRID) / SAMPLE_GRID
    _, dF, d2F = f.evaluate(xs)
    lam = float(dF.min())
    if lam <= 1.0:
        raise ValidationError(f"not expanding: sampled min F' = {lam:.6g} <= 1")
    object.__setattr__(f, "expansion", lam)
    object.__setattr__(f, "c2_bound", float(np.abs(d2F).max()))
    return f


def map_from_spec(spec):
    """Inverse of :meth:`CircleMap.to_spec`."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    family = spec.get("family")
    if family == "trig":
        return make_trig_map(spec["degree"], spec.get("coeffs", []))
    if family == "conjugated":
        return conjugate_map(map_from_spec(spec["base"]), spec["a"])
    raise ValidationError(f"unknown map family {family!r}")


def inverse_branches(f, y):
    """Preimages ``x_0 < ... < x_{d-1}`` in ``[0, 1)`` of ``y`` under ``f``.

    ``x_j`` solves ``F(x_j) = y~ + j`` where ``y~`` is the representative of
    ``y`` in ``[F(0), F(0) + 1)``. Scalar ``y`` gives shape ``(d,)``, an array
    gives shape ``y.shape + (d,)``.
    """
    flat, shape = _as_1d(y)
    F0 = f.F0
    rep = F0 + np.mod(flat - F0, 1.0)
    d = f.degree
    out = np.empty((flat.size, d))
    for j in range(d):
        x, ok = _kernels.branch_solve(rep, np.full(flat.size, j, dtype=np.int64), *f._params)
        if not np.all(ok):
            raise ConvergenceError("inverse branch solve hit the iteration cap")
        out[:, j] = x
    return out.reshape(shape + (d,))


def branch_endpoints(f):
    """Left endpoints of the branch intervals ``[x_j, x_{j+1})``."""
    return inverse_branches(f, f.F0)


def circle_distance(x, y):
    diff = np.mod(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64), 1.0)
    return np.minimum(diff, 1.0 - diff)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values at nodes ``i/G`` with periodic linear interpolation.

    ``periodic_offset`` is what the function gains per period: 0 for
    densities, 1 for CDFs and circle-map lifts of degree one.
    """

    values: np.ndarray
    periodic_offset: int = 0
    monotone: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 2:
            raise ValidationError("grid function needs a 1-d array of at least 2 values")
        if self.monotone and not self.is_strictly_increasing():
            raise ValidationError("grid function flagged monotone is not strictly increasing")

    @property
    def resolution(self):
        return self.values.size

    @property
    def nodes(self):
        return np.arange(self.resolution) / self.resolution

    def is_strictly_increasing(self):
        v = self.values
        return bool(np.all(np.diff(v) > 0) and v[-1] < v[0] + self.periodic_offset)

    def extended(self):
        """Node values on ``i/G, i = 0..G`` (closing node included)."""
        return np.append(self.values, self.values[0] + self.periodic_offset)

    def __call__(self, x):
        flat, shape = _as_1d(x)
        G = self.resolution
        k = np.floor(flat)
        t = (flat - k) * G
        i = np.minimum(t.astype(np.int64), G - 1)
        frac = t - i
        ext = self.extended()
        out = ext[i] + frac * (ext[i + 1] - ext[i]) + k * self.periodic_offset
        return out.reshape(shape)

    def integral(self):
        """Trapezoid integral over one period (offset-0 functions)."""
        return float(np.mean(self.values))

    def sup(self):
        return float(np.max(np.abs(self.values)))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "value"])
            for x, v in zip(self.nodes, self.values):
                w.writerow([repr(float(x)), repr(float(v))])


def sample(fn, G):
    """Sample a periodic callable on the ``G``-node grid."""
    return GridFunction(np.asarray(fn(np.arange(G) / G), dtype=np.float64))
