"""Periodic points of expanding circle maps and the weighted measures on them.

Every word ``w`` of length ``N`` over ``{0..d-1}`` determines a unique fixed
point of the composed inverse branch ``g_w = b_{w_0} o ... o b_{w_{N-1}}``,
found by iterating ``g_w`` (a ``lambda^-N`` contraction) from 0. Words are
indexed with the first symbol most significant, which makes word order agree
with the circular order of the points. The words ``0^N`` and ``(d-1)^N`` both
land on the fixed point ``0 = 1``, so ``d^N - 1`` distinct points remain.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .circle_map import circle_distance
from .errors import PeriodicOrbitError, ValidationError, check_budget

CONTRACTION_TOL = 1e-14
CONTRACTION_MAX_ITER = 5000
DEDUP_TOL = 1e-9
ORBIT_TOL = 1e-10


def word_symbols(index, degree, N):
    """Symbols of the word with the given index (first symbol most significant)."""
    index = np.asarray(index, dtype=np.int64)
    out = np.empty(index.shape + (N,), dtype=np.int64)
    k = index.copy()
    for i in range(N - 1, -1, -1):
        out[..., i] = k % degree
        k = k // degree
    return out


def shift_index(index, degree, N):
    """Index of ``sigma(w)``, the cyclic left shift of the word."""
    top = degree ** (N - 1)
    return (index % top) * degree + index // top


@dataclass(frozen=True, eq=False)
class PeriodicOrbitSet:
    """``Fix(f^N)`` labelled by itinerary words.

    ``table`` holds the point of every one of the ``d^N`` words (including the
    duplicate ``(d-1)^N``); ``indices`` selects the ``d^N - 1`` distinct ones.
    """

    period: int
    degree: int
    table: np.ndarray
    indices: np.ndarray

    @property
    def points(self):
        return self.table[self.indices]

    @property
    def words(self):
        return word_symbols(self.indices, self.degree, self.period)

    def __len__(self):
        return self.indices.size

    def birkhoff_table(self, psi):
        """``S_N psi`` at every word's point, summed along the cyclic shifts."""
        vals = np.asarray(psi(self.table), dtype=np.float64)
        idx = np.arange(self.table.size, dtype=np.int64)
        acc = vals.copy()
        for _ in range(self.period - 1):
            idx = shift_index(idx, self.degree, self.period)
            acc += vals[idx]
        return acc

    def entries(self, psi=None):
        """Yield ``(word, point, birkhoff)`` triples (birkhoff is None without psi)."""
        S = None if psi is None else self.birkhoff_table(psi)[self.indices]
        for n, (w, x) in enumerate(zip(self.words, self.points)):
            yield tuple(int(s) for s in w), float(x), None if S is None else float(S[n])


def periodic_points(f, N, *, tol=CONTRACTION_TOL, max_iter=CONTRACTION_MAX_ITER):
    """Enumerate ``Fix(f^N)`` by contracting composed inverse branches.

    Raises :class:`PeriodicOrbitError` if an iteration fails, if an orbit step
    ``f(x_w) ~ x_{sigma w}`` is off by more than ``1e-10``, or if de-duplication
    at ``1e-9`` does not leave exactly ``d^N - 1`` points.
    """
    d = f.degree
    check_budget(d, N)
    raw, ok = _kernels.periodic_table(N, *f._params, tol, max_iter)
    if not ok.all():
        bad = np.nonzero(~ok)[0][:5]
        raise PeriodicOrbitError(f"contraction did not converge for word indices {bad.tolist()}")
    table = raw - np.floor(raw)

    idx = np.arange(table.size, dtype=np.int64)
    step_err = circle_distance(f(table), table[shift_index(idx, d, N)])
    if step_err.max() > ORBIT_TOL:
        raise PeriodicOrbitError(f"orbit consistency error {step_err.max():.3g} exceeds {ORBIT_TOL}")

    order = np.argsort(table, kind="stable")
    sorted_pts = table[order]
    gaps = np.append(np.diff(sorted_pts), sorted_pts[0] + 1.0 - sorted_pts[-1])
    hits = np.nonzero(gaps < DEDUP_TOL)[0]
    pairs = {frozenset((int(order[i]), int(order[(i + 1) % order.size]))) for i in hits}
    if table.size == 1:
        pairs = set()
    expected = {frozenset((0, table.size - 1))}
    if pairs != expected:
        raise PeriodicOrbitError(
            f"unexpected collisions among period-{N} points: {sorted(tuple(sorted(p)) for p in pairs)}"
        )
    keep = idx[:-1]
    if keep.size != d ** N - 1:
        raise PeriodicOrbitError(f"expected {d ** N - 1} points, found {keep.size}")
    table.setflags(write=False)
    return PeriodicOrbitSet(period=N, degree=d, table=table, indices=keep)


def birkhoff_sum(f, psi, x, N):
    """``sum_{i<N} psi(f^i x)`` by forward iteration."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    y = np.asarray(x, dtype=np.float64)
    total = np.zeros_like(y)
    for _ in range(N):
        total = total + psi(y)
        y = f(y)
    return total


@dataclass(frozen=True, eq=False)
class BowenMeasure:
    """Atoms at ``Fix(f^N)`` with weights ``exp(S_N psi)/Z_N``."""

    period: int
    atoms: np.ndarray
    weights: np.ndarray
    Z: float
    words: np.ndarray
    birkhoff: np.ndarray

    @cached_property
    def _sorted(self):
        order = np.argsort(self.atoms, kind="stable")
        cum = np.cumsum(self.weights[order])
        return self.atoms[order], cum / cum[-1]

    def integrate(self, phi):
        return integrate_discrete(self, phi)

    def cdf(self, x):
        return discrete_cdf(self, x)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["word", "point", "birkhoff", "weight"])
            for word, x, s, wt in zip(self.words, self.atoms, self.birkhoff, self.weights):
                w.writerow(["".join(str(int(c)) for c in word), repr(float(x)), repr(float(s)), repr(float(wt))])


def _normalize(S):
    top = S.max()
    e = np.exp(S - top)
    total = e.sum()
    return e / total, float(np.exp(top) * total)


def bowen_measure(f, psi=None, N=1, *, orbits=None):
    """The weighted periodic-orbit measure ``mu^N_psi`` (``psi_f`` by default)."""
    if psi is None:
        psi = f.potential()
    if orbits is None:
        orbits = periodic_points(f, N)
    S = orbits.birkhoff_table(psi)[orbits.indices]
    weights, Z = _normalize(S)
    return BowenMeasure(
        period=orbits.period,
        atoms=orbits.points,
        weights=weights,
        Z=Z,
        words=orbits.words,
        birkhoff=S,
    )


def integrate_discrete(mu, phi):
    vals = np.asarray(phi(mu.atoms))
    return np.sum(mu.weights * vals)


def discrete_cdf(mu, x):
    """Mass of atoms in ``[0, x]``; the atom at 0 counts for every ``x >= 0``."""
    atoms, cum = mu._sorted
    xs = np.asarray(x, dtype=np.float64)
    if np.any((xs < 0.0) | (xs > 1.0)):
        raise ValidationError("discrete_cdf takes x in [0, 1]")
    k = np.searchsorted(atoms, xs, side="right")
    out = np.where(k > 0, cum[np.maximum(k - 1, 0)], 0.0)
    return out if out.ndim else float(out)


def partition_ratios(f, psi=None, N_max=1, *, pressure_value=None, grid=1 << 14):
    """``Z_n exp(-n P)`` for ``n = 1..N_max``.

    For ``psi=None`` the geometric potential is used and ``P = 0``; otherwise
    the pressure is computed by the transfer operator unless supplied.
    """
    if N_max < 1:
        raise ValidationError("N_max must be >= 1")
    if psi is None:
        P = 0.0
    elif pressure_value is not None:
        P = float(pressure_value)
    else:
        from .transfer import pressure
        P = pressure(f, psi, grid)
    ratios = []
    for n in range(1, N_max + 1):
        mu = bowen_measure(f, psi, n)
        ratios.append(mu.Z * np.exp(-n * P))
    return np.array(ratios)


def partition_bound_check(f, psi=None, N_max=1, **kwargs):
    """Smallest ``D`` with ``Z_n e^{-nP}`` in ``[1/D, D]`` for all ``n <= N_max``."""
    r = partition_ratios(f, psi, N_max, **kwargs)
    return float(max(r.max(), (1.0 / r).max()))


def lift_correction(f, phi, N, psi=None, *, orbits=None):
    """Compare circle and shift periodic measures for the same potential.

    The shift has ``d^N`` period-``N`` points while the circle has ``d^N - 1``;
    both ``0^N`` and ``(d-1)^N`` code the fixed point ``0``. Returns the
    measured ``|int phi o pi d(nu) - int phi o pi d(mu_shift)|`` and the bound
    ``2 e^{S_N psi(0)} sup|phi| / Z_N`` on it.
    """
    if psi is None:
        psi = f.potential()
    if orbits is None:
        orbits = periodic_points(f, N)
    S_all = orbits.birkhoff_table(psi)
    vals = np.asarray(phi(orbits.table))
    e_all = np.exp(S_all)
    Z_circle = e_all[orbits.indices].sum()
    circle = np.sum(e_all[orbits.indices] * vals[orbits.indices]) / Z_circle
    shift = np.sum(e_all * vals) / e_all.sum()
    dup = e_all[-1]
    bound = 2.0 * dup * np.max(np.abs(vals)) / Z_circle
    return float(abs(circle - shift)), float(bound)
