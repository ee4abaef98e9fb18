"""Exact thermodynamic formalism on the full shift over ``s`` symbols.

Locally constant functions are stored by their value on each depth-``m``
cylinder, indexed by ``sum_j w_j s^(m-1-j)`` (first symbol most significant).
For these, periodic sums and transfer-operator powers are finite
computations and serve as exact oracles.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels._numpy import word_digits
from .errors import BudgetError, ValidationError, check_budget

CHUNK = 1 << 14


def _cylinder_index(symbols, s):
    idx = np.zeros(np.shape(symbols)[:-1], dtype=np.int64)
    for j in range(np.shape(symbols)[-1]):
        idx = idx * s + np.asarray(symbols)[..., j]
    return idx


@dataclass(frozen=True)
class Word:
    """A finite string over ``{0..s-1}``."""

    symbols: tuple
    s: int

    def __post_init__(self):
        sym = tuple(int(c) for c in self.symbols)
        if not sym:
            raise ValidationError("words have length >= 1")
        if any(c < 0 or c >= self.s for c in sym):
            raise ValidationError(f"symbols must lie in 0..{self.s - 1}")
        object.__setattr__(self, "symbols", sym)

    def __len__(self):
        return len(self.symbols)

    @property
    def index(self):
        return int(_cylinder_index(np.array(self.symbols), self.s))


def d_theta(u, v, theta):
    """``theta`` to the length of the common prefix of ``u`` and ``v``.

    When one prefix is exhausted without disagreement the value is
    ``theta^min(|u|, |v|)``, an upper bound for the distance of any infinite
    continuations.
    """
    if not 0.0 < theta < 1.0:
        raise ValidationError(f"theta must lie in (0, 1), got {theta}")
    u = tuple(getattr(u, "symbols", u))
    v = tuple(getattr(v, "symbols", v))
    if not u or not v:
        raise ValidationError("d_theta needs nonempty prefixes")
    n = 0
    for a, b in zip(u, v):
        if a != b:
            break
        n += 1
    return theta ** n


@dataclass(frozen=True)
class ThetaMetric:
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValidationError(f"theta must lie in (0, 1), got {self.theta}")

    def __call__(self, u, v):
        return d_theta(u, v, self.theta)


@dataclass(frozen=True, eq=False)
class CylinderFunction:
    """Locally constant function of the first ``depth`` coordinates."""

    s: int
    depth: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64).reshape(-1)
        if self.s < 2:
            raise ValidationError("alphabet size must be >= 2")
        if self.depth < 1:
            raise ValidationError("depth must be >= 1")
        if vals.size != self.s ** self.depth:
            raise ValidationError(
                f"expected {self.s ** self.depth} values for s={self.s}, depth={self.depth}, got {vals.size}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, c, s, depth=1):
        return cls(s, depth, np.full(s ** depth, float(c)))

    @classmethod
    def indicator(cls, word, s):
        """``chi_[w]``, the indicator of the cylinder of ``w``."""
        w = Word(getattr(word, "symbols", word), s)
        vals = np.zeros(s ** len(w))
        vals[w.index] = 1.0
        return cls(s, len(w), vals)

    def __call__(self, word):
        """Value on (any infinite continuation of) ``word``; needs ``len >= depth``."""
        sym = np.asarray(getattr(word, "symbols", word), dtype=np.int64)
        if sym.shape[-1] < self.depth:
            raise ValidationError("word shorter than the function depth")
        return self.values[_cylinder_index(sym[..., : self.depth], self.s)]

    def extend(self, depth):
        """Same function represented at a larger depth."""
        if depth < self.depth:
            raise ValidationError("cannot shrink the depth of a cylinder function")
        vals = np.repeat(self.values, self.s ** (depth - self.depth))
        return CylinderFunction(self.s, depth, vals)

    def __add__(self, other):
        if isinstance(other, CylinderFunction):
            m = max(self.depth, other.depth)
            return CylinderFunction(self.s, m, self.extend(m).values + other.extend(m).values)
        return CylinderFunction(self.s, self.depth, self.values + other)

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, CylinderFunction) else -other)

    def __mul__(self, c):
        return CylinderFunction(self.s, self.depth, self.values * float(c))

    __rmul__ = __mul__

    def to_json(self):
        return json.dumps({"s": self.s, "depth": self.depth, "values": [float(v) for v in self.values]})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text) if isinstance(text, str) else text
        return cls(int(obj["s"]), int(obj["depth"]), obj["values"])


def _common_depth(*fns):
    s = fns[0].s
    if any(g.s != s for g in fns):
        raise ValidationError("cylinder functions live on different alphabets")
    return s, max(g.depth for g in fns)


@dataclass(frozen=True)
class EquilibriumData:
    """Pressure and Bernoulli equilibrium state of a depth-1 potential."""

    pressure: float
    probabilities: np.ndarray
    eigenvalue: float
    s: int

    @property
    def eigenfunction(self):
        return CylinderFunction.constant(1.0, self.s)

    def measure(self, word):
        """``mu[w] = prod_j p_{w_j}``."""
        sym = getattr(word, "symbols", word)
        return float(np.prod(self.probabilities[np.asarray(sym, dtype=np.int64)]))

    def cylinder_measures(self, depth):
        """Measures of all depth-``depth`` cylinders in index order."""
        out = np.ones(1)
        for _ in range(depth):
            out = np.outer(out, self.probabilities).reshape(-1)
        return out

    def integrate(self, phi):
        return float(np.dot(self.cylinder_measures(phi.depth), phi.values))


def equilibrium_data(psi, s=None):
    """Exact data for a depth-1 potential: ``P = log sum exp(psi_i)``."""
    if psi.depth != 1:
        raise ValidationError("equilibrium_data needs a depth-1 potential")
    if s is not None and s != psi.s:
        raise ValidationError("alphabet size does not match the potential")
    vals = psi.values
    top = vals.max()
    e = np.exp(vals - top)
    total = e.sum()
    P = float(top + np.log(total))
    return EquilibriumData(pressure=P, probabilities=e / total, eigenvalue=float(np.exp(P)), s=psi.s)


def normalize_potential(psi):
    """``psi - P(psi)``, the normalized depth-1 potential."""
    return psi - equilibrium_data(psi).pressure


def periodic_sum(psi, phi, n):
    """Return ``(sum exp(S_n psi(x)) phi(x), Z_n)`` over ``sigma^n x = x``.

    Brute force over all ``s^n`` words ``w``, with ``x = w w w ...``; functions
    deeper than ``n`` read the periodic continuation.
    """
    s, _ = _common_depth(psi, phi)
    check_budget(s, n)
    return _kernels.word_sums(psi.values, psi.depth, phi.values, phi.depth, s, n)


def _periodic_points(words, length):
    n = words.shape[1]
    reps = -(-length // n)
    return np.tile(words, (1, reps))[:, :length]


def cylinder_decomposition_sum(psi, phi, n, *, exhaustive=False):
    """``sum_{|i|=n} (L^n_psi (chi_[i] phi))(x_i)`` with ``x_i = (i)^inf``.

    ``L^n`` is expanded into its ``s^n`` inverse branches (prepend a word
    ``j``, weight ``exp(S_n psi(j x))``). Only ``j = i`` can meet the cylinder
    ``[i]``, so the default skips the other branches; ``exhaustive=True``
    sums all of them, at cost ``s^(2n)``.
    """
    s, depth = _common_depth(psi, phi)
    check_budget(s, n)
    if exhaustive and s ** (2 * n) > 2 ** 24:
        raise BudgetError(f"exhaustive expansion needs {s}**{2 * n} terms")
    total = s ** n
    K = n + depth
    acc = 0.0
    for start in range(0, total, CHUNK):
        stop = min(total, start + CHUNK)
        words = word_digits(start, stop, s, n)
        base = _periodic_points(words, K)
        if exhaustive:
            branches = word_digits(0, total, s, n)
            bi = np.repeat(np.arange(stop - start), total)
            bj = np.tile(np.arange(total), stop - start)
            target, pre = words[bi], branches[bj]
            point = base[bi]
        else:
            target, pre, point = words, words, base
        weight = np.zeros(point.shape[0])
        for k in range(n - 1, -1, -1):
            point = np.concatenate((pre[:, k : k + 1], point[:, :-1]), axis=1)
            weight += psi(point)
        inside = np.all(point[:, :n] == target, axis=1)
        acc += float(np.sum(np.where(inside, np.exp(weight) * phi(point), 0.0)))
    return acc


def shift_equidistribution_error(psi, phi, n):
    """``|periodic average of phi - int phi d mu_psi|`` for depth-1 ``psi``."""
    eq = equilibrium_data(psi)
    weighted, Z = periodic_sum(psi, phi, n)
    return abs(weighted / Z - eq.integrate(phi))


def transfer_cylinder(psi, phi):
    """Exact ``(L_psi phi)(w) = sum_i exp(psi(i w)) phi(i w)``.

    The result is represented at depth ``max(depth psi, depth phi)``.
    """
    s, m = _common_depth(psi, phi)
    P = psi.extend(m).values.reshape(s, -1)
    F = phi.extend(m).values.reshape(s, -1)
    head = np.sum(np.exp(P) * F, axis=0)
    return CylinderFunction(s, m, np.repeat(head, s))
