"""Birkhoff cones of locally constant functions on the full shift.

For ``phi`` of depth ``m`` every constraint of the cone

    C_L = {phi >= 0 : phi(x) <= exp(L d_theta(x, y)) phi(y) when x_0 = y_0}

reduces to a finite family indexed by pairs of depth-``m`` cylinders, with the
distance ``theta^c`` of the common prefix length ``c`` (capped at ``m``).
Membership, the Hilbert metric and the contraction certificate are all
computed by enumerating that family.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ValidationError
from .symbolic import CylinderFunction, equilibrium_data, normalize_potential, transfer_cylinder

#: Relative slack for cone inequalities that hold with equality.
CONE_RTOL = 1e-12


@dataclass(frozen=True)
class ConeParams:
    theta: float
    xi: float
    L: float

    def __post_init__(self):
        if not 0.0 < self.theta < self.xi < 1.0:
            raise ValidationError(f"need 0 < theta < xi < 1, got theta={self.theta}, xi={self.xi}")
        if not self.L > 0:
            raise ValidationError(f"cone parameter L must be > 0, got {self.L}")


@dataclass(frozen=True)
class ContractionCertificate:
    theta: float
    xi: float
    L: float
    L0: float
    Delta: float
    tau: float
    C: float

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    def corrupted(self, factor):
        """Same certificate with ``tau`` divided by ``factor`` (for falsification checks)."""
        return ContractionCertificate(
            self.theta, self.xi, self.L, self.L0, self.Delta, self.tau / factor, self.C
        )


def _groups(phi, c):
    """Values grouped by their length-``c`` prefix, one row per group."""
    return phi.values.reshape(phi.s ** c, -1)


def theta_seminorm(phi, theta):
    """``|phi|_theta = sup |phi(x) - phi(y)| / d_theta(x, y)``."""
    return max(float(np.ptp(_groups(phi, c), axis=1).max()) / theta ** c for c in range(phi.depth))


def theta_norm(phi, theta):
    return float(np.abs(phi.values).max()) + theta_seminorm(phi, theta)


def short_range_seminorm(phi, theta):
    """``V(phi)``: the Lipschitz quotient over pairs sharing the first symbol."""
    return max(
        (float(np.ptp(_groups(phi, c), axis=1).max()) / theta ** c for c in range(1, phi.depth)),
        default=0.0,
    )


def norm_L(phi, p):
    """``max(sup |phi|, V(phi) / 2L)``."""
    return max(float(np.abs(phi.values).max()), short_range_seminorm(phi, p.theta) / (2.0 * p.L))


def norm_comparison_constants(L):
    """``(c1, c2)`` with ``norm_L <= c1 |.|_theta`` and ``|.|_theta <= c2 norm_L``.

    For locally constant functions ``V <= |.|_theta`` gives ``c1``; the
    seminorm splits into the first-symbol pairs (at most ``2 sup``) and the
    rest (at most ``V``), giving ``c2 = 1 + 2 max(1, L)``.
    """
    return max(1.0, 1.0 / (2.0 * L)), 1.0 + 2.0 * max(1.0, L)


def cone_contains(phi, p):
    """Finite check of ``phi in C_L``: positivity plus every same-first-symbol pair."""
    v = phi.values
    if np.any(v < 0) or not np.any(v > 0):
        return False
    for c in range(1, phi.depth):
        g = _groups(phi, c)
        if np.any(g.max(axis=1) > math.exp(p.L * p.theta ** c) * g.min(axis=1) * (1 + CONE_RTOL)):
            return False
    return True


def _pair_table(s, m, theta):
    """Same-first-symbol index pairs (u, v) and their distance ``theta^c``."""
    n = s ** m
    digits = np.array([[(k // s ** (m - 1 - j)) % s for j in range(m)] for k in range(n)])
    eq = digits[:, None, :] == digits[None, :, :]
    c = np.cumprod(eq, axis=2).sum(axis=2)
    u, v = np.nonzero(c >= 1)
    return u, v, theta ** c[u, v].astype(np.float64)


def _alpha(phi, psi, p):
    """Largest ``lam`` with ``psi - lam phi`` in the closed cone."""
    s, m = phi.s, max(phi.depth, psi.depth)
    a_vals = phi.extend(m).values
    b_vals = psi.extend(m).values
    pos = a_vals > 0
    if np.any(~pos & (b_vals < 0)):
        return -np.inf
    ratios = [np.min(b_vals[pos] / a_vals[pos])] if pos.any() else []
    u, v, d = _pair_table(s, m, p.theta)
    e = np.exp(p.L * d)
    coef = e * a_vals[v] - a_vals[u]
    rhs = e * b_vals[v] - b_vals[u]
    act = coef > 0
    if act.any():
        ratios.append(np.min(rhs[act] / coef[act]))
    return float(min(ratios)) if ratios else np.inf


def hilbert_metric(phi, psi, p):
    """``Theta(phi, psi) = log(beta / alpha)`` on the cone ``C_L``."""
    alpha = _alpha(phi, psi, p)
    alpha_rev = _alpha(psi, phi, p)
    if not alpha > 0:
        raise ValidationError("alpha <= 0: the pair sits on a boundary ray of the cone")
    if not alpha_rev > 0:
        raise ValidationError("beta is infinite: the pair sits on a boundary ray of the cone")
    beta = 1.0 / alpha_rev
    return max(0.0, math.log(beta / alpha))


def diameter_bound(xi, L):
    """``2 log((1 + xi) / (1 - xi)) + 2 xi L``."""
    if not 0.0 < xi < 1.0:
        raise ValidationError(f"xi must lie in (0, 1), got {xi}")
    if L < 0:
        raise ValidationError(f"L must be >= 0, got {L}")
    return 2.0 * math.log((1.0 + xi) / (1.0 - xi)) + 2.0 * xi * L


def cone_parameters(theta, M, xi):
    """Smallest admissible ``L`` and ``L0`` for a potential with ``|psi|_theta <= M``."""
    if not 0.0 < theta < 1.0:
        raise ValidationError(f"theta must lie in (0, 1), got {theta}")
    if not xi > theta:
        raise ValidationError(f"need xi > theta, got xi={xi}, theta={theta}")
    if not xi < 1.0:
        raise ValidationError(f"xi must be < 1, got {xi}")
    if M < 0:
        raise ValidationError(f"M must be >= 0, got {M}")
    L = theta * M / (xi - theta)
    L0 = theta * ((2.0 + theta) * M + (1.0 + theta) * L) / (xi - theta)
    return L, L0


def contraction_certificate(theta, M, xi, *, L0=None):
    """Decay constants ``(Delta, tau, C)`` for the normalized operator.

    ``L0`` may be forced; by default the smallest admissible value is used.
    """
    L, L0_min = cone_parameters(theta, M, xi)
    L0 = L0_min if L0 is None else float(L0)
    Delta = diameter_bound(xi, L0)
    tau = math.tanh(Delta / 4.0)
    C = math.expm1(Delta) / tau
    return ContractionCertificate(theta, xi, L, L0, Delta, tau, C)


def certified_decay_table(psi, phi, n_max, *, theta=0.5, xi=0.75, M=None, certificate=None):
    """Exact ``||L^n phi - int phi||_theta`` next to its certified bound, ``n = 1..n_max``.

    ``L`` is the normalized operator of the depth-1 potential ``psi``. The
    bound is ``2 C tau^n (||phi||_theta + |phi|_theta / L0)``: ``phi`` is split
    into positive and negative parts, each shifted into the cone ``C_{L0}``
    preserved by the normalized operator.
    """
    if n_max > 30:
        raise ValidationError("certified decay is checked for n_max <= 30")
    if psi.depth != 1:
        raise ValidationError("certified decay needs a depth-1 potential")
    psi = normalize_potential(psi)
    if M is None:
        M = theta_seminorm(psi, theta)
    cert = certificate or contraction_certificate(theta, M, xi)
    mean = equilibrium_data(psi).integrate(phi)
    semi = theta_seminorm(phi, cert.theta)
    if semi == 0.0:
        shift = 0.0
    elif cert.L0 > 0:
        shift = semi / cert.L0
    else:
        shift = math.inf
    scale = theta_norm(phi, cert.theta) + shift
    lhs = np.empty(n_max)
    rhs = np.empty(n_max)
    cur = phi
    for n in range(1, n_max + 1):
        cur = transfer_cylinder(psi, cur)
        lhs[n - 1] = theta_norm(cur - mean, cert.theta)
        rhs[n - 1] = 2.0 * cert.C * cert.tau ** n * scale
    return lhs, rhs


def verify_certified_decay(psi, phi, n_max, **kwargs):
    """True when the exact decay respects the certified bound for all ``n <= n_max``."""
    lhs, rhs = certified_decay_table(psi, phi, n_max, **kwargs)
    return bool(np.all(lhs <= rhs))
