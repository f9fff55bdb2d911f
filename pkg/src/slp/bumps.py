"""Worst-case regression functions built from disjoint smooth bumps.

The base bump is ``psi(u) = exp(-1 / (1 - (2u - 1)^2))`` on (0, 1).  Its
derivatives have the closed form ``phi^(k)(v) = P_k(v) / (1 - v^2)^(2k) phi(v)``
with ``phi(v) = exp(-1 / (1 - v^2))`` and the polynomial recursion

    P_{k+1} = P_k' (1 - v^2)^2 + 4 k v P_k (1 - v^2) - 2 v P_k,   P_0 = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .special import adaptive_simpson

HOLDER_GRID = 2001
HOLDER_SLACK = 1.05


@lru_cache(maxsize=None)
def _bump_poly(k: int) -> Polynomial:
    p = Polynomial([1.0])
    v = Polynomial([0.0, 1.0])
    w = 1.0 - v * v
    for j in range(k):
        p = p.deriv() * w * w + 4.0 * j * v * p * w - 2.0 * v * p
    return p


def bump(u, k: int = 0):
    """k-th derivative of the unscaled bump at u; zero outside (0, 1)."""
    u = np.asarray(u, dtype=float)
    v = 2.0 * u - 1.0
    inside = np.abs(v) < 1.0
    out = np.zeros_like(v)
    vi = v[inside]
    w = 1.0 - vi * vi
    out[inside] = 2.0**k * _bump_poly(k)(vi) / w ** (2 * k) * np.exp(-1.0 / w)
    return float(out) if out.ndim == 0 else out


def holder_split(beta: float) -> Tuple[int, float]:
    """(l, gamma) with l the largest integer below beta and gamma = beta - l in (0, 1]."""
    l = math.ceil(beta) - 1
    return l, beta - l


@lru_cache(maxsize=None)
def holder_quotient(l: int, gamma: float) -> float:
    """Grid maximum of |psi^(l)(x) - psi^(l)(y)| / |x - y|^gamma over [0, 1]."""
    if gamma == 1.0:
        u = np.linspace(0.0, 1.0, 10 * HOLDER_GRID)
        return float(np.max(np.abs(bump(u, l + 1))))
    u = np.linspace(0.0, 1.0, HOLDER_GRID)
    g = bump(u, l)
    step = u[1] - u[0]
    best = 0.0
    for lag in range(1, HOLDER_GRID):
        diff = np.max(np.abs(g[lag:] - g[:-lag]))
        best = max(best, diff / (lag * step) ** gamma)
    return best


def bump_scale(beta: float, kappa: float) -> float:
    """Factor making the bump sum bounded by kappa with l-th derivative Hölder-gamma constant at most kappa.

    Two points in different bumps pick up at most a factor 2^(1 - gamma) over
    the single-bump quotient, which is scale free under u -> m x.
    """
    l, gamma = holder_split(beta)
    sup = float(np.max(bump(np.linspace(0.0, 1.0, HOLDER_GRID))))
    quotient = 2.0 ** (1.0 - gamma) * holder_quotient(l, gamma) * HOLDER_SLACK
    return kappa / max(sup, quotient)


@dataclass(frozen=True)
class WorstCaseFunction:
    """f(x) = sum_j sign_j m^-beta psi(m x - (j - 1)) for j = 1..J, psi the scaled bump."""

    m: int
    signs: Tuple[int, ...]
    beta: float
    kappa: float
    scale: float

    @property
    def J(self) -> int:
        return len(self.signs)

    def derivative(self, x, k: int = 0):
        xv = np.asarray(x, dtype=float)
        pos = self.m * xv
        j = np.clip(np.floor(pos).astype(int), 0, self.J - 1)
        sign = np.asarray(self.signs, dtype=float)[j]
        val = sign * self.scale * float(self.m) ** (k - self.beta) * bump(pos - j, k)
        out = np.where((xv >= 0) & (pos <= self.J), val, 0.0)
        return float(out) if out.ndim == 0 else out

    def __call__(self, x):
        return self.derivative(x, 0)

    def psi_sq_integral(self, tol: float = 1e-13) -> float:
        """Integral of the scaled bump squared over (0, 1)."""
        return self.scale**2 * adaptive_simpson(lambda u: bump(u) ** 2, 0.0, 1.0, tol)

    def support(self, j: int) -> Tuple[float, float]:
        return (j - 1) / self.m, j / self.m

    def sq_distance(self, other=None, rel_tol: float = 1e-12) -> float:
        """Integral over [0, 1] of (f - other)^2 by adaptive Simpson on each bump support.

        ``other`` defaults to the zero function and must be supported on the
        first J bump intervals as well.
        """
        unit = self.scale**2 * float(self.m) ** (-(2.0 * self.beta + 1.0))
        g = (lambda x: self(x) ** 2) if other is None else (lambda x: (self(x) - other(x)) ** 2)
        return sum(adaptive_simpson(g, *self.support(j), rel_tol * unit) for j in range(1, self.J + 1))


def worst_case_function(m: int, J: int, signs: Sequence[int], beta: float, kappa: float) -> WorstCaseFunction:
    if not 1 <= J <= m:
        raise ValueError("need 1 <= J <= m")
    if len(signs) != J or any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be J values in {+1, -1}")
    if not (beta > 0 and kappa > 0):
        raise ValueError("beta and kappa must be positive")
    return WorstCaseFunction(int(m), tuple(int(s) for s in signs), float(beta), float(kappa), bump_scale(beta, kappa))
