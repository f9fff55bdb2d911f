"""Pooled Nadaraya-Watson and local polynomial regression with spread bandwidths.

Both estimators use the indicator kernel on the closed window
``|X_i - x| <= h``.  The local polynomial estimator fits a degree-``l``
polynomial in the rescaled offsets ``(X_i - x) / h`` with basis
``(1, u, u^2/2!, ..., u^l/l!)``; it returns 0 when the minimum eigenvalue of
the Gram matrix falls below a gate threshold proportional to the expected
pooled window count, and truncates the fit to 0 once its magnitude reaches
``T1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import NumericalError
from .spread import SpreadContext, solve_spread

SOURCE = "source"
TARGET = "target"
MODES = ("pooled", "source_only", "target_only")


@dataclass(frozen=True)
class Sample:
    """Labelled observations with origin tags (``is_target`` False for source rows)."""

    x: np.ndarray
    y: np.ndarray
    is_target: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        tag = np.asarray(self.is_target, dtype=bool)
        if not (x.shape == y.shape == tag.shape) or x.ndim != 1:
            raise ValueError("x, y and origin tags must be 1-d arrays of equal length")
        if np.any(x < 0) or np.any(x > 1) or np.any(np.isnan(x)):
            raise ValueError("covariates must lie in [0, 1]")
        for name, arr in (("x", x), ("y", y), ("is_target", tag)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_arrays(cls, source_x=(), source_y=(), target_x=(), target_y=()) -> "Sample":
        sx, sy = np.asarray(source_x, dtype=float), np.asarray(source_y, dtype=float)
        tx, ty = np.asarray(target_x, dtype=float), np.asarray(target_y, dtype=float)
        tags = np.concatenate([np.zeros(sx.size, dtype=bool), np.ones(tx.size, dtype=bool)])
        return cls(np.concatenate([sx, tx]), np.concatenate([sy, ty]), tags)

    @classmethod
    def from_rows(cls, rows: Iterable) -> "Sample":
        xs, ys, tags = [], [], []
        for x, y, origin in rows:
            if origin not in (SOURCE, TARGET):
                raise ValueError(f"origin must be 'source' or 'target', got {origin!r}")
            xs.append(float(x))
            ys.append(float(y))
            tags.append(origin == TARGET)
        return cls(np.array(xs), np.array(ys), np.array(tags, dtype=bool))

    def __len__(self) -> int:
        return self.x.size

    @property
    def n(self) -> int:
        return int(self.x.size - self.is_target.sum())

    @property
    def n_T(self) -> int:
        return int(self.is_target.sum())

    def subset(self, mask) -> "Sample":
        mask = np.asarray(mask)
        return Sample(self.x[mask], self.y[mask], self.is_target[mask])

    def source_only(self) -> "Sample":
        return self.subset(~self.is_target)

    def target_only(self) -> "Sample":
        return self.subset(self.is_target)

    def rows(self):
        for x, y, t in zip(self.x.tolist(), self.y.tolist(), self.is_target.tolist()):
            yield x, y, TARGET if t else SOURCE


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning constants for the regression estimators.

    ``gate`` selects the eigenvalue gate: ``"known"`` compares against
    (n + n_T) H / 8 with the true interval masses, ``"plugin"`` against
    (n + n_T) H_hat / (16 T0) with estimated ones.  ``T1`` defaults to
    ``kappa + 4 sigma_bar`` and ``T0`` to ``2 T1``.
    """

    beta: float
    kappa: float = 1.0
    c_bandwidth: float = 0.7
    order_l: Optional[int] = None
    sigma_bar: float = 0.3
    T1: Optional[float] = None
    T0: Optional[float] = None
    gate: str = "known"

    def __post_init__(self):
        if not self.beta > 0 or not self.kappa > 0 or not self.c_bandwidth > 0:
            raise ValueError("beta, kappa and c_bandwidth must be positive")
        if self.gate not in ("known", "plugin"):
            raise ValueError("gate must be 'known' or 'plugin'")
        if self.order_l is None:
            object.__setattr__(self, "order_l", 0 if self.beta <= 1 else int(math.floor(self.beta)))
        if self.order_l < 0:
            raise ValueError("order_l must be non-negative")
        if self.T1 is None:
            object.__setattr__(self, "T1", self.kappa + 4.0 * self.sigma_bar)
        if self.T0 is None:
            object.__setattr__(self, "T0", 2.0 * self.T1)
        if not (self.T1 > 0 and self.T0 > 0):
            raise ValueError("T0 and T1 must be positive")
        if self.gate == "plugin" and not math.isclose(self.T0, 2.0 * self.T1):
            raise ValueError("the plug-in estimator requires T0 = 2 T1")

    @property
    def gate_factor(self) -> float:
        return 1.0 / 8.0 if self.gate == "known" else 1.0 / (16.0 * self.T0)


def min_eigen_sym(m, tol: float = 1e-15, max_sweeps: int = 100) -> float:
    """Smallest eigenvalue of a small symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(m, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12:
        raise ValueError("matrix is not symmetric")
    k = a.shape[0]
    scale = np.linalg.norm(a)
    if k == 1 or scale == 0.0:
        return float(np.min(np.diag(a)))
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(a, 1) ** 2)))
        if off <= tol * scale:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(k)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return float(np.min(np.diag(a)))


class _Window:
    """Sorted covariates with prefix sums for O(log n) window queries."""

    def __init__(self, s: Sample):
        order = np.argsort(s.x, kind="stable")
        self.x = s.x[order]
        self.y = s.y[order]
        self.csum = np.concatenate([[0.0], np.cumsum(self.y)])

    def bounds(self, x, h):
        lo = np.searchsorted(self.x, np.asarray(x) - h, side="left")
        hi = np.searchsorted(self.x, np.asarray(x) + h, side="right")
        return lo, hi

    def means(self, x, h):
        lo, hi = self.bounds(x, h)
        count = hi - lo
        total = self.csum[hi] - self.csum[lo]
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(count > 0, total / np.maximum(count, 1), 0.0)
        return mean, count


def nw_estimate(x: float, s: Sample, bandwidth: float) -> float:
    """Window average of the responses with |X_i - x| <= bandwidth, 0 if the window is empty."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    inside = np.abs(s.x - x) <= bandwidth
    if not inside.any():
        return 0.0
    return float(s.y[inside].mean())


def nw_curve(grid, s: Sample, bandwidths) -> np.ndarray:
    """Vectorised :func:`nw_estimate` over a grid with per-point bandwidths."""
    mean, _ = _Window(s).means(np.asarray(grid, dtype=float), np.asarray(bandwidths, dtype=float))
    return mean


def _basis(u: np.ndarray, order: int) -> np.ndarray:
    return np.stack([u**k / math.factorial(k) for k in range(order + 1)], axis=-1)


def local_poly_estimate(x: float, s: Sample, t: float, cfg: EstimatorConfig, gate_mass: float) -> float:
    """Gated, truncated local polynomial fit of order ``cfg.order_l`` at x with window half-width t.

    ``gate_mass`` is the pooled interval mass (n H + n_T H_T) / (n + n_T) of
    the window, exact or estimated depending on ``cfg.gate``.
    """
    if not t > 0:
        raise ValueError("window half-width must be positive")
    inside = np.abs(s.x - x) <= t
    if not inside.any():
        return 0.0
    z = _basis((s.x[inside] - x) / t, cfg.order_l)
    gram = z.T @ z
    threshold = cfg.gate_factor * len(s) * gate_mass
    lam = min_eigen_sym(gram)
    if lam < threshold:
        return 0.0
    if lam <= 1e-12 * max(np.abs(gram).max(), 1.0):
        raise NumericalError(f"singular local design at x={x:g} despite passing the gate")
    coef = np.linalg.solve(gram, z.T @ s.y[inside])
    fit = float(coef[0])
    return fit if abs(fit) < cfg.T1 else 0.0


def _local_constant_curve(grid, s: Sample, h, cfg: EstimatorConfig, gate_mass) -> np.ndarray:
    # order 0: the Gram matrix is the window count
    mean, count = _Window(s).means(grid, h)
    threshold = cfg.gate_factor * len(s) * gate_mass
    fit = np.where((count > 0) & (count >= threshold), mean, 0.0)
    return np.where(np.abs(fit) < cfg.T1, fit, 0.0)


def fit_curve(grid, s: Sample, ctx: SpreadContext, cfg: EstimatorConfig, mode: str = "pooled") -> np.ndarray:
    """Estimate f on ``grid`` with bandwidth c * t_n(x).

    ``source_only`` and ``target_only`` drop the other population from the
    data and zero its count in ``ctx`` before solving for the spread.  With
    known densities and ``order_l == 0`` the plain NW estimator is used;
    otherwise the gated local polynomial estimator.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    if mode == "source_only":
        ctx, data = ctx.with_counts(ctx.n, 0), s.source_only()
    elif mode == "target_only":
        ctx, data = ctx.with_counts(0, ctx.n_T), s.target_only()
    else:
        data = s
    h = cfg.c_bandwidth * solve_spread(ctx, grid)
    if len(data) == 0:
        return np.zeros_like(grid)
    if cfg.order_l == 0 and cfg.gate == "known":
        return nw_curve(grid, data, h)
    gate_mass = ctx.pooled_count(grid - h, grid + h) / ctx.total
    if cfg.order_l == 0:
        return _local_constant_curve(grid, data, h, cfg, gate_mass)
    return np.array(
        [local_poly_estimate(x, data, hx, cfg, gm) for x, hx, gm in zip(grid, h, gate_mass)]
    )
