"""Pointwise bandwidth (spread function) for pooled source/target samples.

For a point x the spread t = t_n(x) balances squared bias against the inverse
pooled window count::

    t^(2 beta) * (n * H(x +- t) + n_T * H_T(x +- t)) = 1

where H and H_T are the source and target masses of [x - t, x + t] clipped
to [0, 1].  The left-hand side is strictly increasing in t, so the root is
unique and bracketed bisection always converges.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .densities import UNIFORM, DensityModel
from .errors import SpreadError

DEFAULT_TOL = 1e-12
MAX_ITER = 200


@dataclass(frozen=True)
class SpreadContext:
    n: int
    n_T: int
    beta: float
    source: DensityModel = UNIFORM
    target: DensityModel = UNIFORM

    def __post_init__(self):
        if self.n < 0 or self.n_T < 0:
            raise ValueError("sample sizes must be non-negative")
        if self.n + self.n_T < 1:
            raise ValueError("n + n_T must be at least 1")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @property
    def total(self) -> int:
        return self.n + self.n_T

    def with_counts(self, n: int, n_T: int) -> "SpreadContext":
        return replace(self, n=n, n_T=n_T)

    def pooled_count(self, lo, hi):
        """Expected pooled window count n H + n_T H_T on [lo, hi]."""
        out = 0.0
        if self.n:
            out = out + self.n * self.source.mass(lo, hi)
        if self.n_T:
            out = out + self.n_T * self.target.mass(lo, hi)
        return out

    def pooled_pdf(self, x):
        """Mixture density (n h + n_T h_T) / (n + n_T)."""
        out = 0.0
        if self.n:
            out = out + self.n * self.source.pdf(x)
        if self.n_T:
            out = out + self.n_T * self.target.pdf(x)
        return out / self.total

    def window_equation(self, t, x):
        """g(t) = t^(2 beta) (n H + n_T H_T) at window half-width t."""
        t = np.asarray(t, dtype=float)
        return t ** (2.0 * self.beta) * self.pooled_count(x - t, x + t)


def default_bracket(ctx: SpreadContext):
    lo = (2.0 * ctx.total) ** (-1.0 / (2.0 * ctx.beta))
    return lo, 1.0


def solve_spread(ctx: SpreadContext, x, tol: float = DEFAULT_TOL, bracket=None):
    """Solve the window equation for t_n(x); ``x`` may be a scalar or an array.

    The returned t satisfies ``|g(t) - 1| <= tol * (n + n_T)``, unless the
    bracket shrinks to rounding level first, in which case the closest
    representable root is returned.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xv < 0) or np.any(xv > 1):
        raise ValueError("x must lie in [0, 1]")
    lo0, hi0 = default_bracket(ctx) if bracket is None else bracket
    if np.ndim(x) == 0:
        return _solve_scalar(ctx, float(x), tol, lo0, hi0)
    lo = np.full_like(xv, lo0)
    hi = np.full_like(xv, hi0)
    if np.any(ctx.window_equation(lo, xv) >= 1.0) or np.any(ctx.window_equation(hi, xv) < 1.0):
        raise SpreadError(f"cannot bracket the spread root in [{lo0:g}, {hi0:g}]")

    thresh = tol * ctx.total
    t = np.full_like(xv, np.nan)
    active = np.ones(xv.shape, dtype=bool)
    for _ in range(MAX_ITER):
        idx = np.flatnonzero(active)
        mid = 0.5 * (lo[idx] + hi[idx])
        g = ctx.window_equation(mid, xv[idx])
        hit = np.abs(g - 1.0) <= thresh
        t[idx[hit]] = mid[hit]
        below = g < 1.0
        lo[idx[below]] = mid[below]
        hi[idx[~below]] = mid[~below]
        active[idx[hit]] = False
        if not active.any():
            break
    if active.any():
        idx = np.flatnonzero(active)
        width = hi[idx] - lo[idx]
        if np.any(width > 8.0 * np.spacing(hi[idx])):
            raise SpreadError("spread bisection did not converge")
        # bracket collapsed to rounding level: take the end with the smaller residual
        g_lo = np.abs(ctx.window_equation(lo[idx], xv[idx]) - 1.0)
        g_hi = np.abs(ctx.window_equation(hi[idx], xv[idx]) - 1.0)
        t[idx] = np.where(g_lo <= g_hi, lo[idx], hi[idx])
    return float(t[0]) if np.ndim(x) == 0 else t.reshape(np.shape(x))


def _solve_scalar(ctx: SpreadContext, x: float, tol: float, lo: float, hi: float) -> float:
    # same bisection as the array path, on plain floats
    expo = 2.0 * ctx.beta

    def g(t):
        return t**expo * float(ctx.pooled_count(x - t, x + t))

    if g(lo) >= 1.0 or g(hi) < 1.0:
        raise SpreadError(f"cannot bracket the spread root in [{lo:g}, {hi:g}]")
    thresh = tol * ctx.total
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm - 1.0) <= thresh:
            return mid
        if gm < 1.0:
            lo = mid
        else:
            hi = mid
    if hi - lo > 8.0 * np.spacing(hi):
        raise SpreadError("spread bisection did not converge")
    return lo if abs(g(lo) - 1.0) <= abs(g(hi) - 1.0) else hi


def crossing_points(ctx: SpreadContext, tol: float = DEFAULT_TOL):
    """Points x1 < 1/2 < x2 with t_n(x1) = x1 and t_n(x2) = 1 - x2."""
    if ctx.total < 2.0 ** (2.0 * ctx.beta):
        raise ValueError("crossing points need n + n_T >= 2^(2 beta)")

    # at x1 the window is [0, 2 x1] and t = x1, so u = x1 solves the monotone
    # equation u^(2 beta) count(0, 2u) = 1 on (0, 1/2]; likewise u = 1 - x2
    def root(count):
        lo, hi = 0.0, 0.5
        for _ in range(MAX_ITER):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            g = mid ** (2.0 * ctx.beta) * count(mid)
            if abs(g - 1.0) <= tol * ctx.total:
                return mid
            if g < 1.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    x1 = root(lambda u: float(ctx.pooled_count(0.0, 2.0 * u)))
    x2 = 1.0 - root(lambda u: float(ctx.pooled_count(1.0 - 2.0 * u, 1.0)))
    return x1, x2


def spread_derivative(ctx: SpreadContext, x, t=None, eps: float = 1e-9):
    """Closed-form derivative of t_n at x, away from the two crossing points."""
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError("derivative defined on the open interval (0, 1)")
    if t is None:
        t = solve_spread(ctx, x)
    if abs(t - x) < eps or abs(t - (1.0 - x)) < eps:
        raise ValueError(f"x={x} is at a crossing point of the spread function")
    left_on = t < x
    right_on = t < 1.0 - x
    h_left = ctx.pooled_pdf(x - t) if left_on else 0.0
    h_right = ctx.pooled_pdf(x + t) if right_on else 0.0
    denom = 2.0 * ctx.beta / (ctx.total * t ** (2.0 * ctx.beta + 1.0)) + h_left + h_right
    return (h_left - h_right) / denom


def spread_order(x, n: int, n_T: int, a: float, beta: float):
    """Piecewise asymptotic order of t_n for a Beta(a, 1) source and uniform target.

    Equal to alpha_n on [0, alpha_n], (n x^(a-1) + n_T)^(-1/(2 beta + 1)) on
    (alpha_n, b_n) and 1 - b_n on [b_n, 1], with
    alpha_n = (n^((2 beta + 1)/(2 beta + a)) + n_T)^(-1/(2 beta + 1)) and
    1 - b_n = (n + n_T)^(-1/(2 beta + 1)).  No hidden constants.
    """
    if n + n_T < 1:
        raise ValueError("n + n_T must be at least 1")
    xv = np.asarray(x, dtype=float)
    p = 1.0 / (2.0 * beta + 1.0)
    alpha = (n ** ((2.0 * beta + 1.0) / (2.0 * beta + a)) + n_T) ** (-p)
    right = (n + n_T) ** (-p)
    b = 1.0 - right
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        middle = (n * np.where(xv > 0, xv, 1.0) ** (a - 1.0) + n_T) ** (-p)
    out = np.select([xv <= alpha, xv < b], [alpha, middle], default=right)
    return float(out) if np.ndim(x) == 0 else out


def tabulate(ctx: SpreadContext, grid_size: int):
    """Rows (x, t_n(x)) on an equispaced grid of ``grid_size`` points including both ends."""
    x = np.linspace(0.0, 1.0, grid_size)
    return list(zip(x.tolist(), solve_spread(ctx, x).tolist()))


__all__ = [
    "SpreadContext",
    "solve_spread",
    "crossing_points",
    "spread_derivative",
    "spread_order",
    "tabulate",
    "default_bracket",
]
