"""Nuisance-parameter estimation: Beta shapes by maximum likelihood and the
smoothness index by a Lepski-type comparison of dyadic bin averages."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .densities import BetaDensity
from .errors import EmptyBinError, NumericalError
from .estimators import EstimatorConfig, Sample, fit_curve
from .special import betaln, digamma, trigamma
from .spread import SpreadContext

MLE_TOL = 1e-10


def beta_loglik(a1: float, a2: float, s1: float, s2: float, m: int) -> float:
    """Beta log-likelihood from sufficient statistics sum(log x), sum(log(1 - x))."""
    return (a1 - 1.0) * s1 + (a2 - 1.0) * s2 - m * betaln(a1, a2)


def _profile_root(stat: float, other: float, m: int, lo: float, hi: float, first: bool) -> float:
    # maximise over one shape with the other fixed; the score is decreasing
    def score(a):
        a1, a2 = (a, other) if first else (other, a)
        own = a1 if first else a2
        return stat - m * (digamma(own) - digamma(a1 + a2))

    def curvature(a):
        a1, a2 = (a, other) if first else (other, a)
        own = a1 if first else a2
        return -m * (trigamma(own) - trigamma(a1 + a2))

    if score(lo) <= 0.0:
        return lo
    if score(hi) >= 0.0:
        return hi
    left, right = lo, hi
    a = 0.5 * (lo + hi)
    for _ in range(200):
        g = score(a)
        if abs(g) <= MLE_TOL * m:
            return a
        if g > 0:
            left = a
        else:
            right = a
        step = a - g / curvature(a)
        a = step if left < step < right else 0.5 * (left + right)
        if right - left <= 1e-15 * right:
            break
    return a


def beta_mle(
    xs: Sequence[float],
    bounds: Tuple[float, float] = (0.5, 10.0),
    a1: Optional[float] = None,
    a2: Optional[float] = None,
) -> Tuple[float, float]:
    """Maximum likelihood Beta shapes over the box ``bounds`` x ``bounds``.

    Either shape can be held fixed by passing it.  Only points strictly
    inside (0, 1) are used; at least two are required.  The log-likelihood is
    concave, so the box optimum is either the interior Newton solution or the
    best of the four edge-profile optima.
    """
    lo, hi = bounds
    if not 0 < lo < hi:
        raise ValueError("bounds must satisfy 0 < lower < upper")
    x = np.asarray(xs, dtype=float)
    x = x[(x > 0.0) & (x < 1.0)]
    m = x.size
    if m < 2:
        raise ValueError("at least two points strictly inside (0, 1) are required")
    s1 = float(np.sum(np.log(x)))
    s2 = float(np.sum(np.log1p(-x)))

    if a1 is not None and a2 is not None:
        return float(a1), float(a2)
    if a2 is not None:
        return _profile_root(s1, a2, m, lo, hi, first=True), float(a2)
    if a1 is not None:
        return float(a1), _profile_root(s2, a1, m, lo, hi, first=False)
    if np.ptp(x) == 0.0:
        raise NumericalError("flat likelihood: all points identical, shapes are not identifiable")

    interior = _newton_2d(x, s1, s2, m, lo, hi)
    if interior is not None:
        return interior
    candidates = []
    for fixed in (lo, hi):
        candidates.append((_profile_root(s1, fixed, m, lo, hi, first=True), fixed))
        candidates.append((fixed, _profile_root(s2, fixed, m, lo, hi, first=False)))
    return max(candidates, key=lambda p: beta_loglik(p[0], p[1], s1, s2, m))


def _newton_2d(x, s1, s2, m, lo, hi):
    mean, var = float(x.mean()), float(x.var())
    common = mean * (1.0 - mean) / var - 1.0 if var > 0 else 1.0
    a = np.clip([mean * common, (1.0 - mean) * common], lo, hi).astype(float)
    ll = beta_loglik(a[0], a[1], s1, s2, m)
    for _ in range(200):
        d0 = digamma(a[0] + a[1])
        grad = np.array([s1 - m * (digamma(a[0]) - d0), s2 - m * (digamma(a[1]) - d0)])
        if np.max(np.abs(grad)) <= MLE_TOL * m:
            return (float(a[0]), float(a[1])) if np.all((a >= lo) & (a <= hi)) else None
        t0 = trigamma(a[0] + a[1])
        hess = -m * np.array([[trigamma(a[0]) - t0, -t0], [-t0, trigamma(a[1]) - t0]])
        step = -np.linalg.solve(hess, grad)
        lam = 1.0
        while True:
            cand = a + lam * step
            if np.all(cand > 0):
                ll_new = beta_loglik(cand[0], cand[1], s1, s2, m)
                if ll_new >= ll - 1e-12 * abs(ll):
                    break
            lam *= 0.5
            if lam < 1e-12:
                return None
        a, ll = cand, ll_new
        if np.any(a > 10.0 * hi):
            return None
    return None


def split_halves(s: Sample) -> Tuple[Sample, Sample]:
    """First floor(n/2) source rows and floor(n_T/2) target rows, and the rest; order kept."""
    src = np.flatnonzero(~s.is_target)
    tgt = np.flatnonzero(s.is_target)
    first = np.zeros(len(s), dtype=bool)
    first[src[: src.size // 2]] = True
    first[tgt[: tgt.size // 2]] = True
    return s.subset(first), s.subset(~first)


@dataclass(frozen=True)
class LepskiConfig:
    beta_lo: float
    beta_hi: float
    kappa: float = 1.0
    trim: float = 0.05
    c_sel: Optional[float] = None
    c_shrink: Optional[float] = None
    eval_grid_size: int = 4096

    def __post_init__(self):
        if not 0 < self.beta_lo < self.beta_hi < math.inf:
            raise ValueError("need 0 < beta_lo < beta_hi < inf")
        if not 0 < self.trim < 0.5:
            raise ValueError("trim must lie in (0, 0.5)")
        if self.c_sel is None:
            object.__setattr__(self, "c_sel", 4.0 * self.kappa + 0.1)
        if self.c_shrink is None:
            object.__setattr__(self, "c_shrink", self.shrink_floor + 0.1)
        if not self.c_sel > 4.0 * self.kappa:
            raise ValueError("c_sel must exceed 4 kappa")
        if not self.c_shrink > self.shrink_floor:
            raise ValueError("c_shrink must exceed (2 beta_hi + 1)^2 / (2 beta_lo)")
        if self.eval_grid_size < 1:
            raise ValueError("eval_grid_size must be positive")

    @property
    def shrink_floor(self) -> float:
        return (2.0 * self.beta_hi + 1.0) ** 2 / (2.0 * self.beta_lo)


def lepski_tau_range(m: int, cfg: LepskiConfig) -> Tuple[int, int]:
    """(tau_star, tau_low): max{tau + 1 : 2^tau <= m^(1/(2 beta_lo + 1))} and
    max{tau : 2^tau <= m^(1/(2 beta_hi + 1))}."""
    if m < 2:
        raise ValueError("m must be at least 2")
    lg = math.log2(m)
    tau_star = math.floor(lg / (2.0 * cfg.beta_lo + 1.0) + 1e-12) + 1
    tau_low = math.floor(lg / (2.0 * cfg.beta_hi + 1.0) + 1e-12)
    return tau_star, tau_low


def beta_at_level(tau: int, n: int) -> float:
    """Smoothness beta_tau with 2^-tau = n^(-1/(2 beta_tau + 1))."""
    return 0.5 * (math.log(n) / (tau * math.log(2.0)) - 1.0)


@dataclass(frozen=True)
class LepskiResult:
    beta_hat: float
    tau_hat: int
    tau_low: int
    tau_star: int
    n: int


def _bin_means(x, y, tau, trim):
    nbins = 2**tau
    width = (1.0 - 2.0 * trim) / nbins
    idx = np.minimum(((x - trim) / width).astype(int), nbins - 1)
    counts = np.bincount(idx, minlength=nbins)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyBinError(tau, int(empty[0]))
    return np.bincount(idx, weights=y, minlength=nbins) / counts


def lepski_select(data: Sample, cfg: LepskiConfig, n: Optional[int] = None) -> LepskiResult:
    """Run the level selection on the source rows if they outnumber the target rows, else on the target rows."""
    use_target = not data.n > data.n_T
    pop = data.target_only() if use_target else data.source_only()
    if n is None:
        n = len(pop)
    keep = (pop.x >= cfg.trim) & (pop.x <= 1.0 - cfg.trim)
    x, y = pop.x[keep], pop.y[keep]
    tau_star, tau_low = lepski_tau_range(n, cfg)
    first = max(tau_low, 1)
    levels = list(range(first, tau_star + 1))
    if x.size == 0:
        raise EmptyBinError(first, 0)

    # dyadic cells at least as fine as every level make the sup norm exact
    cells = max(cfg.eval_grid_size, 2**tau_star)
    cells = 2 ** math.ceil(math.log2(cells))
    grid_pos = (np.arange(cells) + 0.5) / cells
    fitted = {}
    for tau in levels:
        means = _bin_means(x, y, tau, cfg.trim)
        fitted[tau] = means[(grid_pos * 2**tau).astype(int)]

    log_n = math.log(n)
    tau_hat = tau_star
    for tau in levels:
        accepted = True
        for tau2 in levels:
            if tau2 <= tau:
                continue
            b2 = beta_at_level(tau2, n)
            bound = cfg.c_sel * 2.0 ** (-tau2 * b2) * log_n
            if np.max(np.abs(fitted[tau] - fitted[tau2])) > bound:
                accepted = False
                break
        if accepted:
            tau_hat = tau
            break

    raw = beta_at_level(tau_hat, n) - cfg.c_shrink * math.log(log_n) / log_n
    beta_hat = min(max(min(raw, cfg.beta_hi), cfg.beta_lo), cfg.beta_hi)
    return LepskiResult(beta_hat, tau_hat, tau_low, tau_star, n)


def lepski_beta(data: Sample, cfg: LepskiConfig, n: Optional[int] = None) -> float:
    """Smoothness estimate clamped to [beta_lo, beta_hi]."""
    return lepski_select(data, cfg, n).beta_hat


@dataclass(frozen=True)
class PluginFit:
    curve: np.ndarray
    source: BetaDensity
    target: BetaDensity
    n: int
    n_T: int


def plugin_fit(
    grid,
    s: Sample,
    cfg: EstimatorConfig,
    bounds: Tuple[float, float] = (0.5, 10.0),
    mode: str = "pooled",
) -> PluginFit:
    """Split-half estimator: Beta shapes from the first halves, regression fit on the second halves.

    A population with fewer than two rows in its first half keeps the uniform
    law (it carries no weight in the spread equation anyway).
    """
    first, second = split_halves(s)
    fitted = []
    for pop in (first.source_only(), first.target_only()):
        if len(pop) >= 2 and np.ptp(pop.x) > 0:
            fitted.append(BetaDensity(*beta_mle(pop.x, bounds)))
        else:
            fitted.append(BetaDensity(1.0, 1.0))
    ctx = SpreadContext(second.n, second.n_T, cfg.beta, fitted[0], fitted[1])
    plug_cfg = replace(cfg, gate="plugin", T0=2.0 * cfg.T1)
    curve = fit_curve(grid, second, ctx, plug_cfg, mode)
    return PluginFit(curve, fitted[0], fitted[1], second.n, second.n_T)
