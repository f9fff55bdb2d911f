"""Monte Carlo harness for the sample-size-relationship experiments.

Each cell (n, rep) draws a Beta(a, 1) source sample and a uniform target
sample, fits window-average estimators on the source alone, the target alone
and the pooled data, and records their grid losses.  Random streams come from
``SeedSequence(base_seed, spawn_key=(n, rep))``, so every SSR rule sees the
same source draws and nested prefixes of the same target draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bumps import WorstCaseFunction, worst_case_function
from .densities import BetaDensity
from .estimators import Sample, nw_curve
from .rates import classify_region, knife_edge, sl_slope, tl_slope
from .spread import spread_order

RULES = ("SSR1", "SSR2", "SSR3", "SSR4")
DEFAULT_RULE_CONSTS = (0.1, 0.5, 1.0, 10.0)
# (c_SL, c_TL) used for the two smoothness levels in the reference experiments
C4_TABLE = {0.5: (0.95, 1.2), 0.9: (0.4, 0.7)}
DESK_N = (3000, 5000, 10000, 30000)
FULL_N = (3000, 5000, 10000, 30000, 50000, 100000)


def target_function(f_id: str, beta: float) -> Callable:
    """f1(x) = 0.2 x^beta, f2(x) = 0.2 |x - 0.5|^beta."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    if f_id == "f1":
        return lambda x: 0.2 * np.asarray(x, dtype=float) ** beta
    if f_id == "f2":
        return lambda x: 0.2 * np.abs(np.asarray(x, dtype=float) - 0.5) ** beta
    raise ValueError(f"unknown target function {f_id!r}")


def loss_grid(grid_N: int) -> np.ndarray:
    return np.arange(1, grid_N + 1) / grid_N


def grid_loss(f_true: Callable, f_hat, grid_N: int) -> float:
    """Mean of (f_hat(x_i) - f(x_i))^2 over x_i = i/N, i = 1..N."""
    f_hat = np.asarray(f_hat, dtype=float)
    if f_hat.shape != (grid_N,):
        raise ValueError(f"f_hat has length {f_hat.size}, expected {grid_N}")
    return float(np.mean((f_hat - f_true(loss_grid(grid_N))) ** 2))


@dataclass(frozen=True)
class ExperimentConfig:
    a: float
    beta: float
    n_list: Tuple[int, ...] = DESK_N
    nT_rule: str = "SSR2"
    c4_sl: Optional[float] = None
    c4_tl: Optional[float] = None
    rule_consts: Tuple[float, float, float, float] = DEFAULT_RULE_CONSTS
    f_id: str = "f1"
    sigma: float = 0.3
    c_bandwidth: float = 0.7
    grid_N: int = 3000
    replications: int = 100
    base_seed: int = 0

    def __post_init__(self):
        if not (self.a > 0 and self.beta > 0 and self.sigma >= 0 and self.c_bandwidth > 0):
            raise ValueError("a, beta, c_bandwidth must be positive and sigma non-negative")
        if self.nT_rule not in RULES:
            raise ValueError(f"nT_rule must be one of {RULES}")
        if self.f_id not in ("f1", "f2"):
            raise ValueError("f_id must be f1 or f2")
        if not self.n_list or any(int(n) != n or n < 1 for n in self.n_list):
            raise ValueError("n_list must hold positive integers")
        if self.grid_N < 1 or self.replications < 1:
            raise ValueError("grid_N and replications must be positive")
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        defaults = C4_TABLE.get(self.beta)
        for name, idx in (("c4_sl", 0), ("c4_tl", 1)):
            if getattr(self, name) is None:
                if defaults is None:
                    raise ValueError(f"{name} has no default for beta={self.beta}; set it explicitly")
                object.__setattr__(self, name, defaults[idx])

    @property
    def lower_exponent(self) -> float:
        # the rules use a = 4 in the exponent whatever the source order
        return (2.0 * self.beta + 1.0) / (2.0 * self.beta + 4.0)

    def n_target(self, n: int) -> int:
        """Target sample size for source size n under the configured rule, rounded, at least 1."""
        k = RULES.index(self.nT_rule)
        const = self.rule_consts[k]
        lx = self.lower_exponent
        if k == 0:
            raw = const * n**lx
        elif k == 1:
            raw = const * n ** (lx * (1.0 + self.c4_sl))
        elif k == 2:
            raw = const * n ** (lx * (1.0 + self.c4_tl))
        else:
            raw = const * n
        return max(1, int(math.floor(raw + 0.5)))

    def theory_slope(self) -> float:
        """Asymptotic slope of log SAR in log n for this rule (0 outside SL/TL or below the knife edge)."""
        if self.a <= knife_edge(self.beta):
            return 0.0
        if self.nT_rule == "SSR2":
            return float(sl_slope(self.beta, self.a, self.c4_sl))
        if self.nT_rule == "SSR3":
            return float(tl_slope(self.beta, self.a, self.c4_tl))
        return 0.0


def cell_streams(base_seed: int, n: int, rep: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """Independent source and target generators for cell (n, rep)."""
    src, tgt = np.random.SeedSequence(base_seed, spawn_key=(n, rep)).spawn(2)
    return np.random.default_rng(src), np.random.default_rng(tgt)


def draw_cell(cfg: ExperimentConfig, n: int, rep: int) -> Sample:
    rng_s, rng_t = cell_streams(cfg.base_seed, n, rep)
    f = target_function(cfg.f_id, cfg.beta)
    n_T = cfg.n_target(n)
    xs = BetaDensity(cfg.a, 1.0).sample(n, rng_s)
    ys = f(xs) + cfg.sigma * rng_s.standard_normal(n)
    xt = rng_t.random(n_T)
    yt = f(xt) + cfg.sigma * rng_t.standard_normal(n_T)
    return Sample.from_arrays(xs, ys, xt, yt)


@dataclass(frozen=True)
class CellResult:
    n: int
    n_T: int
    rep: int
    L_source: float
    L_target: float
    L_pool: float


def run_cell(cfg: ExperimentConfig, n: int, rep: int) -> CellResult:
    """Grid losses of the source-only, target-only and pooled estimators for one replication."""
    if not 0 <= rep < cfg.replications:
        raise ValueError("rep must lie in [0, replications)")
    s = draw_cell(cfg, n, rep)
    n_T = s.n_T
    f = target_function(cfg.f_id, cfg.beta)
    grid = loss_grid(cfg.grid_N)
    c = cfg.c_bandwidth
    h_src = c * spread_order(grid, n, 0, cfg.a, cfg.beta)
    h_tgt = c * spread_order(grid, 0, n_T, cfg.a, cfg.beta)
    h_pool = c * spread_order(grid, n, n_T, cfg.a, cfg.beta)
    losses = [
        grid_loss(f, nw_curve(grid, data, h), cfg.grid_N)
        for data, h in ((s.source_only(), h_src), (s.target_only(), h_tgt), (s, h_pool))
    ]
    return CellResult(n, n_T, rep, *losses)


def _run_cell_args(args):
    return run_cell(*args)


def run_cells(cfg: ExperimentConfig, workers: int = 1) -> List[CellResult]:
    """All (n, rep) cells in n_list order then replication order."""
    jobs = [(cfg, n, rep) for n in cfg.n_list for rep in range(cfg.replications)]
    if workers <= 1:
        return [run_cell(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell_args, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


@dataclass(frozen=True)
class SeriesPoint:
    n: int
    n_T: int
    log_n: float
    log_sar: float
    region: str


def summarize(cfg: ExperimentConfig, cells: Sequence[CellResult]) -> List[SeriesPoint]:
    """log SAR = log(min(median L, median L_T) / median L_pool) for each n."""
    out = []
    for n in cfg.n_list:
        rows = [c for c in cells if c.n == n]
        if not rows:
            raise ValueError(f"no cells for n={n}")
        med = [float(np.median([getattr(c, k) for c in rows])) for k in ("L_source", "L_target", "L_pool")]
        n_T = rows[0].n_T
        log_sar = math.log(min(med[0], med[1]) / med[2])
        out.append(SeriesPoint(n, n_T, math.log(n), log_sar, classify_region(n, n_T, cfg.a, cfg.beta)))
    return out


def log_sar_series(cfg: ExperimentConfig, workers: int = 1) -> List[SeriesPoint]:
    return summarize(cfg, run_cells(cfg, workers))


def fit_slope(points) -> Tuple[float, float]:
    """Ordinary least squares (slope, intercept) through (x, y) pairs."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (x, y) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if np.unique(x).size < 2:
        raise ValueError("need at least two distinct x values")
    xc = x - x.mean()
    slope = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    return slope, float(y.mean() - slope * x.mean())


@dataclass
class RuleRun:
    cfg: ExperimentConfig
    cells: List[CellResult]
    series: List[SeriesPoint]
    slope: float
    intercept: float


def run_rules(base: ExperimentConfig, rules: Sequence[str] = RULES, workers: int = 1) -> Dict[str, RuleRun]:
    """Run every SSR rule with otherwise identical settings."""
    out = {}
    for rule in rules:
        cfg = replace(base, nT_rule=rule)
        cells = run_cells(cfg, workers)
        series = summarize(cfg, cells)
        slope, icpt = fit_slope([(p.log_n, p.log_sar) for p in series])
        out[rule] = RuleRun(cfg, cells, series, slope, icpt)
    return out


__all__ = [
    "ExperimentConfig",
    "CellResult",
    "SeriesPoint",
    "RuleRun",
    "target_function",
    "grid_loss",
    "run_cell",
    "run_cells",
    "summarize",
    "log_sar_series",
    "fit_slope",
    "run_rules",
    "worst_case_function",
    "WorstCaseFunction",
]
