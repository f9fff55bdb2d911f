"""Closed-form transfer learning rates, the synergistic acceleration rate (SAR)
and sample-size-relationship regions.

Regions, in order of increasing target size:

* ``SD`` source dominated, n_T up to c0 * n^((2b+1)/(2b+a))
* ``SL`` source led, n_T up to c1 * n^((2b+1)^2/(2b(2b+a)))
* ``TL`` target led, n_T up to c2 * n
* ``TD`` target dominated

A value exactly on a threshold belongs to the earlier region.  A target
sample above both c2 * n and c3 * n is TD whatever the other thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .densities import SingularityDensitySpec

REGIONS = ("SD", "SL", "TL", "TD")
DEFAULT_CONSTS = (1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class RateResult:
    """A minimax rate with its region and exponent form.

    The rate equals ``n^-p * n_T^-q * (n_T/n)^r * (n + n_T)^-s``.
    ``log_factor`` flags the knife-edge a = 2 + 1/(2 beta), where an extra
    log n factor is present but not included in ``rate_value``.
    """

    region: str
    rate_value: float
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0
    s: float = 0.0
    slp: bool = False
    log_factor: bool = False

    @property
    def symbolic(self) -> Tuple[float, float, float, float]:
        return self.p, self.q, self.r, self.s

    def evaluate(self, n: float, n_T: float) -> float:
        return _power_form(n, n_T, self.p, self.q, self.r, self.s)


def _pow(base: float, expo: float) -> float:
    # 0^0 = 1 so that unused factors drop out
    return 1.0 if expo == 0 else base**expo


def _power_form(n, n_T, p, q, r, s) -> float:
    n, n_T = float(n), float(n_T)
    ratio = 1.0 if r == 0 else n_T / n
    return _pow(n, -p) * _pow(n_T, -q) * _pow(ratio, r) * _pow(n + n_T, -s)


def _check_consts(consts: Sequence[float]) -> Tuple[float, float, float, float]:
    consts = tuple(float(c) for c in consts)
    if len(consts) != 4 or any(not c > 0 for c in consts):
        raise ValueError("consts must be four positive reals")
    return consts


def knife_edge(beta: float) -> float:
    """The critical source order 2 + 1/(2 beta)."""
    return 2.0 + 1.0 / (2.0 * beta)


def _region(n, n_T, lower_exp, equal_exp, consts) -> str:
    c0, c1, c2, c3 = _check_consts(consts)
    if n + n_T < 1:
        raise ValueError("n + n_T must be at least 1")
    # TD is settled first: below the knife edge the other thresholds can exceed n
    if not (n_T <= c2 * n or n_T < c3 * n):
        return "TD"
    if n_T <= c0 * n**lower_exp:
        return "SD"
    if n_T <= c1 * n**equal_exp:
        return "SL"
    return "TL"


def threshold_exponents(a: float, beta: float, a_target: float = 1.0) -> Tuple[float, float]:
    """Exponents of the lower critical size and of the equalizing size."""
    b2 = 2.0 * beta
    lower = (b2 + a_target) / (b2 + a)
    return lower, lower * (b2 + 1.0) / b2


def classify_region(n, n_T, a: float, beta: float, consts: Sequence[float] = DEFAULT_CONSTS) -> str:
    """SD, SL, TL or TD for a Beta(a, 1)-type source and a uniform-type target.

    ``consts`` = (c0, c1, c2, c3) scale the three thresholds; ``n_T`` counts
    as TD only once it exceeds both c2 * n and c3 * n.
    """
    if not (a > 0 and beta > 0):
        raise ValueError("a and beta must be positive")
    lower, equal = threshold_exponents(a, beta)
    return _region(n, n_T, lower, equal, consts)


def _four_branch(n, n_T, beta, a_src, a_tgt, consts) -> RateResult:
    b2 = 2.0 * beta
    lower, equal = threshold_exponents(a_src, beta, a_tgt)
    region = _region(n, n_T, lower, equal, consts)
    q = b2 / (b2 + 1.0)
    if region == "SD":
        p, qq, r = lower, 0.0, 0.0
    elif region == "TD":
        p, qq, r = 0.0, q, 0.0
    else:
        p, qq, r = 0.0, q, (1.0 + (a_tgt - 1.0) / (b2 + 1.0)) / (a_src - a_tgt)
    value = _power_form(n, n_T, p, qq, r, 0.0)
    return RateResult(region, value, p, qq, r, 0.0, slp=region in ("SL", "TL"))


def _pooled(n, n_T, beta, region, log_factor=False) -> RateResult:
    s = 2.0 * beta / (2.0 * beta + 1.0)
    return RateResult(region, _power_form(n, n_T, 0, 0, 0, s), s=s, log_factor=log_factor)


def tlr(n, n_T, a: float, beta: float, consts: Sequence[float] = DEFAULT_CONSTS) -> RateResult:
    """Optimal transfer learning rate for a Beta(a, 1)-type source and a uniform-type target."""
    if not (a > 0 and beta > 0):
        raise ValueError("a and beta must be positive")
    edge = knife_edge(beta)
    if a <= edge:
        region = classify_region(n, n_T, a, beta, consts)
        return _pooled(n, n_T, beta, region, log_factor=math.isclose(a, edge, rel_tol=1e-12))
    return _four_branch(n, n_T, beta, a, 1.0, consts)


def sar(n, n_T, a: float, beta: float, consts: Sequence[float] = DEFAULT_CONSTS) -> float:
    """Synergistic acceleration rate: best single-sample rate over the pooled rate, by region."""
    if not (a > 0 and beta > 0):
        raise ValueError("a and beta must be positive")
    if a <= knife_edge(beta):
        return 1.0
    region = classify_region(n, n_T, a, beta, consts)
    lower, _ = threshold_exponents(a, beta)
    if region == "SL":
        expo = 2.0 * beta / (2.0 * beta + 1.0) - 1.0 / (a - 1.0)
        return (n_T * n**-lower) ** expo
    if region == "TL":
        return (n / n_T) ** (1.0 / (a - 1.0))
    return 1.0


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(str(v))


def sl_slope(beta, a, c4) -> Fraction:
    """Slope of log SAR in log n for n_T proportional to n^(L (1 + c4)) inside SL, L = (2b+1)/(2b+a)."""
    b, a, c = _frac(beta), _frac(a), _frac(c4)
    lower = (2 * b + 1) / (2 * b + a)
    return c * lower * (2 * b / (2 * b + 1) - 1 / (a - 1))


def tl_slope(beta, a, c4) -> Fraction:
    """Slope of log SAR in log n for n_T proportional to n^(L (1 + c4)) inside TL."""
    b, a, c = _frac(beta), _frac(a), _frac(c4)
    lower = (2 * b + 1) / (2 * b + a)
    return (1 - lower * (1 + c)) / (a - 1)


@dataclass(frozen=True)
class TSPSet:
    """Transfer singularity points, their qualifying (source, target) side orders, and the ratio minimizer."""

    points: Tuple[float, ...]
    pairs: Tuple[Tuple[float, float], ...]
    argmin: Optional[Tuple[float, float]]


def is_transfer_side(a_src: float, a_tgt: float, beta: float) -> bool:
    return a_src > 1.0 + a_tgt * (1.0 + 1.0 / (2.0 * beta))


def tsp_set(source: SingularityDensitySpec, target: SingularityDensitySpec, beta: float) -> TSPSet:
    """Find the transfer singularity points of a source/target pair.

    Every singular point of the target must also be one of the source.
    Sides beyond the unit interval do not exist and never qualify.  Among
    pairs with equal ratio (2b + a_T)/(2b + a_A) the one with the smallest
    middle-region exponent wins.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    src_locs = {sp.location for sp in source.singular_points}
    tgt_locs = {sp.location for sp in target.singular_points}
    if not tgt_locs <= src_locs:
        raise ValueError(f"spec mismatch: target singular points {sorted(tgt_locs - src_locs)} absent from source")
    points, pairs = [], []
    for loc in sorted(src_locs):
        so, to = source.orders_at(loc), target.orders_at(loc)
        hit = False
        for side, a_src in so.sides():
            a_tgt = to.left_order if side == "L" else to.right_order
            if a_tgt is not None and is_transfer_side(a_src, a_tgt, beta):
                hit = True
                if (a_src, a_tgt) not in pairs:
                    pairs.append((a_src, a_tgt))
        if hit:
            points.append(loc)
    if not pairs:
        return TSPSet((), (), None)
    b2 = 2.0 * beta

    def key(pair):
        a_src, a_tgt = pair
        return ((b2 + a_tgt) / (b2 + a_src), (1.0 + (a_tgt - 1.0) / (b2 + 1.0)) / (a_src - a_tgt))

    return TSPSet(tuple(points), tuple(pairs), min(pairs, key=key))


def general_tlr(
    n,
    n_T,
    source: SingularityDensitySpec,
    target: SingularityDensitySpec,
    beta: float,
    consts: Sequence[float] = DEFAULT_CONSTS,
) -> RateResult:
    """Minimax rate for densities with several singular points.

    Without transfer singularity points this is the pooled rate.  Otherwise
    the rate follows the four-branch form driven by the ratio-minimizing side
    pair, with SL and TL split at the size where the target-only rate meets
    the source-dominated rate.
    """
    ts = tsp_set(source, target, beta)
    if ts.argmin is None:
        return _pooled(n, n_T, beta, _region(n, n_T, 1.0, 1.0, consts))
    a_src, a_tgt = ts.argmin
    return _four_branch(n, n_T, beta, a_src, a_tgt, consts)
