"""Covariate densities on [0, 1].

Two families are supported:

* :class:`BetaDensity` -- the two-parameter Beta law.  ``Beta(a, 1)`` is the
  source law of the basic covariate-shift design and ``Beta(1, 1)`` the
  uniform target.
* :class:`SingularityDensitySpec` -- a piecewise density made of factors
  ``c (x - lo)^(p - 1) (hi - x)^(q - 1)`` on consecutive intervals, which can
  vanish at polynomial rates at any number of points.

Both expose ``pdf``, ``cdf``, ``mass`` and ``sample`` and can be used
wherever a density model is expected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .special import adaptive_simpson, betainc, betaln

INVERSE_CDF_KNOTS = 2**14
QUAD_TOL = 1e-10


def _check_unit(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    # NaN fails both comparisons
    if arr.size and not (arr.min() >= 0.0 and arr.max() <= 1.0):
        raise ValueError("density argument outside [0, 1]")
    return arr


def _ret(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


@dataclass(frozen=True)
class BetaDensity:
    """Beta(a1, a2) density on [0, 1]."""

    a1: float
    a2: float

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0) or not (
            math.isfinite(self.a1) and math.isfinite(self.a2)
        ):
            raise ValueError(f"Beta shapes must be positive and finite, got ({self.a1}, {self.a2})")

    @property
    def kind(self) -> str:
        return "beta"

    def pdf(self, x):
        xv = _check_unit(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = xv ** (self.a1 - 1.0) * (1.0 - xv) ** (self.a2 - 1.0)
        out = out * math.exp(-betaln(self.a1, self.a2))
        return _ret(out, x)

    def cdf(self, x):
        if type(x) is float and 0.0 <= x <= 1.0 and self.a2 == 1.0:
            return x**self.a1
        xv = _check_unit(x)
        if self.a2 == 1.0:
            out = xv**self.a1
        elif self.a1 == 1.0:
            out = 1.0 - (1.0 - xv) ** self.a2
        else:
            out = betainc(self.a1, self.a2, xv)
        return _ret(np.asarray(out, dtype=float), x)

    def mass(self, lo, hi):
        return _interval_mass(self, lo, hi)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if count < 0:
            raise ValueError("count must be non-negative")
        if count == 0:
            return np.empty(0)
        if self.a2 == 1.0:
            return rng.random(count) ** (1.0 / self.a1)
        if self.a1 == 1.0:
            return 1.0 - rng.random(count) ** (1.0 / self.a2)
        g1 = rng.gamma(self.a1, size=count)
        g2 = rng.gamma(self.a2, size=count)
        return g1 / (g1 + g2)


@dataclass(frozen=True)
class Piece:
    """One factor ``scale * (x - lo)^(left_order - 1) * (hi - x)^(right_order - 1)`` on [lo, hi]."""

    lo: float
    hi: float
    scale: float
    left_order: float = 1.0
    right_order: float = 1.0

    @property
    def raw_mass(self) -> float:
        p, q = self.left_order, self.right_order
        return self.scale * (self.hi - self.lo) ** (p + q - 1.0) * math.exp(betaln(p, q))

    def value(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            v = (
                self.scale
                * np.clip(x - self.lo, 0.0, None) ** (self.left_order - 1.0)
                * np.clip(self.hi - x, 0.0, None) ** (self.right_order - 1.0)
            )
        return v

    def partial_mass(self, x: np.ndarray) -> np.ndarray:
        """Mass of the piece on [lo, min(x, hi)]."""
        u = np.clip((np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return self.raw_mass * betainc(self.left_order, self.right_order, u)


@dataclass(frozen=True)
class SingularPoint:
    """A point where a density may vanish, with its one-sided vanishing orders.

    A side order of 1 means the density stays away from zero on that side;
    ``None`` marks a side that does not exist (left of 0, right of 1).
    """

    location: float
    left_order: Optional[float]
    right_order: Optional[float]

    def sides(self):
        if self.left_order is not None:
            yield "L", self.left_order
        if self.right_order is not None:
            yield "R", self.right_order


@dataclass(frozen=True)
class SingularityDensitySpec:
    """Piecewise polynomial-singularity density with envelope constants."""

    pieces: tuple
    singular_points: tuple
    delta: float
    c_lower: float
    c_upper: float
    _norm: float = field(default=1.0, repr=False)

    @classmethod
    def from_pieces(
        cls,
        pieces: Sequence[Piece],
        delta: float = 0.1,
        c_lower: Optional[float] = None,
        c_upper: Optional[float] = None,
        normalize: bool = True,
    ) -> "SingularityDensitySpec":
        """Build a spec, inferring singular points from the piece exponents.

        The piece scales are treated as relative weights and rescaled so the
        total mass is one unless ``normalize`` is false.  Missing envelope
        constants are estimated on a fine grid with 5% slack.
        """
        pieces = tuple(sorted(pieces, key=lambda p: p.lo))
        if not pieces:
            raise ValueError("at least one piece is required")
        norm = sum(p.raw_mass for p in pieces) if normalize else 1.0
        points = tuple(_infer_singular_points(pieces))
        spec = cls(pieces, points, float(delta), 0.0, math.inf, norm)
        if c_lower is None or c_upper is None:
            lo_env, hi_env = spec.envelope_constants()
            c_lower = 0.95 * lo_env if c_lower is None else c_lower
            c_upper = 1.05 * hi_env if c_upper is None else c_upper
        return cls(pieces, points, float(delta), float(c_lower), float(c_upper), norm)

    @property
    def kind(self) -> str:
        return "singular"

    @cached_property
    def _offsets(self) -> np.ndarray:
        masses = np.array([p.raw_mass for p in self.pieces]) / self._norm
        return np.concatenate([[0.0], np.cumsum(masses)])

    def _piece_index(self, x: np.ndarray) -> np.ndarray:
        his = np.array([p.hi for p in self.pieces[:-1]])
        return np.searchsorted(his, x, side="right")

    def pdf(self, x):
        xv = _check_unit(x)
        flat = np.atleast_1d(xv)
        idx = self._piece_index(flat)
        out = np.zeros_like(flat)
        for k, piece in enumerate(self.pieces):
            sel = idx == k
            if sel.any():
                out[sel] = piece.value(flat[sel]) / self._norm
        return _ret(out.reshape(xv.shape), x)

    def cdf(self, x):
        xv = _check_unit(x)
        flat = np.atleast_1d(xv)
        idx = self._piece_index(flat)
        out = np.zeros_like(flat)
        for k, piece in enumerate(self.pieces):
            sel = idx == k
            if sel.any():
                out[sel] = self._offsets[k] + piece.partial_mass(flat[sel]) / self._norm
        out = np.clip(out, 0.0, 1.0)
        return _ret(out.reshape(xv.shape), x)

    def mass(self, lo, hi):
        return _interval_mass(self, lo, hi)

    @cached_property
    def _inverse_cdf(self) -> PchipInterpolator:
        knots = np.linspace(0.0, 1.0, INVERSE_CDF_KNOTS + 1)
        knots = np.union1d(knots, [p.lo for p in self.pieces] + [p.hi for p in self.pieces])
        probs = self.cdf(knots)
        keep = np.concatenate([[True], np.diff(probs) > 0])
        return PchipInterpolator(probs[keep], knots[keep], extrapolate=False)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if count < 0:
            raise ValueError("count must be non-negative")
        if count == 0:
            return np.empty(0)
        inv = self._inverse_cdf
        u = rng.random(count)
        lo, hi = inv.x[0], inv.x[-1]
        return np.clip(inv(np.clip(u, lo, hi)), 0.0, 1.0)

    def orders_at(self, s: float) -> SingularPoint:
        """One-sided vanishing orders at ``s`` read off the piece exponents."""
        left = None if s <= 0.0 else 1.0
        right = None if s >= 1.0 else 1.0
        for p in self.pieces:
            if p.hi == s and s > 0.0:
                left = p.right_order
            if p.lo == s and s < 1.0:
                right = p.left_order
        return SingularPoint(s, left, right)

    def envelope_constants(self, grid_size: int = 4096):
        """Tightest (c_lower, c_upper) seen on a grid for the two envelope conditions."""
        x = (np.arange(grid_size) + 0.5) / grid_size
        h = self.pdf(x)
        lower, upper = np.inf, float(np.max(h))
        near = np.zeros_like(x, dtype=bool)
        for sp in self.singular_points:
            for side, order in sp.sides():
                if side == "L":
                    sel = (x >= sp.location - self.delta) & (x < sp.location)
                    dist = sp.location - x[sel]
                else:
                    sel = (x > sp.location) & (x <= sp.location + self.delta)
                    dist = x[sel] - sp.location
                if not sel.any():
                    continue
                near |= sel
                ratio = h[sel] / dist ** (order - 1.0)
                lower = min(lower, float(ratio.min()))
                upper = max(upper, float(ratio.max()))
        if (~near).any():
            lower = min(lower, float(h[~near].min()))
        return lower, upper

    def total_mass(self, tol: float = QUAD_TOL) -> float:
        """Total mass by adaptive Simpson quadrature of the pdf, piece by piece."""
        return sum(
            adaptive_simpson(lambda t, p=p: float(p.value(np.array(t))) / self._norm, p.lo, p.hi, tol)
            for p in self.pieces
        )


DensityModel = Union[BetaDensity, SingularityDensitySpec]

UNIFORM = BetaDensity(1.0, 1.0)


def _infer_singular_points(pieces: Sequence[Piece]):
    bounds = sorted({p.lo for p in pieces} | {p.hi for p in pieces})
    for s in bounds:
        left = None if s <= 0.0 else 1.0
        right = None if s >= 1.0 else 1.0
        for p in pieces:
            if p.hi == s and s > 0.0:
                left = p.right_order
            if p.lo == s and s < 1.0:
                right = p.left_order
        if any(o is not None and o > 1.0 for o in (left, right)):
            yield SingularPoint(float(s), left, right)


def _interval_mass(d: DensityModel, lo, hi):
    if np.ndim(lo) == 0 and np.ndim(hi) == 0:
        lo_f, hi_f = min(max(float(lo), 0.0), 1.0), min(max(float(hi), 0.0), 1.0)
        if not hi_f > lo_f:
            return 0.0
        return min(max(d.cdf(hi_f) - d.cdf(lo_f), 0.0), 1.0)
    lo_c = np.clip(np.asarray(lo, dtype=float), 0.0, 1.0)
    hi_c = np.clip(np.asarray(hi, dtype=float), 0.0, 1.0)
    out = np.where(hi_c > lo_c, d.cdf(hi_c) - d.cdf(lo_c), 0.0)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(lo) == 0 and np.ndim(hi) == 0 else out


def beta_pdf(x, d: BetaDensity):
    """Beta density value; raises ValueError outside [0, 1]."""
    return d.pdf(x)


def beta_cdf(x, d: BetaDensity):
    return d.cdf(x)


def interval_mass(d: DensityModel, lo, hi):
    """Mass of ``d`` on [lo, hi] after clipping both ends to [0, 1]."""
    return d.mass(lo, hi)


def sample(d: DensityModel, count: int, rng: np.random.Generator) -> np.ndarray:
    return d.sample(count, rng)


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append((name, bool(passed), detail))

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    @property
    def first_failure(self) -> Optional[str]:
        for name, passed, _ in self.checks:
            if not passed:
                return name
        return None

    def __str__(self) -> str:
        lines = [f"{'pass' if p else 'FAIL'}  {n}  {d}".rstrip() for n, p, d in self.checks]
        return "\n".join(lines)


def validate_spec(d: SingularityDensitySpec, role: str = "source", grid_size: int = 1000) -> ValidationReport:
    """Check the structural and envelope conditions on a singularity spec.

    Check names: ``coverage``, ``ordering``, ``disjointness``, ``order>=1``,
    ``source-vanishes`` (source role only), ``upper-envelope``,
    ``lower-envelope`` and ``mass``.
    """
    if role not in ("source", "target"):
        raise ValueError("role must be 'source' or 'target'")
    rep = ValidationReport()
    pieces = d.pieces
    contiguous = (
        pieces[0].lo == 0.0
        and pieces[-1].hi == 1.0
        and all(a.hi == b.lo for a, b in zip(pieces, pieces[1:]))
        and all(p.hi > p.lo and p.scale > 0 for p in pieces)
    )
    rep.add("coverage", contiguous, "pieces must tile [0, 1] with positive scales")

    locs = [sp.location for sp in d.singular_points]
    ordered = all(0.0 <= s <= 1.0 for s in locs) and all(b > a for a, b in zip(locs, locs[1:]))
    rep.add("ordering", ordered, "singular points strictly increasing in [0, 1]")

    gaps = [b - a for a, b in zip(locs, locs[1:])]
    disjoint = d.delta > 0 and all(g >= 2.0 * d.delta for g in gaps)
    rep.add("disjointness", disjoint, f"delta={d.delta}")

    piece_orders = [o for p in pieces for o in (p.left_order, p.right_order)]
    side_orders = [o for sp in d.singular_points for _, o in sp.sides()]
    rep.add("order>=1", all(o >= 1.0 for o in piece_orders + side_orders), "all side orders >= 1")

    if role == "source":
        vanish = all(
            max(o for _, o in sp.sides()) > 1.0 for sp in d.singular_points if list(sp.sides())
        )
        rep.add("source-vanishes", vanish, "source order > 1 on some side of every singular point")

    if not (contiguous and ordered):
        return rep

    x = (np.arange(grid_size) + 0.5) / grid_size
    h = d.pdf(x)
    slack = 1e-9
    upper_ok = bool(np.all(h <= d.c_upper * (1 + slack)))
    lower_ok = True
    near = np.zeros_like(x, dtype=bool)
    for sp in d.singular_points:
        for side, order in sp.sides():
            if side == "L":
                sel = (x >= sp.location - d.delta) & (x < sp.location)
                dist = sp.location - x[sel]
            else:
                sel = (x > sp.location) & (x <= sp.location + d.delta)
                dist = x[sel] - sp.location
            near |= sel
            env = dist ** (order - 1.0)
            upper_ok &= bool(np.all(h[sel] <= d.c_upper * env * (1 + slack)))
            lower_ok &= bool(np.all(h[sel] >= d.c_lower * env * (1 - slack)))
    lower_ok &= bool(np.all(h[~near] >= d.c_lower * (1 - slack)))
    rep.add("upper-envelope", upper_ok, f"c_upper={d.c_upper:.6g}")
    rep.add("lower-envelope", lower_ok, f"c_lower={d.c_lower:.6g}")

    total = d.total_mass()
    rep.add("mass", abs(total - 1.0) <= 1e-6, f"quadrature mass={total:.10f}")
    return rep


def validate_pair(source: SingularityDensitySpec, target: SingularityDensitySpec) -> ValidationReport:
    """Validate a source/target pair: each spec, plus target singularities covered by the source."""
    rep = ValidationReport()
    for role, spec in (("source", source), ("target", target)):
        for name, passed, detail in validate_spec(spec, role).checks:
            rep.add(f"{role}:{name}", passed, detail)
    src_locs = {sp.location for sp in source.singular_points}
    missing = [sp.location for sp in target.singular_points if sp.location not in src_locs]
    rep.add("shared-singularities", not missing, f"target-only points: {missing}" if missing else "")
    return rep


def two_tsp_example(case: int, delta: float = 0.1):
    """Source/target densities with singular points at 0 and 0.5.

    ``case=1``: source x^3.5 (0.5 - x) on [0, .5] and (x - .5)^4.5 on [.5, 1];
    target x^0.5 (0.5 - x) and (x - .5).
    ``case=2``: source right branch (x - .5)^4, target right branch (x - .5)^0.5.
    Equal relative scales on both branches, normalized to unit mass.
    """
    if case == 1:
        src_right, tgt_right = 5.5, 2.0
    elif case == 2:
        src_right, tgt_right = 5.0, 1.5
    else:
        raise ValueError("case must be 1 or 2")
    source = SingularityDensitySpec.from_pieces(
        [Piece(0.0, 0.5, 1.0, 4.5, 2.0), Piece(0.5, 1.0, 1.0, src_right, 1.0)], delta=delta
    )
    target = SingularityDensitySpec.from_pieces(
        [Piece(0.0, 0.5, 1.0, 1.5, 2.0), Piece(0.5, 1.0, 1.0, tgt_right, 1.0)], delta=delta
    )
    return source, target
