"""Sectioned ``key = value`` configuration files.

Every section and key is listed in :data:`SCHEMA` with its default.  Unknown
sections or keys are errors, as are values that fail to parse or validate;
messages name the offending key and, for syntax problems, the line.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple

from .densities import BetaDensity, Piece, SingularityDensitySpec
from .errors import ConfigError
from .simharness import DESK_N, FULL_N


def _float(s: str) -> float:
    return float(s)


def _int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(f"{s!r} is not an integer")
    return int(v)


def _float_list(s: str) -> Tuple[float, ...]:
    return tuple(float(p) for p in s.split(",") if p.strip())


def _int_list(s: str) -> Tuple[int, ...]:
    return tuple(_int(p) for p in s.split(",") if p.strip())


def _str_list(s: str) -> Tuple[str, ...]:
    return tuple(p.strip() for p in s.split(",") if p.strip())


def _pieces(s: str) -> Tuple[Piece, ...]:
    out = []
    for item in s.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 5:
            raise ValueError(f"piece {item!r} must be lo:hi:scale:left_order:right_order")
        lo, hi, scale, p, q = (float(v) for v in parts)
        out.append(Piece(lo, hi, scale, p, q))
    if not out:
        raise ValueError("no pieces given")
    return tuple(out)


def _optional(parse: Callable) -> Callable:
    def inner(s: str):
        return None if s.strip().lower() in ("", "none", "auto") else parse(s)

    return inner


def _choice(*options: str) -> Callable:
    def inner(s: str) -> str:
        s = s.strip()
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s

    return inner


def _positive(v):
    return v is None or (all(x > 0 for x in v) if isinstance(v, tuple) else v > 0)


def _nonneg(v):
    return v is None or v >= 0


@dataclass(frozen=True)
class Key:
    parse: Callable
    default: Any
    help: str
    check: Optional[Callable] = None
    rule: str = ""


_DENSITY_KEYS = {
    "kind": Key(_choice("beta", "singular"), "beta", "density family"),
    "a1": Key(_float, 1.0, "first Beta shape", _positive, "must be positive"),
    "a2": Key(_float, 1.0, "second Beta shape", _positive, "must be positive"),
    "pieces": Key(_optional(_pieces), None, "singular pieces lo:hi:scale:p:q, comma separated"),
    "delta": Key(_float, 0.1, "singular-point neighbourhood radius", _positive, "must be positive"),
}

SCHEMA: Dict[str, Dict[str, Key]] = {
    "source": dict(_DENSITY_KEYS, a1=Key(_float, 4.0, "first Beta shape", _positive, "must be positive")),
    "target": dict(_DENSITY_KEYS),
    "spread": {
        "n": Key(_int, 10000, "source sample size", _nonneg, "must be non-negative"),
        "n_T": Key(_int, 0, "target sample size", _nonneg, "must be non-negative"),
        "beta": Key(_float, 0.5, "smoothness", _positive, "must be positive"),
        "tol": Key(_float, 1e-12, "residual tolerance per unit of n + n_T", _positive, "must be positive"),
        "grid_size": Key(_int, 101, "points on [0, 1] when --x-grid is not given", _positive, "must be positive"),
    },
    "estimate": {
        "beta": Key(_float, 0.5, "smoothness", _positive, "must be positive"),
        "kappa": Key(_float, 1.0, "Hölder constant", _positive, "must be positive"),
        "c_bandwidth": Key(_float, 0.7, "bandwidth multiple of the spread", _positive, "must be positive"),
        "order_l": Key(_optional(_int), None, "polynomial order (auto: 0 if beta <= 1 else floor(beta))", _nonneg,
                       "must be non-negative"),
        "sigma_bar": Key(_float, 0.3, "noise level bound", _positive, "must be positive"),
        "T1": Key(_optional(_float), None, "truncation level (auto: kappa + 4 sigma_bar)", _positive,
                  "must be positive"),
        "gate": Key(_choice("known", "plugin"), "known", "known densities or split-half Beta MLE"),
        "mode": Key(_choice("pooled", "source_only", "target_only"), "pooled", "which rows to use"),
        "grid_size": Key(_int, 101, "points on [0, 1] at which f is estimated", _positive, "must be positive"),
        "a_lo": Key(_float, 0.5, "lower bound of the Beta MLE box", _positive, "must be positive"),
        "a_hi": Key(_float, 10.0, "upper bound of the Beta MLE box", _positive, "must be positive"),
    },
    "rate": {
        "a": Key(_float, 4.0, "source order at 0", _positive, "must be positive"),
        "beta": Key(_float, 0.5, "smoothness", _positive, "must be positive"),
        "n": Key(_float, 1e6, "source sample size", _nonneg, "must be non-negative"),
        "n_T": Key(_float, 1e5, "target sample size", _nonneg, "must be non-negative"),
        "consts": Key(_float_list, (1.0, 1.0, 1.0, 1.0), "region constants c0, c1, c2, c3", _positive,
                      "must be positive"),
        "sweep_n": Key(_float_list, (1e3, 1e4, 1e5, 1e6), "source sizes for --sweep", _positive, "must be positive"),
        "sweep_nT": Key(_float_list, (1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6, 1e7), "target sizes for --sweep",
                        _positive, "must be positive"),
    },
    "adapt": {
        "beta_lo": Key(_float, 0.3, "lower smoothness bound", _positive, "must be positive"),
        "beta_hi": Key(_float, 1.0, "upper smoothness bound", _positive, "must be positive"),
        "kappa": Key(_float, 1.0, "Hölder constant", _positive, "must be positive"),
        "trim": Key(_float, 0.05, "boundary trim", _positive, "must be positive"),
        "c_sel": Key(_optional(_float), None, "selection constant (auto: 4 kappa + 0.1)", _positive,
                     "must be positive"),
        "c_shrink": Key(_optional(_float), None, "shrinkage constant (auto: (2 beta_hi + 1)^2 / (2 beta_lo) + 0.1)",
                        _positive, "must be positive"),
        "eval_grid_size": Key(_int, 4096, "sup-norm grid size", _positive, "must be positive"),
        "a_lo": Key(_float, 0.5, "lower bound of the Beta MLE box", _positive, "must be positive"),
        "a_hi": Key(_float, 10.0, "upper bound of the Beta MLE box", _positive, "must be positive"),
    },
    "simulate": {
        "a": Key(_float, 4.0, "source order", _positive, "must be positive"),
        "beta": Key(_float, 0.5, "smoothness", _positive, "must be positive"),
        "n_list": Key(_optional(_int_list), None, "source sizes (auto: from preset)", _positive, "must be positive"),
        "replications": Key(_optional(_int), None, "replications per cell (auto: from preset)", _positive,
                            "must be positive"),
        "rules": Key(_str_list, ("SSR1", "SSR2", "SSR3", "SSR4"), "SSR rules to run"),
        "c4_sl": Key(_optional(_float), None, "SSR2 exponent inflation (auto: 0.95 at beta 0.5, 0.4 at 0.9)"),
        "c4_tl": Key(_optional(_float), None, "SSR3 exponent inflation (auto: 1.2 at beta 0.5, 0.7 at 0.9)"),
        "rule_consts": Key(_float_list, (0.1, 0.5, 1.0, 10.0), "multipliers of the four SSR rules", _positive,
                           "must be positive"),
        "f_id": Key(_choice("f1", "f2"), "f1", "regression function"),
        "sigma": Key(_float, 0.3, "noise standard deviation", _nonneg, "must be non-negative"),
        "c_bandwidth": Key(_float, 0.7, "bandwidth multiple of the spread", _positive, "must be positive"),
        "grid_N": Key(_int, 3000, "loss grid size", _positive, "must be positive"),
        "seed": Key(_int, 0, "base seed (overridden by SLP_SEED, then by --seed)"),
        "workers": Key(_int, 1, "worker processes", _positive, "must be positive"),
    },
}

PRESETS = {"desk": (DESK_N, 25), "paper": (FULL_N, 100)}


@dataclass(frozen=True)
class Config:
    sections: Dict[str, Dict[str, Any]]

    def __getitem__(self, section: str) -> Dict[str, Any]:
        return self.sections[section]

    def density(self, role: str):
        sec = self.sections[role]
        if sec["kind"] == "beta":
            return BetaDensity(sec["a1"], sec["a2"])
        if sec["pieces"] is None:
            raise ConfigError(f"[{role}] pieces is required when kind = singular")
        try:
            return SingularityDensitySpec.from_pieces(list(sec["pieces"]), delta=sec["delta"])
        except ValueError as exc:
            raise ConfigError(f"[{role}] pieces: {exc}") from exc


def _line_of(err: configparser.Error) -> str:
    lineno = getattr(err, "lineno", None)
    if lineno is None and getattr(err, "errors", None):
        lineno = err.errors[0][0]
    return f"line {lineno}" if lineno is not None else "unknown line"


def parse_config(text: str) -> Config:
    """Parse and validate configuration text, filling defaults for every key."""
    cp = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), strict=True, default_section="__none__"
    )
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"{_line_of(exc)}: {exc.message.splitlines()[0]}") from exc
    sections = {}
    for name in cp.sections():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
    for name, keys in SCHEMA.items():
        given = dict(cp[name]) if cp.has_section(name) else {}
        unknown = sorted(set(given) - set(keys))
        if unknown:
            raise ConfigError(f"[{name}] unknown key {unknown[0]!r}")
        values = {}
        for key, spec in keys.items():
            if key not in given:
                values[key] = spec.default
                continue
            try:
                value = spec.parse(given[key])
            except ValueError as exc:
                raise ConfigError(f"[{name}] {key}: cannot parse {given[key]!r} ({exc})") from exc
            if spec.check is not None and not spec.check(value):
                raise ConfigError(f"[{name}] {key}: {spec.rule} (got {given[key]!r})")
            values[key] = value
        sections[name] = values
    if len(sections["rate"]["consts"]) != 4:
        raise ConfigError("[rate] consts: need exactly four values")
    if len(sections["simulate"]["rule_consts"]) != 4:
        raise ConfigError("[simulate] rule_consts: need exactly four values")
    bad = [r for r in sections["simulate"]["rules"] if r not in ("SSR1", "SSR2", "SSR3", "SSR4")]
    if bad:
        raise ConfigError(f"[simulate] rules: unknown rule {bad[0]!r}")
    return Config(sections)


def load_config(path: Optional[str]) -> Config:
    if path is None:
        return parse_config("")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)


def describe_defaults() -> str:
    """Plain-text listing of all sections, keys and defaults for ``--help``."""
    lines = ["config file keys (section: key = default  description):"]
    for name, keys in SCHEMA.items():
        lines.append(f"  [{name}]")
        for key, spec in keys.items():
            default = spec.default
            if isinstance(default, tuple):
                default = ", ".join(str(v) for v in default)
            elif default is None:
                default = "auto"
            lines.append(f"    {key} = {default}  {spec.help}")
    return "\n".join(lines)
