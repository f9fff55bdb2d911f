"""Deterministic CSV and SVG writers."""

from __future__ import annotations

import csv
import io
import math
import os
from typing import Dict, Iterable, Mapping, Sequence, Tuple
from xml.sax.saxutils import escape

SIG_DIGITS = 12


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return format(v, f".{SIG_DIGITS}g")
    if hasattr(v, "dtype"):
        return format_value(v.item())
    return str(v)


def csv_text(rows: Iterable[Mapping], schema: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(schema)
    for i, row in enumerate(rows):
        missing = [k for k in schema if k not in row]
        if missing:
            raise ValueError(f"row {i} lacks columns {missing}")
        writer.writerow([format_value(row[k]) for k in schema])
    return buf.getvalue()


def emit_csv(rows: Iterable[Mapping], schema: Sequence[str], path) -> str:
    """Write rows as CSV with a header, 12 significant digits and LF line endings."""
    text = csv_text(rows, schema)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {os.fspath(path)}: {exc.strerror}") from exc
    return os.fspath(path)


def read_csv(path) -> Tuple[list, list]:
    """Header and rows (as string lists) of a CSV file."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{os.fspath(path)} is empty")
    return rows[0], rows[1:]


_COLORS = ("#1b6ca8", "#d1495b", "#edae49", "#00798c", "#6a4c93", "#3d3d3d")
W, H = 640, 420
ML, MR, MT, MB = 70, 130, 40, 55


def _ticks(lo: float, hi: float, count: int = 5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def _fmt(v: float) -> str:
    return format(v, ".6g")


def plot_svg(
    series: Dict[str, Sequence[Tuple[float, float]]],
    title: str = "",
    xlabel: str = "n",
    ylabel: str = "log SAR",
    log_x: bool = True,
) -> str:
    if not series or all(len(p) == 0 for p in series.values()):
        raise ValueError("need at least one non-empty series")
    pts = [(x, y) for s in series.values() for x, y in s]
    if log_x and any(x <= 0 for x, _ in pts):
        raise ValueError("log-scaled x axis needs positive x values")
    tx = (lambda v: math.log10(v)) if log_x else (lambda v: v)
    xs = [tx(x) for x, _ in pts]
    ys = [y for _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = W - ML - MR, H - MT - MB

    def px(v):
        return ML + (tx(v) - x0) / (x1 - x0) * pw

    def py(v):
        return MT + (y1 - v) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.2f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<line x1="{ML}" y1="{MT + ph}" x2="{ML + pw}" y2="{MT + ph}" stroke="black"/>',
        f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{MT + ph}" stroke="black"/>',
    ]
    for v in _ticks(x0, x1):
        xv = 10**v if log_x else v
        xp = px(xv)
        out.append(f'<line x1="{xp:.2f}" y1="{MT + ph}" x2="{xp:.2f}" y2="{MT + ph + 5}" stroke="black"/>')
        out.append(
            f'<text x="{xp:.2f}" y="{MT + ph + 18}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{_fmt(xv)}</text>'
        )
    for v in _ticks(y0, y1):
        yp = py(v)
        out.append(f'<line x1="{ML - 5}" y1="{yp:.2f}" x2="{ML}" y2="{yp:.2f}" stroke="black"/>')
        out.append(
            f'<text x="{ML - 8}" y="{yp + 4:.2f}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{_fmt(v)}</text>'
        )
    xl = f"{xlabel} (log scale)" if log_x else xlabel
    out.append(
        f'<text x="{ML + pw / 2:.2f}" y="{H - 12}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">{escape(xl)}</text>'
    )
    out.append(
        f'<text x="16" y="{MT + ph / 2:.2f}" text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {MT + ph / 2:.2f})">{escape(ylabel)}</text>'
    )
    for k, (label, s) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in sorted(s))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        for x, y in sorted(s):
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
        ly = MT + 10 + 20 * k
        lx = ML + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text x="{lx + 30}" y="{ly + 4}" font-family="sans-serif" font-size="12">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(series: Dict[str, Sequence[Tuple[float, float]]], path, **kwargs) -> str:
    """Write a line chart with one polyline per series and a legend."""
    text = plot_svg(series, **kwargs)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {os.fspath(path)}: {exc.strerror}") from exc
    return os.fspath(path)
