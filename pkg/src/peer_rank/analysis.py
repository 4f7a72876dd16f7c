"""Correlation statistics and report rendering for simulation results."""
from __future__ import annotations

import csv
import io
import math
from typing import TYPE_CHECKING, NamedTuple
from xml.sax.saxutils import escape, quoteattr

import numpy as np
from scipy import stats

from .errors import DegenerateInputError, DomainError

if TYPE_CHECKING:
    from .simulation import SimResult

CSV_HEADER = ("config_id", "n", "p", "m", "noise", "replication", "round", "rho")
UNDEFINED = "NA"
SVG_WIDTH, SVG_HEIGHT = 800, 600


def _paired(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise DomainError(f"need two 1-d series of equal length, got {x.shape} and {y.shape}")
    if x.shape[0] < 2:
        raise DomainError("need at least two paired observations")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DomainError("series must be finite")
    return x, y


def _pearson(x, y):
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInputError("correlation undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient."""
    return _pearson(*_paired(x, y))


def spearman(x, y) -> float:
    """Spearman's rho, computed as the Pearson correlation of average ranks."""
    x, y = _paired(x, y)
    return _pearson(stats.rankdata(x), stats.rankdata(y))


class GroupComparison(NamedTuple):
    mean_a: float
    mean_b: float
    statistic: float
    pvalue: float


def group_mean_compare(a, b) -> GroupComparison:
    """Welch's two-sample t-test with a two-sided p-value.

    Two constant groups with the same value compare as (t=0, p=1); two
    constant groups with different values give an infinite statistic and p=0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise DomainError("each group needs at least two observations")
    mean_a, mean_b = float(a.mean()), float(b.mean())
    if a.var() == 0.0 and b.var() == 0.0:
        if mean_a == mean_b:
            return GroupComparison(mean_a, mean_b, 0.0, 1.0)
        return GroupComparison(mean_a, mean_b, math.copysign(math.inf, mean_a - mean_b), 0.0)
    res = stats.ttest_ind(a, b, equal_var=False)
    return GroupComparison(mean_a, mean_b, float(res.statistic), float(res.pvalue))


def planted_correlation_sample(r: float, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Bivariate normal sample whose population correlation is ``r``."""
    if not -1.0 <= r <= 1.0:
        raise DomainError(f"correlation outside [-1, 1]: {r}")
    x = rng.standard_normal(n)
    z = rng.standard_normal(n)
    return x, r * x + math.sqrt(1.0 - r * r) * z


def _fmt(value) -> str:
    if value is None:
        return UNDEFINED
    return repr(float(value))


def _csv(result: SimResult) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    rows = sorted(result.rows, key=lambda r: (r.config_id, r.replication, r.round))
    for r in rows:
        writer.writerow([r.config_id, r.n, _fmt(r.p), r.m, _fmt(r.noise),
                         r.replication, r.round, _fmt(r.rho)])
    return buf.getvalue().encode("utf-8")


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _svg(result: SimResult) -> bytes:
    left, right, top, bottom = 70, 200, 40, 60
    plot_w = SVG_WIDTH - left - right
    plot_h = SVG_HEIGHT - top - bottom
    max_round = max(c.rounds for c in result.configs)

    def px(rnd):
        if max_round <= 1:
            return left + plot_w / 2
        return left + (rnd - 1) / (max_round - 1) * plot_w

    def py(rho):
        return top + (1.0 - rho) / 2.0 * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" '
        f'height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<text x="{left}" y="24" font-family="sans-serif" font-size="16">'
        'Median Spearman rho by round</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for tick in (-1.0, -0.5, 0.0, 0.5, 1.0):
        y = py(tick)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left + plot_w}" y2="{y:.2f}" '
                   'stroke="#dddddd"/>')
        out.append(f'<text x="{left - 10}" y="{y + 4:.2f}" font-family="sans-serif" '
                   f'font-size="12" text-anchor="end">{tick:.1f}</text>')
    for rnd in range(1, max_round + 1):
        x = px(rnd)
        out.append(f'<text x="{x:.2f}" y="{top + plot_h + 18}" font-family="sans-serif" '
                   f'font-size="12" text-anchor="middle">{rnd}</text>')
    out.append(f'<text x="{left + plot_w / 2:.2f}" y="{SVG_HEIGHT - 15}" font-family="sans-serif" '
               'font-size="13" text-anchor="middle">round</text>')

    for cid, cfg in enumerate(result.configs):
        color = _PALETTE[cid % len(_PALETTE)]
        label = f"n={cfg.n} m={cfg.m} noise={cfg.noise:g}"
        points = [f"{px(rnd):.2f},{py(rho):.2f}"
                  for rnd, rho in enumerate(result.medians(cid), start=1) if rho is not None]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" '
                   f'points={quoteattr(" ".join(points))}><title>{escape(label)}</title></polyline>')
        ly = top + 10 + 18 * cid
        lx = left + plot_w + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}" font-family="sans-serif" font-size="12">'
                   f'{escape(label)}</text>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def render_report(result: SimResult, fmt: str = "csv") -> bytes:
    """Serialize a simulation result as CSV rows or an SVG chart of median curves."""
    if fmt not in ("csv", "svg"):
        raise DomainError(f"unknown report format {fmt!r}")
    if not result.rows:
        raise DomainError("nothing to render: result has no rows")
    return _csv(result) if fmt == "csv" else _svg(result)
