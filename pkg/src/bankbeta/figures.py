"""Deterministic SVG charts.

Charts are built by string assembly with fixed-width float formatting, so a
given input always produces byte-identical SVG. Each chart is an 800x400
viewBox; line charts get shared axes and a legend, histograms are drawn as
a grid of small per-group panels.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

WIDTH = 800
HEIGHT = 400

_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

_MARGIN_L = 62
_MARGIN_R = 14
_MARGIN_T = 30
_MARGIN_B = 36


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


def _y_ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    # a flat series still needs two distinct ticks to read the level off
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    return np.linspace(lo, hi, n)


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" font-size="14">'
        f"{_escape(title)}</text>",
    ]


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def line_chart(
    series: list[tuple[str, np.ndarray]],
    x_labels: list[str] | None = None,
    title: str = "",
    ylim: tuple[float, float] | None = None,
) -> str:
    """Multi-series line chart over a shared integer x axis.

    ``ylim`` sets minimum axis bounds; data outside them widens the axis
    rather than clipping. All series must be nonempty and equal length.
    """
    if not series:
        raise ValueError("no series to plot")
    lengths = {len(v) for _, v in series}
    if lengths == {0}:
        raise ValueError("series are empty")
    if len(lengths) != 1:
        raise ValueError(f"series lengths differ: {sorted(lengths)}")
    n = lengths.pop()
    values = np.concatenate([np.asarray(v, dtype=float) for _, v in series])
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite values in series")
    lo, hi = float(values.min()), float(values.max())
    if ylim is not None:
        lo, hi = min(lo, ylim[0]), max(hi, ylim[1])
    ticks = _y_ticks(lo, hi)
    lo, hi = float(ticks[0]), float(ticks[-1])

    px0, px1 = _MARGIN_L, WIDTH - _MARGIN_R
    py0, py1 = HEIGHT - _MARGIN_B, _MARGIN_T

    def xpos(i: int) -> float:
        return px0 + (px1 - px0) * (i / max(n - 1, 1))

    def ypos(v: float) -> float:
        return py0 + (py1 - py0) * ((v - lo) / (hi - lo))

    parts = _header(title)
    for tick in ticks:
        y = ypos(float(tick))
        parts.append(
            f'<line x1="{px0}" y1="{_fmt(y)}" x2="{px1}" y2="{_fmt(y)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{px0 - 6}" y="{_fmt(y + 4)}" text-anchor="end" font-size="11">'
            f"{_tick_label(float(tick))}</text>"
        )
    if x_labels is not None and len(x_labels) == n and n > 0:
        step = max(1, (n - 1) // 5 if n > 1 else 1)
        for i in range(0, n, step):
            x = xpos(i)
            parts.append(
                f'<text x="{_fmt(x)}" y="{HEIGHT - 12}" text-anchor="middle" font-size="11">'
                f"{_escape(x_labels[i])}</text>"
            )
    parts.append(
        f'<line x1="{px0}" y1="{py0}" x2="{px1}" y2="{py0}" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{px0}" y1="{py0}" x2="{px0}" y2="{py1}" stroke="black" stroke-width="1"/>'
    )
    for idx, (label, vals) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(
            f"{_fmt(xpos(i))},{_fmt(ypos(float(v)))}" for i, v in enumerate(vals)
        )
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
        )
        lx = px1 - 92
        ly = py1 + 14 * idx
        parts.append(
            f'<line x1="{lx}" y1="{_fmt(ly + 4)}" x2="{lx + 16}" y2="{_fmt(ly + 4)}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 20}" y="{_fmt(ly + 8)}" font-size="11">{_escape(label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def histogram_grid(
    groups: list[tuple[str, np.ndarray]],
    title: str = "",
    bins: int = 20,
) -> str:
    """Grid of small histograms, five panels per row."""
    if not groups:
        raise ValueError("no groups to plot")
    for label, vals in groups:
        if len(vals) == 0:
            raise ValueError(f"group {label!r} is empty")
    cols = 5
    rows = math.ceil(len(groups) / cols)
    cell_w = (WIDTH - 20) / cols
    cell_h = (HEIGHT - _MARGIN_T - 10) / rows

    parts = _header(title)
    for idx, (label, vals) in enumerate(groups):
        vals = np.asarray(vals, dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"non-finite values in group {label!r}")
        lo, hi = float(vals.min()), float(vals.max())
        if hi <= lo:
            lo, hi = lo - 0.5, hi + 0.5
        counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
        peak = max(int(counts.max()), 1)

        cx = 10 + (idx % cols) * cell_w
        cy = _MARGIN_T + (idx // cols) * cell_h
        plot_x0, plot_x1 = cx + 6, cx + cell_w - 6
        plot_y0, plot_y1 = cy + cell_h - 18, cy + 16
        parts.append(
            f'<text x="{_fmt(cx + 6)}" y="{_fmt(cy + 12)}" font-size="11">{_escape(label)}</text>'
        )
        parts.append(
            f'<line x1="{_fmt(plot_x0)}" y1="{_fmt(plot_y0)}" x2="{_fmt(plot_x1)}" '
            f'y2="{_fmt(plot_y0)}" stroke="#888888" stroke-width="1"/>'
        )
        bar_w = (plot_x1 - plot_x0) / bins
        for b in range(bins):
            h = (plot_y0 - plot_y1) * (counts[b] / peak)
            if counts[b] == 0:
                continue
            parts.append(
                f'<rect x="{_fmt(plot_x0 + b * bar_w)}" y="{_fmt(plot_y0 - h)}" '
                f'width="{_fmt(bar_w)}" height="{_fmt(h)}" fill="#4c78a8"/>'
            )
        parts.append(
            f'<text x="{_fmt(plot_x0)}" y="{_fmt(plot_y0 + 12)}" font-size="9">'
            f"{_tick_label(float(edges[0]))}</text>"
        )
        parts.append(
            f'<text x="{_fmt(plot_x1)}" y="{_fmt(plot_y0 + 12)}" text-anchor="end" '
            f'font-size="9">{_tick_label(float(edges[-1]))}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_figures(
    out_dir: str | Path,
    income: dict,
    expense: dict,
    beta_ylim: tuple[float, float] = (-0.2, 0.4),
) -> tuple[list[Path], list[str]]:
    """Write the standard fig1..fig10 set from per-decile beta series.

    ``income``/``expense`` map decile -> TvpBetaSeries (anything exposing
    ``quarters``, ``beta_sum`` and ``cond_vol``). Figures whose inputs are
    missing or empty are skipped and reported in the returned warnings list
    instead of raising.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    warnings: list[str] = []

    def decile_series(source: dict, attr: str) -> list[tuple[str, np.ndarray]] | None:
        out = []
        for d in range(1, 11):
            s = source.get(d)
            if s is None or len(getattr(s, attr)) == 0:
                return None
            out.append((f"d{d}", np.asarray(getattr(s, attr), dtype=float)))
        return out

    def labels(source: dict) -> list[str] | None:
        s = source.get(1)
        if s is None:
            return None
        return [str(q) for q in s.quarters]

    inc_beta = decile_series(income, "beta_sum")
    exp_beta = decile_series(expense, "beta_sum")
    inc_vol = decile_series(income, "cond_vol")
    exp_vol = decile_series(expense, "cond_vol")
    nim_beta = None
    if inc_beta is not None and exp_beta is not None:
        nim_beta = [
            (label, iv - ev)
            for (label, iv), (_, ev) in zip(inc_beta, exp_beta)
        ]

    plan: list[tuple[str, str, object]] = [
        ("fig1.svg", "line", (inc_beta, labels(income), "Income beta (filtered)", beta_ylim)),
        ("fig2.svg", "line", (exp_beta, labels(expense), "Expense beta (filtered)", beta_ylim)),
        ("fig3.svg", "line", (nim_beta, labels(income), "Net margin beta (filtered)", beta_ylim)),
        ("fig4.svg", "hist", (inc_beta, "Income beta distribution by decile")),
        ("fig5.svg", "hist", (exp_beta, "Expense beta distribution by decile")),
        ("fig6.svg", "hist", (nim_beta, "Net margin beta distribution by decile")),
        ("fig7.svg", "line", (inc_vol, labels(income), "Income forecast volatility", None)),
        ("fig8.svg", "line", (exp_vol, labels(expense), "Expense forecast volatility", None)),
        (
            "fig9.svg",
            "line",
            (
                None if inc_vol is None else [inc_vol[0], inc_vol[9]],
                labels(income),
                "Income volatility, smallest vs largest decile",
                None,
            ),
        ),
        (
            "fig10.svg",
            "line",
            (
                None if exp_vol is None else [exp_vol[0], exp_vol[9]],
                labels(expense),
                "Expense volatility, smallest vs largest decile",
                None,
            ),
        ),
    ]

    for name, kind, args in plan:
        if args[0] is None:
            warnings.append(f"{name}: input series missing or empty, skipped")
            continue
        if kind == "line":
            series, x_labels, title, ylim = args
            svg = line_chart(series, x_labels=x_labels, title=title, ylim=ylim)
        else:
            series, title = args
            svg = histogram_grid(series, title=title)
        path = out_dir / name
        path.write_text(svg)
        written.append(path)
    return written, warnings
