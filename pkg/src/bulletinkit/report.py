"""Static report pages: SVG line charts and an HTML index built from the
database catalog.  Output is byte-for-byte reproducible for identical data.
"""

from __future__ import annotations

import html
import math
from datetime import date as Date, timedelta
from pathlib import Path
from typing import Sequence

from .analytics import METRICS, SeriesPoint, compute_metric
from .errors import ReportError
from .store import data_tables, session

WIDTH, HEIGHT = 800, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 100, 40, 50
MAX_X_TICKS = 8
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]
METRIC_TITLES = {
    "weekly_cfr": "Weekly case fatality rate",
    "rtpcr_share": "Share of RT-PCR tests",
    "bed_occupancy": "COVID-19 bed occupancy",
    "hospitalization_pct": "Hospitalized share of active cases",
}


def _f(v: float) -> str:
    return f"{v:.2f}"


def _month_ticks(d0: Date, d1: Date) -> list[Date]:
    ticks = []
    m = Date(d0.year, d0.month, 1)
    if m < d0:
        m = Date(m.year + (m.month == 12), m.month % 12 + 1, 1)
    while m <= d1:
        ticks.append(m)
        m = Date(m.year + (m.month == 12), m.month % 12 + 1, 1)
    if len(ticks) > MAX_X_TICKS:
        step = math.ceil(len(ticks) / MAX_X_TICKS)
        ticks = ticks[::step]
    return ticks


def _segments(points: list[SeriesPoint]) -> list[list[SeriesPoint]]:
    segs, cur = [], []
    for p in points:
        if p.value is None:
            if cur:
                segs.append(cur)
            cur = []
        else:
            cur.append(p)
    if cur:
        segs.append(cur)
    return segs


def render_chart(series: Sequence[SeriesPoint], path=None, title: str | None = None) -> str:
    """Line chart of one metric, one line per state, as SVG text.

    Null values break a line; an isolated point is drawn as a marker.
    Writes the file too when ``path`` is given.
    """
    present = [p for p in series if p.value is not None]
    if not present:
        raise ReportError("empty_series", "no non-null points to plot")
    d0 = min(p.period_start for p in series)
    d1 = max(p.period_start for p in series)
    if d0 == d1:
        d0, d1 = d0 - timedelta(days=1), d1 + timedelta(days=1)
    lo = min(p.value for p in present)
    hi = max(p.value for p in present)
    span = hi - lo
    pad = 0.05 * span if span > 0 else (0.05 * abs(hi) or 0.05)
    lo, hi = lo - pad, hi + pad

    plot_w, plot_h = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(d: Date) -> float:
        return LEFT + plot_w * (d - d0).days / (d1 - d0).days

    def sy(v: float) -> float:
        return TOP + plot_h * (hi - v) / (hi - lo)

    metric = series[0].metric
    title = title or METRIC_TITLES.get(metric, metric)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{html.escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP + plot_h}" x2="{LEFT + plot_w}" y2="{TOP + plot_h}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + plot_h}" stroke="black"/>',
    ]
    for t in _month_ticks(d0, d1):
        x = _f(sx(t))
        out.append(f'<line x1="{x}" y1="{TOP + plot_h}" x2="{x}" y2="{TOP + plot_h + 5}" stroke="black"/>')
        out.append(
            f'<text x="{x}" y="{TOP + plot_h + 20}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{t.strftime("%b %Y")}</text>'
        )
    for k in range(5):
        v = lo + (hi - lo) * k / 4
        y = _f(sy(v))
        out.append(f'<line x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(
            f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif" font-size="11">{v:.3g}</text>'
        )

    states = sorted({p.state_code for p in series})
    for n, state in enumerate(states):
        color = PALETTE[n % len(PALETTE)]
        pts = sorted((p for p in series if p.state_code == state), key=lambda p: p.period_start)
        for seg in _segments(pts):
            if len(seg) == 1:
                p = seg[0]
                out.append(f'<circle cx="{_f(sx(p.period_start))}" cy="{_f(sy(p.value))}" r="3" fill="{color}"/>')
            else:
                coords = " ".join(f"{_f(sx(p.period_start))},{_f(sy(p.value))}" for p in seg)
                out.append(
                    f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2" '
                    f'data-state="{html.escape(state)}"/>'
                )
        ly = TOP + 10 + 20 * n
        lx = WIDTH - RIGHT + 15
        out.append(f'<rect x="{lx}" y="{ly - 6}" width="14" height="4" fill="{color}"/>')
        out.append(
            f'<text x="{lx + 20}" y="{ly}" dominant-baseline="middle" font-family="sans-serif" '
            f'font-size="12">{html.escape(state)}</text>'
        )
    out.append("</svg>")
    svg = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(svg, encoding="utf-8")
    return svg


def _page(title: str, body: str) -> str:
    return (
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
        f"<title>{html.escape(title)}</title>\n</head>\n<body>\n{body}</body>\n</html>\n"
    )


def table_catalog(db_path) -> list[tuple[str, int, str | None, str | None]]:
    """(name, row count, first date, last date) for each data table."""
    with session(db_path) as conn:
        out = []
        for name in data_tables(conn):
            n, d0, d1 = conn.execute(f'SELECT COUNT(*), MIN(date), MAX(date) FROM "{name}"').fetchone()
            out.append((name, n, d0, d1))
        return out


def states_in(db_path) -> list[str]:
    with session(db_path) as conn:
        found = set()
        for name in data_tables(conn):
            found.update(r[0] for r in conn.execute(f'SELECT DISTINCT state_code FROM "{name}"'))
    return sorted(found)


def render_highlights(db_path, out_dir, start=None, end=None) -> list[Path]:
    """Write ``index.html`` (every data table with its row count and date
    coverage) and one page per metric embedding that metric's chart."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    rows = "".join(
        f"<tr><td>{html.escape(name)}</td><td>{n}</td><td>{d0 or ''}</td><td>{d1 or ''}</td></tr>\n"
        for name, n, d0, d1 in table_catalog(db_path)
    )
    links = "".join(
        f'<li><a href="{m}.html">{html.escape(METRIC_TITLES[m])}</a></li>\n' for m in METRICS
    )
    body = (
        "<h1>Bulletin dataset</h1>\n<h2>Tables</h2>\n"
        "<table>\n<tr><th>table</th><th>rows</th><th>first date</th><th>last date</th></tr>\n"
        f"{rows}</table>\n<h2>Analyses</h2>\n<ul>\n{links}</ul>\n"
    )
    index = out / "index.html"
    index.write_text(_page("Bulletin dataset", body), encoding="utf-8")
    written.append(index)

    states = states_in(db_path)
    for metric in METRICS:
        points = [p for s in states for p in compute_metric(db_path, s, metric, start, end)]
        title = METRIC_TITLES[metric]
        if any(p.value is not None for p in points):
            svg = out / f"{metric}.svg"
            render_chart(points, svg, title)
            written.append(svg)
            content = f'<h1>{html.escape(title)}</h1>\n<img src="{metric}.svg" alt="{html.escape(title)}">\n'
        else:
            content = f"<h1>{html.escape(title)}</h1>\n<p>No data.</p>\n"
        page = out / f"{metric}.html"
        page.write_text(_page(title, content + '<p><a href="index.html">back</a></p>\n'), encoding="utf-8")
        written.append(page)
    return written
