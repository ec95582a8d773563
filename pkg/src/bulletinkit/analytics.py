"""The four bulletin-derived indicators, as time series.

* ``weekly_cfr`` -- deaths added during an ISO week divided by cases added
  during the same week, both differenced from cumulative totals.
* ``rtpcr_share`` -- RT-PCR tests over all tests, per bulletin date.
* ``bed_occupancy`` -- occupied over total dedicated beds, per date.
* ``hospitalization_pct`` -- occupied beds over active cases, per date.

Ratios with a zero or missing denominator are ``None``, never 0.
"""

from __future__ import annotations

import csv
import io
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from datetime import date as Date, timedelta
from typing import Literal, Sequence

from .qa import QaRecord
from .store import session

Metric = Literal["weekly_cfr", "rtpcr_share", "bed_occupancy", "hospitalization_pct"]
METRICS: tuple[str, ...] = ("weekly_cfr", "rtpcr_share", "bed_occupancy", "hospitalization_pct")


@dataclass(frozen=True)
class SeriesPoint:
    state_code: str
    period_start: Date
    metric: str
    value: float | None


@dataclass(frozen=True)
class CumulativeSeries:
    dates: tuple[Date, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if any(v is None for v in self.values):
            raise ValueError("cumulative values must be non-null")

    @classmethod
    def from_pairs(cls, pairs) -> CumulativeSeries:
        pairs = sorted(pairs)
        return cls(tuple(_as_date(d) for d, _ in pairs), tuple(v for _, v in pairs))

    def last_on_or_before(self, day: Date):
        k = bisect_right(self.dates, day)
        return self.values[k - 1] if k else None

    def last_before(self, day: Date):
        k = bisect_left(self.dates, day)
        return self.values[k - 1] if k else None


def _as_date(d) -> Date:
    return d if isinstance(d, Date) else Date.fromisoformat(d)


def week_bounds(week) -> tuple[Date, Date]:
    """Monday and Sunday of an ISO week given as (iso_year, iso_week) or as
    any date inside it."""
    if isinstance(week, tuple):
        monday = Date.fromisocalendar(week[0], week[1], 1)
    else:
        day = _as_date(week)
        monday = day - timedelta(days=day.weekday())
    return monday, monday + timedelta(days=6)


def weekly_delta(
    series: CumulativeSeries,
    week,
    qa: list | None = None,
    state_code: str = "",
    sql_table: str = "",
) -> int | None:
    """Increase of a cumulative series over one ISO week.

    The value at the last date on or before Sunday minus the value at the
    last date before Monday; None if either is missing.  A negative result
    is returned unchanged and reported as a ``negative_delta`` warning.
    """
    monday, sunday = week_bounds(week)
    end, start = series.last_on_or_before(sunday), series.last_before(monday)
    if end is None or start is None:
        return None
    delta = end - start
    if delta < 0 and qa is not None:
        qa.append(QaRecord(state_code, monday.isoformat(), sql_table, "warn", "negative_delta", f"{start} -> {end}"))
    return delta


def _ratio(num, den) -> float | None:
    if num is None or den is None or den == 0:
        return None
    return num / den


def weekly_cfr(
    cases: CumulativeSeries,
    deaths: CumulativeSeries,
    week,
    state_code: str = "",
    qa: list | None = None,
) -> SeriesPoint:
    d_cases = weekly_delta(cases, week, qa, state_code, "case_info")
    d_deaths = weekly_delta(deaths, week, qa, state_code, "case_info")
    value = None
    if d_cases is not None and d_deaths is not None and d_cases > 0 and d_deaths >= 0:
        value = d_deaths / d_cases
    return SeriesPoint(state_code, week_bounds(week)[0], "weekly_cfr", value)


def rtpcr_share(rtpcr, total, day, state_code: str = "") -> SeriesPoint:
    return SeriesPoint(state_code, _as_date(day), "rtpcr_share", _ratio(rtpcr, total))


def bed_occupancy(occupied, total, day, state_code: str = "") -> SeriesPoint:
    return SeriesPoint(state_code, _as_date(day), "bed_occupancy", _ratio(occupied, total))


def hospitalization_pct(occupied, active, day, state_code: str = "", qa: list | None = None) -> SeriesPoint:
    value = _ratio(occupied, active)
    if value is not None and value > 1 and qa is not None:
        qa.append(
            QaRecord(state_code, _as_date(day).isoformat(), "hospitalization", "warn", "ratio_exceeds_one",
                     f"{occupied} occupied beds for {active} active cases")
        )
    return SeriesPoint(state_code, _as_date(day), "hospitalization_pct", value)


def daily_cross_check(
    series: CumulativeSeries,
    daily: Sequence[tuple[Date, int]],
    week,
    state_code: str = "",
    sql_table: str = "",
) -> QaRecord | None:
    """Warn when reported daily counts for a week disagree with the
    cumulative difference."""
    monday, sunday = week_bounds(week)
    delta = weekly_delta(series, week)
    total = sum(v for d, v in daily if v is not None and monday <= _as_date(d) <= sunday)
    if delta is None or delta == total:
        return None
    return QaRecord(state_code, monday.isoformat(), sql_table, "warn", "daily_mismatch",
                    f"cumulative delta {delta} vs daily sum {total}")


# ---------------------------------------------------------------------------
# Reading from the store
# ---------------------------------------------------------------------------


def _rows(db_path, table: str, state_code: str, columns: Sequence[str]) -> list[tuple]:
    """(date, *columns) rows for a state, skipping dates whose record set
    for this table was flagged with an error."""
    cols = ", ".join(f't."{c}"' for c in columns)
    sql = (
        f'SELECT t.date, {cols} FROM "{table}" t WHERE t.state_code = ? '
        "AND NOT EXISTS (SELECT 1 FROM _qa q WHERE q.state_code = t.state_code AND q.date = t.date "
        "AND q.sql_table = ? AND q.severity = 'error') ORDER BY t.date"
    )
    with session(db_path) as conn:
        known = {r[0] for r in conn.execute("SELECT name FROM sqlite_master WHERE type='table'")}
        if table not in known:
            return []
        return list(conn.execute(sql, (state_code, table)))


def cumulative_series(db_path, state_code: str, column: str, table: str = "case_info") -> CumulativeSeries:
    pairs = [(Date.fromisoformat(d), v) for d, v in _rows(db_path, table, state_code, [column]) if v is not None]
    return CumulativeSeries.from_pairs(pairs)


def _active(confirmed, recovered, deaths, active):
    if active is not None:
        return active
    if None in (confirmed, recovered, deaths):
        return None
    return confirmed - recovered - deaths


def compute_metric(
    db_path,
    state_code: str,
    metric: str,
    start=None,
    end=None,
    qa: list | None = None,
) -> list[SeriesPoint]:
    """One metric's series for a state between ``start`` and ``end``
    (inclusive, ISO dates; open-ended when omitted)."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    lo = _as_date(start) if start else None
    hi = _as_date(end) if end else None

    def inside(d: Date) -> bool:
        return (lo is None or d >= lo) and (hi is None or d <= hi)

    if metric == "weekly_cfr":
        cases = cumulative_series(db_path, state_code, "confirmed_total")
        deaths = cumulative_series(db_path, state_code, "deaths_total")
        if not cases.dates:
            return []
        first = lo or cases.dates[0]
        last = hi or cases.dates[-1]
        monday = week_bounds(first)[0]
        points = []
        while monday <= last:
            points.append(weekly_cfr(cases, deaths, monday, state_code, qa))
            monday += timedelta(days=7)
        return points

    if metric == "rtpcr_share":
        rows = _rows(db_path, "testing", state_code, ["rtpcr_tests", "total_tests"])
        return [rtpcr_share(a, b, d, state_code) for d, a, b in rows if inside(_as_date(d))]
    if metric == "bed_occupancy":
        rows = _rows(db_path, "hospitalization", state_code, ["beds_occupied", "beds_total"])
        return [bed_occupancy(a, b, d, state_code) for d, a, b in rows if inside(_as_date(d))]

    beds = {d: occ for d, occ in _rows(db_path, "hospitalization", state_code, ["beds_occupied"])}
    cases = _rows(db_path, "case_info", state_code, ["confirmed_total", "recovered_total", "deaths_total", "active_cases"])
    points = []
    for d, conf, rec, dead, act in cases:
        if d in beds and inside(_as_date(d)):
            points.append(hospitalization_pct(beds[d], _active(conf, rec, dead, act), d, state_code, qa))
    return points


def series_to_csv(points: Sequence[SeriesPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["state_code", "period_start", "metric", "value"])
    for p in points:
        w.writerow([p.state_code, p.period_start.isoformat(), p.metric, "" if p.value is None else repr(p.value)])
    return buf.getvalue()
