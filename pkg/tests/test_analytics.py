from datetime import date, timedelta

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bulletinkit.analytics import (
    CumulativeSeries, bed_occupancy, compute_metric, daily_cross_check, hospitalization_pct, rtpcr_share,
    series_to_csv, week_bounds, weekly_cfr, weekly_delta,
)
from bulletinkit.qa import QaRecord
from bulletinkit.schema import BulletinRecordSet, load_schema_versions
from bulletinkit.store import init_db, record_qa, upsert

W15 = (2021, 15)  # Monday 2021-04-12 .. Sunday 2021-04-18
D = date.fromisoformat


def series(pairs):
    return CumulativeSeries.from_pairs([(D(d), v) for d, v in pairs])


def test_week_bounds():
    assert week_bounds(W15) == (D("2021-04-12"), D("2021-04-18"))
    assert week_bounds(D("2021-04-15")) == week_bounds(W15)


def test_flat_series_has_zero_delta():
    assert weekly_delta(series([("2021-04-11", 100), ("2021-04-18", 100)]), W15) == 0


def test_delta_between_week_endpoints():
    assert weekly_delta(series([("2021-04-11", 100), ("2021-04-17", 170)]), W15) == 70


def test_missing_prior_endpoint_is_null():
    assert weekly_delta(series([("2021-04-12", 100), ("2021-04-17", 170)]), W15) is None


def test_gaps_inside_week_do_not_matter():
    s = series([("2021-04-09", 90), ("2021-04-14", 130), ("2021-04-16", 160)])
    assert weekly_delta(s, W15) == 70


def test_negative_delta_is_kept_and_flagged():
    qa = []
    assert weekly_delta(series([("2021-04-11", 100), ("2021-04-17", 90)]), W15, qa, "DL", "case_info") == -10
    assert [q.code for q in qa] == ["negative_delta"]


@pytest.mark.parametrize(
    "deaths, cases, expected",
    [((10, 10), (100, 150), 0.0), ((10, 17), (100, 170), 0.1), ((10, 12), (100, 100), None)],
)
def test_weekly_cfr(deaths, cases, expected):
    c = series([("2021-04-11", cases[0]), ("2021-04-18", cases[1])])
    d = series([("2021-04-11", deaths[0]), ("2021-04-18", deaths[1])])
    point = weekly_cfr(c, d, W15, "DL")
    assert point.value == expected
    assert point.period_start == D("2021-04-12")


def test_ratio_examples():
    day = "2021-04-12"
    assert rtpcr_share(30, 100, day).value == 0.30
    assert rtpcr_share(100, 100, day).value == 1.0
    assert bed_occupancy(0, 100, day).value == 0.0
    assert bed_occupancy(45, 100, day).value == 0.45
    assert hospitalization_pct(0, 100, day).value == 0.0
    assert hospitalization_pct(20, 400, day).value == 0.05
    assert hospitalization_pct(20, 0, day).value is None
    assert rtpcr_share(None, 100, day).value is None


def test_hospitalized_above_active_is_flagged():
    qa = []
    assert hospitalization_pct(500, 400, "2021-04-12", "DL", qa).value == 1.25
    assert [q.code for q in qa] == ["ratio_exceeds_one"]


@given(st.lists(st.integers(1, 500), min_size=2, max_size=80), st.integers(100, 10_000))
def test_weekly_deltas_telescope(increments, start):
    d0 = D("2021-01-04")  # a Monday
    values = [start]
    for inc in increments:
        values.append(values[-1] + inc)
    # first value sits on the Sunday before the first week
    s = CumulativeSeries.from_pairs([(d0 - timedelta(days=1) + timedelta(days=k), v) for k, v in enumerate(values)])
    last = s.dates[-1]
    total, monday = 0, d0
    while monday <= last:
        total += weekly_delta(s, monday)
        monday += timedelta(days=7)
    assert total == values[-1] - values[0]


@given(st.integers(0, 10_000), st.integers(1, 10_000), st.integers(1, 1000))
def test_ratios_are_scale_free(num, den, k):
    day = "2021-04-12"
    for f in (rtpcr_share, bed_occupancy, hospitalization_pct):
        assert f(num, den, day).value == pytest.approx(f(num * k, den * k, day).value)
    c = series([("2021-04-11", 0), ("2021-04-18", den)])
    d = series([("2021-04-11", 0), ("2021-04-18", num)])
    ck = series([("2021-04-11", 0), ("2021-04-18", den * k)])
    dk = series([("2021-04-11", 0), ("2021-04-18", num * k)])
    assert weekly_cfr(c, d, W15).value == pytest.approx(weekly_cfr(ck, dk, W15).value)


def test_daily_cross_check():
    s = series([("2021-04-11", 100), ("2021-04-18", 170)])
    daily = [(D("2021-04-12") + timedelta(days=k), 10) for k in range(7)]
    assert daily_cross_check(s, daily, W15, "DL", "case_info") is None
    q = daily_cross_check(s, daily[:-1], W15, "DL", "case_info")
    assert q.code == "daily_mismatch" and q.severity == "warn"


def test_cumulative_series_requires_increasing_dates():
    with pytest.raises(ValueError):
        CumulativeSeries((D("2021-04-12"), D("2021-04-12")), (1, 2))


@pytest.fixture
def db(tmp_path):
    tables = [t for v in load_schema_versions("DL") for t in v.tables]
    path = init_db(tmp_path / "covid_india.db", tables)
    case_cols = ("confirmed_total", "recovered_total", "deaths_total", "active_cases")
    rows = {
        "2021-04-11": (1000, 800, 10, None),
        "2021-04-14": (1040, 820, 13, None),
        "2021-04-18": (1070, 850, 17, 203),
    }
    upsert([BulletinRecordSet("DL", d, "case_info", case_cols, [r]) for d, r in rows.items()], path)
    tests = {"2021-04-14": (30, None, 100), "2021-04-18": (0, 0, 0)}
    upsert([BulletinRecordSet("DL", d, "testing", ("rtpcr_tests", "rat_tests", "total_tests"), [r])
            for d, r in tests.items()], path)
    beds = {"2021-04-14": (100, 45, 55), "2021-04-18": (100, 60, 40)}
    upsert([BulletinRecordSet("DL", d, "hospitalization", ("beds_total", "beds_occupied", "beds_vacant"), [r])
            for d, r in beds.items()], path)
    return path


def test_metrics_from_store(db):
    (cfr,) = compute_metric(db, "DL", "weekly_cfr", "2021-04-12", "2021-04-18")
    assert cfr.value == 7 / 70
    assert [p.value for p in compute_metric(db, "DL", "rtpcr_share")] == [0.30, None]
    assert [p.value for p in compute_metric(db, "DL", "bed_occupancy")] == [0.45, 0.60]
    # active is derived (1040-820-13=207) when not reported, then reported (203)
    assert [p.value for p in compute_metric(db, "DL", "hospitalization_pct")] == [45 / 207, 60 / 203]


def test_error_flagged_dates_are_not_read(db):
    record_qa([QaRecord("DL", "2021-04-14", "hospitalization", "error", "coercion_failed")], db)
    assert [p.period_start.isoformat() for p in compute_metric(db, "DL", "bed_occupancy")] == ["2021-04-18"]


def test_unknown_metric():
    with pytest.raises(ValueError):
        compute_metric(":memory:", "DL", "r_naught")


def test_csv_writes_null_as_empty():
    text = series_to_csv([rtpcr_share(1, 0, "2021-04-12", "DL"), rtpcr_share(1, 4, "2021-04-13", "DL")])
    assert text.splitlines() == [
        "state_code,period_start,metric,value",
        "DL,2021-04-12,rtpcr_share,",
        "DL,2021-04-13,rtpcr_share,0.25",
    ]
