import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bulletinkit.errors import AmbiguousMatch, CoercionError, ConfigError
from bulletinkit.forge import bulletin_series, gen_bulletin
from bulletinkit.geometry import BBox, Cell, TableGrid
from bulletinkit.regions import detect_tables
from bulletinkit.schema import (
    ColumnSpec, SchemaVersion, TableSchema, coerce, extract_records, load_schema_versions, match_table,
    normalize_header, schema_for_date, similarity,
)


def grid(rows, method="lattice"):
    cells = tuple(Cell(i, j, 1, 1, t) for i, row in enumerate(rows) for j, t in enumerate(row))
    return TableGrid(BBox(0, 0, 100, 100), len(rows), len(rows[0]), cells, method)


TESTING = TableSchema(
    "DL", "dl_testing", "testing",
    (ColumnSpec("RT-PCR Tests", "rtpcr_tests", "integer", True),
     ColumnSpec("Total Tests", "total_tests", "integer", True)),
    header_anchors=("RT-PCR Tests",),
)


@pytest.mark.parametrize(
    "raw, norm",
    [("No. of  Deaths*", "no of deaths"), ("RT-PCR   Tests", "rt pcr tests"), ("", "")],
)
def test_normalize_header(raw, norm):
    assert normalize_header(raw) == norm


@given(st.text())
def test_normalize_header_idempotent(s):
    once = normalize_header(s)
    assert normalize_header(once) == once


def test_similarity_accepts_damaged_header_and_rejects_sibling():
    assert similarity("RTPCR Test", "rt pcr tests") >= 0.85
    assert similarity("total tests", "total deaths") < 0.85
    assert similarity("Deaths", "deaths") == 1.0


def test_match_without_grids():
    assert match_table([], TESTING) is None


def test_exact_header_match():
    g = grid([["Date", "RT PCR Tests", "Total Tests"], ["12-04-2021", "100", "200"]])
    other = grid([["District", "Cases"], ["Howrah", "5"]])
    assert match_table([other, g], TESTING) is g


def test_fuzzy_header_match():
    g = grid([["RTPCR Test", "Total Tests"], ["30", "100"]])
    assert match_table([g], TESTING) is g


def test_two_candidates_are_ambiguous():
    g = grid([["RT-PCR Tests", "Total Tests"], ["30", "100"]])
    with pytest.raises(AmbiguousMatch):
        match_table([g, grid(g.to_matrix())], TESTING)


@pytest.mark.parametrize(
    "text, kind, value",
    [
        ("1,23,456", "integer", 123456),
        ("Nil", "integer", None),
        ("45 (12)", "integer", 45),
        ("  ", "integer", None),
        ("3.5%", "real", 3.5),
        ("1,234*", "integer", 1234),
        ("15-04-2021", "date", "2021-04-15"),
        (" Delhi ", "text", "Delhi"),
    ],
)
def test_coerce(text, kind, value):
    assert coerce(text, kind) == value


@pytest.mark.parametrize("text, kind", [("unknown", "integer"), ("4.5", "integer"), ("31-31-2021", "date")])
def test_coerce_rejects(text, kind):
    with pytest.raises(CoercionError):
        coerce(text, kind)


@given(st.text())
def test_coerce_text_never_raises(s):
    coerce(s, "text")


def test_no_schemas_no_records():
    assert extract_records([grid([["a", "b"], ["1", "2"]])], "2021-04-12", []) == ([], [])


def bulletin_grids(state, day, vals, corrupt=None):
    version = schema_for_date(state, day)
    return detect_tables(gen_bulletin(version, day, vals, corrupt)), version


def test_delhi_case_table():
    vals = {"case_info": {"confirmed_total": 1000, "recovered_total": 900, "deaths_total": 20}}
    grids, version = bulletin_grids("DL", "2021-04-15", vals)
    recordsets, qa = extract_records(grids, "2021-04-15", version)
    (rs,) = [r for r in recordsets if r.sql_table == "case_info"]
    assert rs.rows == [(1000, 900, 20, None)]
    assert rs.columns == ("confirmed_total", "recovered_total", "deaths_total", "active_cases")
    assert rs.provenance["method"] == "lattice"


def test_bengal_required_na_becomes_qa():
    vals = {"testing": {"rtpcr_tests": 500, "rat_tests": 200, "total_tests": 700}}
    grids, version = bulletin_grids("WB", "2021-05-01", vals, "required_na")
    recordsets, qa = extract_records(grids, "2021-05-01", version)
    assert not any(r.sql_table == "testing" for r in recordsets)
    (q,) = [q for q in qa if q.sql_table == "testing"]
    assert (q.code, q.severity) == ("required_null", "error")


@pytest.mark.parametrize("corrupt", [None, "required_na", "bad_number", "duplicate_table"])
@pytest.mark.parametrize("state", ["DL", "WB"])
def test_every_definition_yields_exactly_one_outcome(state, corrupt):
    grids, version = bulletin_grids(state, "2021-04-20", bulletin_series(3, 1)[0], corrupt)
    recordsets, qa = extract_records(grids, "2021-04-20", version)
    produced = [r.sql_table for r in recordsets] + [q.sql_table for q in qa]
    assert sorted(produced) == sorted(t.sql_table for t in version.tables)


def test_shipped_schemas_cover_the_state_table_matrix():
    def tables(state):
        return {t.sql_table for v in load_schema_versions(state) for t in v.tables}

    core = {"case_info", "testing", "vaccination", "hospitalization"}
    assert core <= tables("DL")
    assert core | {"mental_health_counselling"} <= tables("WB")
    assert "age_gender_distribution" in tables("TG")
    assert "individual_fatalities" in tables("KA")


def test_version_in_force_is_used(tmp_path):
    root = tmp_path / "schemas" / "DL"
    root.mkdir(parents=True)
    for version, anchor in [("2020-03-01", "Total Tests"), ("2021-01-01", "Samples Tested")]:
        doc = {"state_code": "DL", "version": version, "tables": [{
            "table_id": "t", "sql_table": "testing", "header_anchors": [anchor],
            "column_map": [{"source": anchor, "dest": "total_tests", "kind": "integer", "required": True}]}]}
        (root / f"{version}.json").write_text(json.dumps(doc))
    assert schema_for_date("DL", "2020-12-31", tmp_path / "schemas").version == "2020-03-01"
    assert schema_for_date("DL", "2021-01-01", tmp_path / "schemas").version == "2021-01-01"
    with pytest.raises(ConfigError):
        schema_for_date("DL", "2019-01-01", tmp_path / "schemas")


def test_row_wise_table_with_two_row_header():
    schema = TableSchema(
        "TG", "tg_age", "age_gender_distribution",
        (ColumnSpec("Age Group", "age_group", "text", True), ColumnSpec("Male", "male_cases"),
         ColumnSpec("Female", "female_cases")),
        header_anchors=("age group", "male", "female"), entity_key=("age_group",),
    )
    g = grid([["Age", "Cases", "Cases"], ["Group", "Male", "Female"], ["0-10", "4", "5"], ["11-20", "7", "6"]])
    (rs,), qa = extract_records([g], "2021-04-01", [schema])
    assert qa == []
    assert rs.rows == [("0-10", 4, 5), ("11-20", 7, 6)]


def test_continuation_rows_merge_when_asked():
    schema = TableSchema(
        "KA", "ka_fat", "individual_fatalities",
        (ColumnSpec("Patient ID", "patient_id", "text", True), ColumnSpec("District", "district", "text")),
        header_anchors=("patient id",), merge_continuation_rows=True, entity_key=("patient_id",),
    )
    g = grid([["Patient ID", "District"], ["P-101", "Bengaluru"], ["", "Urban"], ["P-102", "Udupi"]])
    (rs,), _ = extract_records([g], "2021-04-01", [schema])
    assert rs.rows == [("P-101", "Bengaluru Urban"), ("P-102", "Udupi")]


def test_schema_without_locator_is_rejected():
    with pytest.raises(ConfigError):
        TableSchema("DL", "x", "testing", (ColumnSpec("a", "a"),))


def test_schema_version_from_dict():
    v = SchemaVersion.from_dict({"state_code": "DL", "version": "2020-03-01", "tables": []})
    assert v.tables == ()
