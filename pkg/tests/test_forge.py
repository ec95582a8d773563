import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bulletinkit.errors import GenError
from bulletinkit.forge import (
    TableConstraints, TableManifest, bulletin_series, forge_corpus, gen_bulletin, gen_page_appendix_a2, gen_table,
    indian_grouping, reparse_by_containment,
)
from bulletinkit.lattice import merge_lines
from bulletinkit.schema import schema_for_date


def test_same_seed_same_table():
    assert gen_table(17) == gen_table(17)
    assert gen_table(17, TableConstraints(ruled=True, max_spans=2)) == gen_table(17, TableConstraints(ruled=True, max_spans=2))


def test_ruled_grid_rule_counts():
    frag, man = gen_table(0, TableConstraints(ruled=True, rows=4, cols=3))
    merged = merge_lines(list(frag.lines))
    assert [sum(l.axis == a for l in merged) for a in ("horizontal", "vertical")] == [5, 4]
    assert man.spans == []


def test_unruled_gutters_are_respected():
    frag, man = gen_table(5, TableConstraints(rows=5, cols=4, min_gutter=12, max_gutter=12))
    assert man.gutters == [12, 12, 12]
    lefts = sorted({round(b.x0, 6) for b in man.cell_boxes})
    for k in range(3):
        right = max(r.bbox.x1 for r in frag.runs if round(r.bbox.x0, 6) >= lefts[k] and r.bbox.x0 < lefts[k + 1])
        assert lefts[k + 1] - right >= 12 - 1e-9


@pytest.mark.parametrize(
    "constraints",
    [
        TableConstraints(rows=31),
        TableConstraints(cols=13),
        TableConstraints(rows=1),
        TableConstraints(min_gutter=3.0),
        TableConstraints(min_gutter=10, max_gutter=8),
    ],
)
def test_unsatisfiable_constraints_raise(constraints):
    with pytest.raises(GenError):
        gen_table(1, constraints)


@given(st.integers(0, 2**63 - 1), st.booleans())
def test_manifest_reparse_by_containment(seed, ruled):
    frag, man = gen_table(seed, TableConstraints(ruled=ruled, max_spans=3 if ruled else 0))
    assert reparse_by_containment(list(frag.runs), man) == man.cell_texts
    assert len(man.cell_texts) == len(man.anchors())
    assert all(g > 0 for g in man.gutters)
    assert man.region.x1 <= frag.width and man.region.y1 <= frag.height


def test_manifest_round_trips_through_json():
    _, man = gen_table(3, TableConstraints(ruled=True, max_spans=3))
    assert TableManifest.from_dict(json.loads(json.dumps(man.to_dict()))) == man


def test_packed_page_has_eight_tables_and_hints():
    p, manifests, hints = gen_page_appendix_a2(0)
    assert len(manifests) == len(hints) == 8
    for m, h in zip(manifests, hints):
        assert h.region.x0 <= m.region.x0 and m.region.x1 <= h.region.x1
        assert h.region.y0 <= m.region.y0 and m.region.y1 <= h.region.y1
    assert gen_page_appendix_a2(0) == gen_page_appendix_a2(0)


def test_corpus_writes_pdf_and_manifest(tmp_path):
    written = forge_corpus(tmp_path, 4, 42)
    assert len(written) == 4
    for pdf in written:
        assert pdf.exists() and pdf.with_suffix(".json").exists()
    assert [json.loads(p.with_suffix(".json").read_text())["ruled"] for p in written] == [False, True, False, True]


def test_indian_grouping():
    assert indian_grouping(123456) == "1,23,456"
    assert indian_grouping(12345678) == "1,23,45,678"
    assert indian_grouping(999) == "999"


def test_bulletin_corruptions_change_the_page():
    version = schema_for_date("DL", "2021-04-12")
    vals = bulletin_series(0, 1)[0]
    clean = gen_bulletin(version, "2021-04-12", vals)
    na = gen_bulletin(version, "2021-04-12", vals, "required_na")
    dup = gen_bulletin(version, "2021-04-12", vals, "duplicate_table")
    assert "NA" in [r.text for r in na.runs] and "NA" not in [r.text for r in clean.runs]
    assert len(dup.lines) > len(clean.lines)
    with pytest.raises(GenError):
        gen_bulletin(version, "2021-04-12", vals, "fire")
