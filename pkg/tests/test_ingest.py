import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bulletinkit.errors import IngestError
from bulletinkit.forge import TableConstraints, gen_table, word_runs, write_pdf
from bulletinkit.geometry import BBox, RulingLine
from bulletinkit.ingest import (
    OcrGeometry, RegionHint, load_ocr_grid, load_pdf, load_region_hints, save_region_hints,
)

from conftest import page, seeds

HEADER = "level\tpage_num\tblock_num\tpar_num\tline_num\tword_num\tleft\ttop\twidth\theight\tconf\ttext\n"


def test_blank_pdf_gives_empty_page(tmp_path):
    pages = load_pdf(write_pdf([page()], tmp_path / "blank.pdf"))
    assert len(pages) == 1
    assert pages[0].runs == () and pages[0].lines == ()


def test_twelve_words_round_trip(tmp_path):
    words = "Total Active Cases New Deaths Tests Beds Vacant ICU Doses First Second".split()
    runs = []
    for k, w in enumerate(words):
        runs += word_runs(w, 50 + 120 * (k % 4), 100 + 30 * (k // 4))
    (p,) = load_pdf(write_pdf([page(runs)], tmp_path / "w.pdf"))
    assert [r.text for r in p.runs] == words
    for got, want in zip(p.runs, runs):
        for a, b in zip(vars(got.bbox).values(), vars(want.bbox).values()):
            assert abs(a - b) <= 0.5


def test_three_pages_are_indexed_in_order(tmp_path):
    pages = load_pdf(write_pdf([page(word_runs(f"page{k}", 40, 40)) for k in range(3)], tmp_path / "3.pdf"))
    assert [p.page_index for p in pages] == [0, 1, 2]
    assert [p.runs[0].text for p in pages] == ["page0", "page1", "page2"]


@pytest.mark.parametrize("seed", seeds(12, 7))
def test_forged_tables_round_trip_within_half_point(tmp_path, seed):
    frag, _ = gen_table(seed, TableConstraints(ruled=bool(seed % 2), max_spans=2 if seed % 2 else 0))
    (p,) = load_pdf(write_pdf([frag], tmp_path / "t.pdf"))
    assert [r.text for r in p.runs] == [r.text for r in frag.runs]
    for got, want in zip(p.runs, frag.runs):
        assert max(abs(a - b) for a, b in zip(vars(got.bbox).values(), vars(want.bbox).values())) <= 0.5


def test_short_and_thick_strokes_are_not_rules(tmp_path):
    lines = [
        RulingLine("horizontal", 100, 50, 300),
        RulingLine("horizontal", 200, 50, 55),
        RulingLine("vertical", 400, 100, 300, thickness=5.0),
    ]
    (p,) = load_pdf(write_pdf([page(lines=lines)], tmp_path / "r.pdf"))
    assert len(p.lines) == 1
    (line,) = p.lines
    assert line.axis == "horizontal" and abs(line.position - 100) < 0.5


def test_encrypted_pdf_is_reported(tmp_path):
    path = write_pdf([page(word_runs("secret", 40, 40))], tmp_path / "e.pdf", encrypt_stub=True)
    with pytest.raises(IngestError) as err:
        load_pdf(path)
    assert err.value.reason == "encrypted"


def test_truncated_pdf_is_corrupt(tmp_path):
    path = write_pdf([page(word_runs("hello", 40, 40))], tmp_path / "c.pdf")
    path.write_bytes(path.read_bytes()[:40])
    with pytest.raises(IngestError) as err:
        load_pdf(path)
    assert err.value.reason == "corrupt"


def test_garbage_file_is_corrupt(tmp_path):
    path = tmp_path / "x.pdf"
    path.write_bytes(b"this is not a pdf at all")
    with pytest.raises(IngestError) as err:
        load_pdf(path)
    assert err.value.reason == "corrupt"


GEOM = OcrGeometry(width_px=1224, height_px=1584, width_pt=612, height_pt=792)


def write_grid(path, rows):
    lines = [HEADER]
    for left, top, w, h, conf, text in rows:
        level = 5 if conf >= 0 else 4
        lines.append(f"{level}\t1\t1\t1\t1\t1\t{left}\t{top}\t{w}\t{h}\t{conf}\t{text}\n")
    path.write_text("".join(lines))
    return path


def test_ocr_header_only_grid_is_empty(tmp_path):
    p = load_ocr_grid(write_grid(tmp_path / "g.tsv", []), GEOM)
    assert p.runs == () and p.source == "ocr"


def test_ocr_confidence_filter_keeps_three_of_five(tmp_path):
    rows = [(10 * k, 10, 8, 8, conf, f"w{k}") for k, conf in enumerate([95, 90, -1, 40, 88])]
    p = load_ocr_grid(write_grid(tmp_path / "g.tsv", rows), GEOM, min_conf=50)
    assert [r.text for r in p.runs] == ["w0", "w1", "w4"]
    assert all(r.confidence >= 0.5 for r in p.runs)


def test_ocr_pixel_box_scales_to_points(tmp_path):
    p = load_ocr_grid(write_grid(tmp_path / "g.tsv", [(100, 200, 50, 10, 96, "Delhi")]), GEOM)
    assert p.runs[0].bbox == BBox(50, 100, 75, 105)


def test_ocr_malformed_row_reports_line(tmp_path):
    path = tmp_path / "g.tsv"
    path.write_text(HEADER + "5\t1\t1\t1\t1\t1\t10\t10\n")
    with pytest.raises(IngestError) as err:
        load_ocr_grid(path, GEOM)
    assert err.value.reason == "bad_grid_row" and err.value.line == 2


@given(st.lists(st.integers(min_value=-1, max_value=100), max_size=20), st.integers(min_value=0, max_value=100))
def test_ocr_never_emits_runs_below_threshold(tmp_path_factory, confs, min_conf):
    path = write_grid(tmp_path_factory.mktemp("g") / "g.tsv", [(5 * k, 5, 4, 4, c, f"t{k}") for k, c in enumerate(confs)])
    p = load_ocr_grid(path, GEOM, min_conf=min_conf)
    assert len(p.runs) == sum(1 for c in confs if c >= 0 and c >= min_conf)
    assert all(r.confidence >= min_conf / 100 for r in p.runs)


def write_hints(path, boxes, page_index=0):
    with open(path, "w") as fh:
        for x0, y0, x1, y1 in boxes:
            fh.write(json.dumps({"page_index": page_index, "x0": x0, "y0": y0, "x1": x1, "y1": y1,
                                 "confidence": 0.9, "origin": "external"}) + "\n")
    return path


def test_empty_hint_file(tmp_path):
    path = tmp_path / "h.jsonl"
    path.write_text("")
    assert load_region_hints(path) == []


def test_hints_are_sorted_by_top_edge(tmp_path):
    ys = [300, 40, 500, 120, 220, 640, 80, 410]
    path = write_hints(tmp_path / "h.jsonl", [(50, y, 200, y + 30) for y in ys])
    hints = load_region_hints(path, [page()])
    assert len(hints) == 8
    assert [h.region.y0 for h in hints] == sorted(ys)


def test_hint_past_page_edge_is_clamped(tmp_path):
    path = write_hints(tmp_path / "h.jsonl", [(500, 700, 900, 1000)])
    (h,) = load_region_hints(path, [page()])
    assert h.region == BBox(500, 700, 612, 792)


def test_hint_for_missing_page_is_rejected(tmp_path):
    path = write_hints(tmp_path / "h.jsonl", [(0, 0, 10, 10)], page_index=3)
    with pytest.raises(IngestError) as err:
        load_region_hints(path, [page()])
    assert err.value.reason == "bad_hint"


def test_hints_survive_reserialization(tmp_path):
    path = write_hints(tmp_path / "h.jsonl", [(50.25, 300, 210.5, 330), (10, 40, 600, 90)])
    first = load_region_hints(path, [page()])
    again = load_region_hints(save_region_hints(first, tmp_path / "h2.jsonl"), [page()])
    assert again == first
    assert all(isinstance(h, RegionHint) for h in again)
