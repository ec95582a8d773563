"""
Region hints on a crowded page
==============================

Eight small tables sit on one page with narrow gaps between them.  Left
alone, the detector merges neighbours; given one box per table it finds
them all, and dropping a box loses exactly that table.
"""

from bulletinkit.forge import gen_page_appendix_a2, grid_matches
from bulletinkit.regions import detect_tables

page, manifests, hints = gen_page_appendix_a2(0)


def matched(grids):
    return sum(any(grid_matches(g, m) for g in grids) for m in manifests)


print("without hints:", len(detect_tables(page)), "grids")
print("with all hints:", matched(detect_tables(page, hints)), "of", len(manifests))
print("missing hint 3:", matched(detect_tables(page, hints[:3] + hints[4:])), "of", len(manifests))
