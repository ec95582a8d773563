"""
Recovering tables from text positions and drawn rules
=====================================================

Generate one unruled and one ruled table, detect them, and compare the
result with what the generator says it drew.
"""

from bulletinkit.forge import TableConstraints, gen_table, grid_matches
from bulletinkit.lattice import detect_lattice
from bulletinkit.stream import detect_stream

# An unruled table: columns are separated only by whitespace gutters.
page, manifest = gen_table(7, TableConstraints(rows=5, cols=4, min_gutter=8))
(grid,) = detect_stream(page)
print(f"stream: {grid.n_rows} x {grid.n_cols}, matches manifest: {grid_matches(grid, manifest)}")
for row in grid.to_matrix():
    print("  ", row)

# A ruled table with merged cells.  Missing interior rules become spans.
page, manifest = gen_table(3, TableConstraints(ruled=True, rows=4, cols=4, max_spans=2))
(grid,) = detect_lattice(page)
print(f"lattice: {grid.n_rows} x {grid.n_cols}, spans {manifest.spans}")
print("matches manifest:", grid_matches(grid, manifest))
