"""Table reconstruction from drawn ruling lines."""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

from .geometry import BBox, Cell, PageModel, RulingLine, TableGrid, TextRun
from .stream import cluster_rows


@dataclass(frozen=True)
class GridSkeleton:
    xs: tuple[float, ...]
    ys: tuple[float, ...]
    # joint[k][m]: ink at the crossing of ys[k] and xs[m]
    joint: tuple[tuple[bool, ...], ...]
    # v_edges[i][m]: vertical rule at xs[m] between ys[i] and ys[i+1]
    v_edges: tuple[tuple[bool, ...], ...]
    # h_edges[k][j]: horizontal rule at ys[k] between xs[j] and xs[j+1]
    h_edges: tuple[tuple[bool, ...], ...]

    @property
    def region(self) -> BBox:
        return BBox(self.xs[0], self.ys[0], self.xs[-1], self.ys[-1])


def _cluster_positions(values: list[float], tol: float) -> list[list[float]]:
    groups: list[list[float]] = []
    for v in sorted(values):
        if groups and v - groups[-1][0] <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return groups


def merge_lines(lines: list[RulingLine], snap_tol: float = 2.0) -> list[RulingLine]:
    """Fuse collinear fragments (dashes, per-cell strokes) into long rules.

    Segments on the same axis whose positions lie within ``snap_tol`` of
    each other are collinear; collinear segments separated by a gap of at
    most ``3 * snap_tol`` become one line.
    """
    if snap_tol <= 0:
        raise ValueError("snap_tol must be positive")
    out: list[RulingLine] = []
    for axis in ("horizontal", "vertical"):
        segs = sorted((l for l in lines if l.axis == axis), key=lambda l: (l.position, l.start, l.end))
        clusters: list[list[RulingLine]] = []
        for seg in segs:
            if clusters and seg.position - clusters[-1][0].position <= snap_tol:
                clusters[-1].append(seg)
            else:
                clusters.append([seg])
        for cluster in clusters:
            cluster.sort(key=lambda l: (l.start, l.end, l.position))
            chain = [cluster[0]]
            end = cluster[0].end
            for seg in cluster[1:]:
                if seg.start - end <= 3 * snap_tol:
                    chain.append(seg)
                    end = max(end, seg.end)
                else:
                    out.append(_fuse(axis, chain))
                    chain, end = [seg], seg.end
            out.append(_fuse(axis, chain))
    out.sort(key=lambda l: (l.axis, l.position, l.start))
    return out


def _fuse(axis, chain: list[RulingLine]) -> RulingLine:
    total = sum(l.length for l in chain)
    position = sum(l.position * l.length for l in chain) / total
    return RulingLine(
        axis,
        position,
        min(l.start for l in chain),
        max(l.end for l in chain),
        max(l.thickness for l in chain),
    )


def _components(hs: list[RulingLine], vs: list[RulingLine], tol: float) -> list[tuple[list, list]]:
    lines = hs + vs
    parent = list(range(len(lines)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, h in enumerate(hs):
        for b, v in enumerate(vs, start=len(hs)):
            if h.start - tol <= v.position <= h.end + tol and v.start - tol <= h.position <= v.end + tol:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, tuple[list, list]] = {}
    for i, line in enumerate(lines):
        h_list, v_list = groups.setdefault(find(i), ([], []))
        (h_list if line.axis == "horizontal" else v_list).append(line)
    return [g for g in groups.values() if g[0] and g[1]]


def _covers(lines: list[RulingLine], position: float, lo: float, hi: float, tol: float) -> bool:
    return any(
        abs(l.position - position) <= tol and l.start <= lo + tol and l.end >= hi - tol for l in lines
    )


def build_skeletons(lines: list[RulingLine], snap_tol: float = 2.0) -> list[GridSkeleton]:
    merged = merge_lines(lines, snap_tol)
    hs = [l for l in merged if l.axis == "horizontal"]
    vs = [l for l in merged if l.axis == "vertical"]
    skeletons = []
    for h_group, v_group in _components(hs, vs, snap_tol):
        ys = [sum(g) / len(g) for g in _cluster_positions([l.position for l in h_group], snap_tol)]
        xs = [sum(g) / len(g) for g in _cluster_positions([l.position for l in v_group], snap_tol)]
        if len(xs) < 2 or len(ys) < 2:
            continue
        v_edges = tuple(
            tuple(_covers(v_group, x, ys[i], ys[i + 1], snap_tol) for x in xs) for i in range(len(ys) - 1)
        )
        h_edges = tuple(
            tuple(_covers(h_group, y, xs[j], xs[j + 1], snap_tol) for j in range(len(xs) - 1)) for y in ys
        )
        joint = tuple(
            tuple(
                any(abs(h.position - y) <= snap_tol and h.start - snap_tol <= x <= h.end + snap_tol for h in h_group)
                and any(abs(v.position - x) <= snap_tol and v.start - snap_tol <= y <= v.end + snap_tol for v in v_group)
                for x in xs
            )
            for y in ys
        )
        skeletons.append(GridSkeleton(tuple(xs), tuple(ys), joint, v_edges, h_edges))
    skeletons.sort(key=lambda s: (s.ys[0], s.xs[0]))
    return skeletons


def _merge_cells(sk: GridSkeleton) -> list[tuple[int, int, int, int]]:
    """Group elementary rectangles separated by missing rules into
    rectangular cells, returned as (row, col, row_span, col_span)."""
    n_rows, n_cols = len(sk.ys) - 1, len(sk.xs) - 1
    parent = {(i, j): (i, j) for i in range(n_rows) for j in range(n_cols)}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for i in range(n_rows):
        for j in range(n_cols):
            if j + 1 < n_cols and not sk.v_edges[i][j + 1]:
                union((i, j), (i, j + 1))
            if i + 1 < n_rows and not sk.h_edges[i + 1][j]:
                union((i, j), (i + 1, j))

    # a non-rectangular group swallows whatever sits inside its bounding box
    changed = True
    while changed:
        changed = False
        groups: dict[tuple, list] = {}
        for p in parent:
            groups.setdefault(find(p), []).append(p)
        for members in groups.values():
            r0, r1 = min(p[0] for p in members), max(p[0] for p in members)
            c0, c1 = min(p[1] for p in members), max(p[1] for p in members)
            if len(members) == (r1 - r0 + 1) * (c1 - c0 + 1):
                continue
            for i in range(r0, r1 + 1):
                for j in range(c0, c1 + 1):
                    if find((i, j)) != find(members[0]):
                        union((i, j), members[0])
                        changed = True
            if changed:
                break

    groups = {}
    for p in parent:
        groups.setdefault(find(p), []).append(p)
    rects = []
    for members in groups.values():
        r0, c0 = min(p[0] for p in members), min(p[1] for p in members)
        r1, c1 = max(p[0] for p in members), max(p[1] for p in members)
        rects.append((r0, c0, r1 - r0 + 1, c1 - c0 + 1))
    return sorted(rects)


def _cell_text(runs: list[TextRun]) -> str:
    return " ".join(" ".join(r.text for r in band.runs) for band in cluster_rows(runs))


def grid_from_skeleton(sk: GridSkeleton, runs: list[TextRun], page_index: int = 0) -> TableGrid:
    n_rows, n_cols = len(sk.ys) - 1, len(sk.xs) - 1
    rects = _merge_cells(sk)
    owner = {}
    for rect in rects:
        r0, c0, rs, cs = rect
        for i in range(r0, r0 + rs):
            for j in range(c0, c0 + cs):
                owner[(i, j)] = rect
    members: dict[tuple, list[TextRun]] = {rect: [] for rect in rects}
    region = sk.region
    for run in runs:
        cx, cy = run.bbox.center
        if not region.contains_point(cx, cy):
            continue
        # a center lying exactly on a rule goes to the left / upper cell
        j = min(max(bisect_left(sk.xs, cx) - 1, 0), n_cols - 1)
        i = min(max(bisect_left(sk.ys, cy) - 1, 0), n_rows - 1)
        members[owner[(i, j)]].append(run)
    cells = [
        Cell(r0, c0, rs, cs, _cell_text(members[(r0, c0, rs, cs)]), tuple(members[(r0, c0, rs, cs)]))
        for (r0, c0, rs, cs) in rects
    ]
    return TableGrid(region, n_rows, n_cols, cells, "lattice", page_index=page_index)


def detect_lattice(page: PageModel, snap_tol: float = 2.0, region: BBox | None = None) -> list[TableGrid]:
    """Tables bounded by ruling lines, one grid per connected rule network.

    With ``region`` only rules intersecting it and runs centered in it are
    considered.
    """
    lines = list(page.lines)
    runs = list(page.runs)
    if region is not None:
        lines = [l for l in lines if l.bbox.intersection(region) is not None]
        runs = [r for r in runs if region.contains_point(*r.bbox.center)]
    grids = []
    for sk in build_skeletons(lines, snap_tol):
        if len(sk.xs) < 3 or len(sk.ys) < 3:
            continue
        grids.append(grid_from_skeleton(sk, runs, page.page_index))
    grids.sort(key=lambda g: (g.region.y0, g.region.x0))
    return grids
