"""Level lines and sub/superlevel regions of a planar function on square windows.

Level lines come from marching squares with linear edge interpolation; the
ambiguous saddle cells are resolved by the exact value of f at the cell
center. Components of the crossing-edge graph are labelled with
``scipy.sparse.csgraph`` so large windows never need a Python-level walk
unless ordered polylines are requested.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

from .errors import ConsistencyError, InputError, ResourceError, UndeterminedError

#: scale schedule in units of the period scale
DEFAULT_SCALE_UNITS = (8, 16, 32, 64)
#: grid step in units of the period scale
DEFAULT_STEP_UNITS = 0.02
VERTEX_BUDGET = 5 * 10**7

NUDGE_TRIGGER = 1e-3
NUDGE_STEP = 2e-3

GROWTH_FACTOR = 1.5
STABILITY_TOL = 0.10

_N_DIRECTIONS = 32


# --------------------------------------------------------------------------
# windows and sampled fields

@dataclass(frozen=True)
class Window:
    center: tuple[float, float]
    half_size: float
    step: float

    def __post_init__(self):
        if not (self.half_size > 0 and self.step > 0):
            raise InputError("window half size and step must be positive")
        if self.step > self.half_size:
            raise InputError("grid step must not exceed the window half size")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @property
    def m(self) -> int:
        """Vertices on each side of the center along an axis."""
        return int(round(self.half_size / self.step))

    @property
    def shape(self) -> tuple[int, int]:
        return (2 * self.m + 1, 2 * self.m + 1)

    @property
    def vertex_count(self) -> int:
        return (2 * self.m + 1) ** 2

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        offs = self.step * np.arange(-self.m, self.m + 1)
        return self.center[0] + offs, self.center[1] + offs

    @property
    def extent(self) -> tuple[float, float, float, float]:
        r = self.m * self.step
        return (self.center[0] - r, self.center[1] - r, self.center[0] + r, self.center[1] + r)


@dataclass(eq=False)
class ScalarField:
    """Samples ``values[j, i] = f(xs[i], ys[j])`` on a window."""
    window: Window
    values: np.ndarray
    source: object = None

    @property
    def axes(self):
        return self.window.axes()

    @property
    def step(self) -> float:
        return self.window.step

    def crop(self, half_size: float) -> "ScalarField":
        """Centered sub-window on the same lattice."""
        m = int(round(half_size / self.window.step))
        if m > self.window.m:
            raise InputError("crop is larger than the sampled window")
        d = self.window.m - m
        sub = self.values[d:self.values.shape[0] - d, d:self.values.shape[1] - d]
        return ScalarField(Window(self.window.center, m * self.window.step, self.window.step), sub, self.source)


def grid_step(f, tol_c: float | None = None, units: float = DEFAULT_STEP_UNITS) -> float:
    """h = min(units * period_scale, tol_c / C)."""
    h = units * f.period_scale()
    C = f.lipschitz_bound()
    if tol_c is not None and C > 0:
        h = min(h, tol_c / C)
    return h


def sample_grid(f, w: Window, budget: int = VERTEX_BUDGET) -> ScalarField:
    """Exact evaluation of f at every vertex of the window."""
    if w.vertex_count > budget:
        raise ResourceError(f"window needs {w.vertex_count} vertices, budget is {budget}")
    xs, ys = w.axes()
    if hasattr(f, "grid"):
        values = f.grid([xs, ys])
    else:
        X, Y = np.meshgrid(xs, ys)
        values = np.asarray(f.evaluate(np.stack([X, Y], axis=-1)), dtype=float)
    return ScalarField(w, values, f)


def nudge_level(values: np.ndarray, c: float, C: float, h: float) -> tuple[float, bool]:
    """One step of 2e-3 C h upward when some vertex has |f - c| < 1e-3 C h.

    A single step suffices: afterwards no vertex equals the level exactly
    unless the field happens to take that value, and the sign test f > c
    treats ties consistently in every cell.
    """
    if C <= 0 or not np.any(np.abs(values - c) < NUDGE_TRIGGER * C * h):
        return float(c), False
    return float(c) + NUDGE_STEP * C * h, True


def _lipschitz(field: ScalarField) -> float:
    src = field.source
    return float(src.lipschitz_bound()) if src is not None and hasattr(src, "lipschitz_bound") else 0.0


def _cell_centers(field: ScalarField, j: np.ndarray, i: np.ndarray) -> np.ndarray:
    xs, ys = field.axes
    h = field.step
    pts = np.stack([xs[i] + 0.5 * h, ys[j] + 0.5 * h], axis=-1)
    if field.source is None:
        # bilinear fallback when no exact function is attached
        v = field.values
        return 0.25 * (v[j, i] + v[j, i + 1] + v[j + 1, i] + v[j + 1, i + 1])
    return np.asarray(field.source.evaluate(pts), dtype=float).reshape(-1)


# --------------------------------------------------------------------------
# crossing-edge graph

SIDES = ("left", "right", "bottom", "top")


@dataclass(eq=False)
class LevelGraph:
    """Marching-squares output before polylines are ordered.

    Nodes are crossing edges: horizontal ones first (ids 0..n_h-1), then
    vertical ones. ``links`` pairs nodes joined inside a cell.
    """
    level: float
    xy: np.ndarray
    is_horizontal: np.ndarray
    edge_j: np.ndarray
    edge_i: np.ndarray
    links: np.ndarray
    labels: np.ndarray
    n_components: int
    side: np.ndarray          # per node: -1 interior, else index into SIDES
    saddle_cells: tuple       # (j, i, center_above) of four-crossing cells

    @property
    def n_nodes(self) -> int:
        return self.xy.shape[0]

    def degree(self) -> np.ndarray:
        return np.bincount(self.links.ravel(), minlength=self.n_nodes)


def level_graph(field: ScalarField, c: float) -> LevelGraph:
    v = field.values
    above = v > c
    ny, nx = v.shape
    xs, ys = field.axes
    h = field.step

    hcross = above[:, 1:] != above[:, :-1]
    vcross = above[1:, :] != above[:-1, :]
    jh, ih = np.nonzero(hcross)
    jv, iv = np.nonzero(vcross)
    n_h, n_v = jh.size, jv.size
    hid = np.full(hcross.shape, -1, dtype=np.int64)
    hid[jh, ih] = np.arange(n_h)
    vid = np.full(vcross.shape, -1, dtype=np.int64)
    vid[jv, iv] = n_h + np.arange(n_v)

    th = (c - v[jh, ih]) / (v[jh, ih + 1] - v[jh, ih])
    tv = (c - v[jv, iv]) / (v[jv + 1, iv] - v[jv, iv])
    xy = np.empty((n_h + n_v, 2))
    xy[:n_h, 0] = xs[ih] + th * h
    xy[:n_h, 1] = ys[jh]
    xy[n_h:, 0] = xs[iv]
    xy[n_h:, 1] = ys[jv] + tv * h

    ncross = (hcross[:-1, :].astype(np.int8) + hcross[1:, :] + vcross[:, :-1] + vcross[:, 1:])
    links = []
    j2, i2 = np.nonzero(ncross == 2)
    if j2.size:
        ids = np.stack([hid[j2, i2], hid[j2 + 1, i2], vid[j2, i2], vid[j2, i2 + 1]], axis=1)
        ids.sort(axis=1)
        links.append(ids[:, 2:])
    j4, i4 = np.nonzero(ncross == 4)
    center_above = np.zeros(0, dtype=bool)
    if j4.size:
        center_above = _cell_centers(field, j4, i4) > c
        bottom, top = hid[j4, i4], hid[j4 + 1, i4]
        left, right = vid[j4, i4], vid[j4, i4 + 1]
        joined = center_above == above[j4, i4]   # bottom-left and top-right corners connect
        a = np.where(joined, right, left)
        b = np.where(joined, left, right)
        links.append(np.stack([bottom, a], axis=1))
        links.append(np.stack([b, top], axis=1))
    links = np.concatenate(links) if links else np.zeros((0, 2), dtype=np.int64)

    P = n_h + n_v
    if P:
        g = coo_matrix((np.ones(links.shape[0], dtype=np.int8), (links[:, 0], links[:, 1])), shape=(P, P))
        ncomp, labels = connected_components(g, directed=False)
    else:
        ncomp, labels = 0, np.zeros(0, dtype=np.int64)

    side = np.full(P, -1, dtype=np.int8)
    side[:n_h][jh == 0] = 2
    side[:n_h][jh == ny - 1] = 3
    side[n_h:][iv == 0] = 0
    side[n_h:][iv == nx - 1] = 1

    return LevelGraph(float(c), xy, np.r_[np.ones(n_h, bool), np.zeros(n_v, bool)],
                      np.r_[jh, jv], np.r_[ih, iv], links, labels.astype(np.int64), int(ncomp), side,
                      (j4, i4, center_above))


# --------------------------------------------------------------------------
# per-component statistics

def point_set_diameter(pts: np.ndarray) -> float:
    """Exact maximum pairwise distance."""
    pts = np.asarray(pts, dtype=float)
    if pts.shape[0] < 2:
        return 0.0
    if pts.shape[0] > 64:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except Exception:
            # collinear input: the extremes along the principal axis realize the diameter
            d = pts - pts.mean(axis=0)
            axis = np.linalg.svd(d, full_matrices=False)[2][0]
            p = d @ axis
            return float(np.linalg.norm(pts[np.argmax(p)] - pts[np.argmin(p)]))
    return float(pdist(pts).max())


@dataclass(eq=False)
class ComponentTable:
    """Columnar per-component summary of a LevelGraph."""
    sides: np.ndarray            # (ncomp, 4) bool
    size: np.ndarray
    kind: np.ndarray             # 1 electronic, -1 hole, 0 not closed
    diam_lo: np.ndarray
    diam_hi: np.ndarray
    order: np.ndarray            # node ids sorted by component
    starts: np.ndarray

    @property
    def touches(self) -> np.ndarray:
        return self.sides.any(axis=1)

    @property
    def closed(self) -> np.ndarray:
        return ~self.touches

    @property
    def spans(self) -> np.ndarray:
        s = self.sides
        return (s[:, 0] & s[:, 1]) | (s[:, 2] & s[:, 3])


def component_table(graph: LevelGraph, field: ScalarField) -> ComponentTable:
    nc = graph.n_components
    lab = graph.labels
    order = np.lexsort((graph.xy[:, 0], lab))
    lab_s = lab[order]
    starts = np.r_[0, np.flatnonzero(np.diff(lab_s)) + 1] if lab.size else np.zeros(0, dtype=np.int64)
    ends = np.r_[starts[1:], lab.size]
    size = ends - starts

    sides = np.zeros((nc, 4), dtype=bool)
    on = graph.side >= 0
    sides[lab[on], graph.side[on]] = True

    # The max-x vertex of a closed curve sits on a horizontal edge (a vertical
    # crossing always has a neighbour strictly to its right); the edge's right
    # endpoint lies outside the curve and carries the outer sign.
    kind = np.zeros(nc, dtype=np.int8)
    closed = ~sides.any(axis=1)
    if nc:
        last = order[ends - 1][closed]
        outer = field.values[graph.edge_j[last], graph.edge_i[last] + 1] > graph.level
        kind[closed] = np.where(outer, 1, -1)

    lo = np.zeros(nc)
    if nc:
        xs_s, ys_s = graph.xy[order, 0], graph.xy[order, 1]
        for th in np.pi * np.arange(_N_DIRECTIONS) / _N_DIRECTIONS:
            proj = math.cos(th) * xs_s + math.sin(th) * ys_s
            lo = np.maximum(lo, np.maximum.reduceat(proj, starts) - np.minimum.reduceat(proj, starts))
    hi = lo / math.cos(math.pi / (2 * _N_DIRECTIONS))
    return ComponentTable(sides, size, kind, lo, hi, order, starts)


def _max_diameter(table: ComponentTable, graph: LevelGraph, mask: np.ndarray, cap: int = 16) -> float:
    """Maximum diameter over the masked components, exact up to ``cap`` hull evaluations."""
    idx = np.flatnonzero(mask)
    if not idx.size:
        return 0.0
    best_lo = table.diam_lo[idx].max()
    cand = idx[table.diam_hi[idx] >= best_lo]
    cand = cand[np.argsort(-table.diam_hi[cand], kind="stable")]
    exact, truncated = 0.0, False
    for n_done, comp in enumerate(cand):
        if n_done >= cap:
            truncated = True
            break
        if table.diam_hi[comp] <= exact:
            break
        s = table.starts[comp]
        exact = max(exact, point_set_diameter(graph.xy[table.order[s:s + table.size[comp]]]))
    return max(exact, best_lo) if truncated else exact


# --------------------------------------------------------------------------
# level components with ordered polylines

KINDS = {1: "electronic", -1: "hole", 0: "boundary-truncated"}


@dataclass(eq=False)
class LevelComponent:
    polyline: np.ndarray
    closed: bool
    touches_boundary: bool
    kind: str
    diameter: float
    spans_window: bool
    level: float = float("nan")
    sides: tuple = ()

    @property
    def vertex_count(self) -> int:
        return self.polyline.shape[0]


def _neighbours(graph: LevelGraph) -> np.ndarray:
    P = graph.n_nodes
    nbr = np.full((P, 2), -1, dtype=np.int64)
    if not graph.links.size:
        return nbr
    src = np.r_[graph.links[:, 0], graph.links[:, 1]]
    dst = np.r_[graph.links[:, 1], graph.links[:, 0]]
    o = np.argsort(src, kind="stable")
    src, dst = src[o], dst[o]
    first = np.r_[True, src[1:] != src[:-1]]
    nbr[src[first], 0] = dst[first]
    nbr[src[~first], 1] = dst[~first]
    return nbr


def _walk(nbr: np.ndarray, start: int) -> list[int]:
    path = [start]
    prev, cur = -1, start
    while True:
        a, b = nbr[cur]
        nxt = a if a != prev else b
        if nxt < 0 or nxt == start:
            return path
        path.append(int(nxt))
        prev, cur = cur, nxt


def extract_level_components(field: ScalarField, c: float, nudge: bool = True) -> list[LevelComponent]:
    """Connected components of {f = c} on the window, as ordered polylines."""
    c_eff = nudge_level(field.values, c, _lipschitz(field), field.step)[0] if nudge else float(c)
    graph = level_graph(field, c_eff)
    return components_from_graph(graph, field)


def components_from_graph(graph: LevelGraph, field: ScalarField) -> list[LevelComponent]:
    table = component_table(graph, field)
    nbr = _neighbours(graph)
    deg = (nbr >= 0).sum(axis=1)
    spans = table.spans
    out = []
    for comp in range(graph.n_components):
        s = table.starts[comp]
        nodes = table.order[s:s + table.size[comp]]
        closed = bool(table.closed[comp])
        if closed:
            start = int(nodes.min())
        else:
            ends = nodes[deg[nodes] == 1]
            start = int(ends.min())
        path = _walk(nbr, start)
        pts = graph.xy[path]
        if closed:
            pts = np.vstack([pts, pts[:1]])
        out.append(LevelComponent(
            polyline=pts, closed=closed, touches_boundary=not closed,
            kind=KINDS[int(table.kind[comp])], diameter=point_set_diameter(pts),
            spans_window=bool(spans[comp]), level=graph.level,
            sides=tuple(SIDES[k] for k in range(4) if table.sides[comp, k])))
    return out


def signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1]))


def classify_component(f, comp: LevelComponent, c: float, h: float) -> str:
    """Electronic if f > c just outside the curve, hole if f < c there.

    The probe sits h/2 along the outward normal at the vertex of maximal x;
    an ambiguous probe is retried once at distance h.
    """
    if not comp.closed:
        raise InputError("only closed components have a kind")
    poly = comp.polyline[:-1]
    k = int(np.argmax(poly[:, 0]))
    tangent = poly[(k + 1) % len(poly)] - poly[k - 1]
    if signed_area(comp.polyline) < 0:
        tangent = -tangent
    normal = np.array([tangent[1], -tangent[0]])
    nn = np.linalg.norm(normal)
    normal = normal / nn if nn > 0 else np.array([1.0, 0.0])
    C = f.lipschitz_bound()
    for dist in (0.5 * h, h):
        val = float(f.evaluate(poly[k] + dist * normal))
        if abs(val - c) >= 0.25 * C * h:
            return "electronic" if val > c else "hole"
    raise UndeterminedError(f"probe value {val:.6g} too close to level {c:.6g}")


def point_in_polygon(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd rule; ``poly`` closed (first vertex repeated)."""
    pts = np.atleast_2d(pts)
    x, y = pts[:, 0:1], pts[:, 1:2]
    x0, y0 = poly[:-1, 0], poly[:-1, 1]
    x1, y1 = poly[1:, 0], poly[1:, 1]
    crosses = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return np.count_nonzero(crosses & (x < xint), axis=1) % 2 == 1


def nesting_violations(components: list[LevelComponent], window: Window, margin: float) -> list[int]:
    """Electronic loops that are neither inside a hole loop nor within ``margin`` of the window edge.

    Only meaningful when both kinds are present and nothing spans.
    """
    holes = [c for c in components if c.kind == "hole"]
    x0, y0, x1, y1 = window.extent
    bad = []
    for idx, comp in enumerate(components):
        if comp.kind != "electronic":
            continue
        lo, hi = comp.polyline.min(axis=0), comp.polyline.max(axis=0)
        if lo[0] - x0 < margin or lo[1] - y0 < margin or x1 - hi[0] < margin or y1 - hi[1] < margin:
            continue
        corners = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [lo[0], hi[1]], [hi[0], hi[1]]])
        if not any(point_in_polygon(corners, hole.polyline).all() for hole in holes if hole.diameter > comp.diameter):
            bad.append(idx)
    return bad


# --------------------------------------------------------------------------
# regions built from pure cells

@dataclass(eq=False)
class RegionComponent:
    sign: str
    cell_count: int
    touches_boundary: bool
    bbox: tuple[float, float, float, float]
    spans_window: bool = False

    @property
    def diameter(self) -> float:
        x0, y0, x1, y1 = self.bbox
        return math.hypot(x1 - x0, y1 - y0)


def label_runs(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected labelling of a 2-d mask via row runs and a run adjacency graph.

    Labels start at 1, background is 0. Component numbering follows the
    row-major position of each component's first cell.
    """
    mask = np.asarray(mask, dtype=bool)
    ny, nx = mask.shape
    d = np.diff(np.pad(mask.astype(np.int8), ((0, 0), (1, 1))), axis=1)
    rs, cs = np.nonzero(d == 1)
    _, ce = np.nonzero(d == -1)
    nr = rs.size
    labels = np.zeros(mask.shape, dtype=np.int64)
    if nr == 0:
        return labels, 0
    skey = rs * (nx + 1) + cs
    ekey = rs * (nx + 1) + ce
    # runs of row r-1 overlapping run q of row r form a contiguous index range
    lo = np.searchsorted(ekey, (rs - 1) * (nx + 1) + cs, side="right")
    hi = np.searchsorted(skey, (rs - 1) * (nx + 1) + ce, side="left")
    cnt = np.clip(hi - lo, 0, None)
    q = np.repeat(np.arange(nr), cnt)
    offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    p = np.repeat(lo, cnt) + offs
    g = coo_matrix((np.ones(q.size, dtype=np.int8), (q, p)), shape=(nr, nr))
    _, run_lab = connected_components(g, directed=False)
    # renumber by first appearance
    _, first = np.unique(run_lab, return_index=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(np.argsort(first))] = np.arange(first.size)
    run_lab = rank[run_lab] + 1
    lengths = ce - cs
    flat = np.repeat(rs * nx + cs - np.cumsum(lengths) + lengths, lengths) + np.arange(lengths.sum())
    labels.ravel()[flat] = np.repeat(run_lab, lengths)
    return labels, int(first.size)


def pure_cells(values: np.ndarray, c: float, sign: str) -> np.ndarray:
    if sign == "below":
        s = values < c
    elif sign == "above":
        s = values > c
    else:
        raise InputError(f"sign must be 'below' or 'above', got {sign!r}")
    return s[:-1, :-1] & s[1:, :-1] & s[:-1, 1:] & s[1:, 1:]


def _label_stats(labels: np.ndarray, n: int):
    flat = labels.ravel()
    on = np.flatnonzero(flat)
    lab = flat[on] - 1
    jj, ii = np.divmod(on, labels.shape[1])
    count = np.bincount(lab, minlength=n)
    jmin = np.full(n, np.iinfo(np.int64).max)
    imin = jmin.copy()
    jmax = np.full(n, -1)
    imax = jmax.copy()
    np.minimum.at(jmin, lab, jj)
    np.minimum.at(imin, lab, ii)
    np.maximum.at(jmax, lab, jj)
    np.maximum.at(imax, lab, ii)
    return count, jmin, jmax, imin, imax


def region_components(field: ScalarField, c: float, sign: str) -> list[RegionComponent]:
    """4-connected components of cells whose four corners all lie on one side of c."""
    cells = pure_cells(field.values, c, sign)
    labels, n = label_runs(cells)
    if n == 0:
        return []
    count, jmin, jmax, imin, imax = _label_stats(labels, n)
    ny, nx = cells.shape
    xs, ys = field.axes
    h = field.step
    out = []
    for k in range(n):
        left, right = imin[k] == 0, imax[k] == nx - 1
        bottom, top = jmin[k] == 0, jmax[k] == ny - 1
        out.append(RegionComponent(
            sign=sign, cell_count=int(count[k]), touches_boundary=bool(left or right or bottom or top),
            bbox=(float(xs[imin[k]]), float(ys[jmin[k]]), float(xs[imax[k]] + h), float(ys[jmax[k]] + h)),
            spans_window=bool((left and right) or (bottom and top))))
    return out


# --------------------------------------------------------------------------
# vertex clusters matching the marching-squares topology

def _border_labels(lab: np.ndarray):
    return lab[:, 0], lab[:, -1], lab[0, :], lab[-1, :]


def sign_cluster_flags(field: ScalarField, c: float, sign: str, saddles=None) -> tuple[bool, bool]:
    """(touches_boundary, spans) for {f < c} or {f > c} as seen by marching squares.

    Vertices of one sign are 4-connected; diagonal corners of a saddle cell
    are joined when the cell center has their sign.
    """
    v = field.values
    mask = v < c if sign == "below" else v > c
    lab, n = ndimage.label(mask)
    if n == 0:
        return False, False
    if saddles is None:
        saddles = _saddle_cells(field, c)
    j, i, center_above = saddles
    if j.size:
        bl_in = mask[j, i]
        center_in = center_above if sign == "above" else ~center_above
        join = center_in & bl_in
        a = np.r_[lab[j[join], i[join]], lab[j[center_in & ~bl_in], i[center_in & ~bl_in] + 1]]
        b = np.r_[lab[j[join] + 1, i[join] + 1], lab[j[center_in & ~bl_in] + 1, i[center_in & ~bl_in]]]
        g = coo_matrix((np.ones(a.size, dtype=np.int8), (a, b)), shape=(n + 1, n + 1))
        _, root = connected_components(g, directed=False)
    else:
        root = np.arange(n + 1)
    left, right, bottom, top = (np.unique(root[s[s > 0]]) for s in _border_labels(lab))
    touches = bool(left.size or right.size or bottom.size or top.size)
    spans = bool(np.intersect1d(left, right).size or np.intersect1d(bottom, top).size)
    return touches, spans


def _saddle_cells(field: ScalarField, c: float):
    above = field.values > c
    bl, br, tl, tr = above[:-1, :-1], above[:-1, 1:], above[1:, :-1], above[1:, 1:]
    j, i = np.nonzero((bl == tr) & (br == tl) & (bl != br))
    return j, i, _cell_centers(field, j, i) > c


# --------------------------------------------------------------------------
# multiscale reports

@dataclass
class ScaleRecord:
    L: float
    n_components: int
    n_spanning: int
    n_closed: int
    n_electronic: int
    n_hole: int
    max_closed_diameter: float
    max_diameter: float
    max_electronic_diameter: float
    max_hole_diameter: float
    omega_minus_touch: bool
    omega_plus_touch: bool
    omega_minus_spans: bool
    omega_plus_spans: bool


@dataclass
class ScaleReport:
    c: float
    c_eff: float
    nudged: bool
    h: float
    records: list[ScaleRecord] = field(default_factory=list)
    verdict: str = "undetermined"
    error: str | None = None

    @property
    def scales(self) -> list[float]:
        return [r.L for r in self.records]

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def analyze_window(field: ScalarField, c_eff: float) -> ScaleRecord:
    graph = level_graph(field, c_eff)
    table = component_table(graph, field)
    closed = table.closed
    spans = table.spans
    saddles = graph.saddle_cells
    mt, ms = sign_cluster_flags(field, c_eff, "below", saddles)
    pt, ps = sign_cluster_flags(field, c_eff, "above", saddles)
    return ScaleRecord(
        L=field.window.m * field.step,
        n_components=graph.n_components,
        n_spanning=int(spans.sum()),
        n_closed=int(closed.sum()),
        n_electronic=int((table.kind == 1).sum()),
        n_hole=int((table.kind == -1).sum()),
        max_closed_diameter=_max_diameter(table, graph, closed),
        max_diameter=_max_diameter(table, graph, ~spans),
        max_electronic_diameter=_max_diameter(table, graph, table.kind == 1),
        max_hole_diameter=_max_diameter(table, graph, table.kind == -1),
        omega_minus_touch=mt, omega_plus_touch=pt, omega_minus_spans=ms, omega_plus_spans=ps)


def default_scales(f, units=DEFAULT_SCALE_UNITS) -> list[float]:
    p = f.period_scale()
    return [u * p for u in units]


def sample_for_scales(f, scales, h: float, center=(0.0, 0.0), budget: int = VERTEX_BUDGET) -> ScalarField:
    return sample_grid(f, Window(center, max(scales), h), budget)


def multiscale_trace(f, c: float, scales=None, h: float | None = None, field: ScalarField | None = None,
                     center=(0.0, 0.0), budget: int = VERTEX_BUDGET, check: bool = True) -> ScaleReport:
    """Trace level c on nested windows of half sizes ``scales`` and render a verdict.

    ``field`` may carry a pre-sampled window at least as large as the largest
    scale (same lattice); the level nudge is decided on it once.
    """
    scales = list(default_scales(f) if scales is None else scales)
    if len(scales) < 3 or any(b <= a for a, b in zip(scales, scales[1:])):
        raise InputError("need at least three strictly increasing scales")
    if field is None:
        h = grid_step(f) if h is None else h
        try:
            field = sample_for_scales(f, scales, h, center, budget)
        except ResourceError as exc:
            report = ScaleReport(c, c, False, h, error=str(exc))
            raise ResourceError(str(exc), report) from exc
    h = field.step
    c_eff, nudged = nudge_level(field.values, c, f.lipschitz_bound(), h)
    report = ScaleReport(float(c), c_eff, nudged, h)
    for L in scales:
        report.records.append(analyze_window(field.crop(L), c_eff))
    report.verdict = open_line_verdict(report) if check else _verdict(report)
    return report


def _verdict(report: ScaleReport) -> str:
    recs = report.records
    spanning = [r.n_spanning > 0 for r in recs]
    if all(spanning):
        if all(r.omega_minus_touch and r.omega_plus_touch for r in recs):
            return "open"
        return "inconsistent"
    if any(spanning):
        return "undetermined"
    d = np.array([r.max_closed_diameter for r in recs])
    if d[-1] >= GROWTH_FACTOR * d[0] and d[-1] > 0:
        return "closed-growing"
    top = d[-3:]
    if top.max() == 0 or (top.max() - top.min()) < STABILITY_TOL * top.max():
        return "closed-bounded"
    return "undetermined"


def open_line_verdict(report: ScaleReport) -> str:
    """open / closed-growing / closed-bounded / undetermined from a multiscale report.

    Raises ConsistencyError when a level line spans every window but one of
    the sign regions never reaches the boundary.
    """
    if len(report.records) < 3:
        raise InputError("need records for at least three scales")
    v = _verdict(report)
    if v == "inconsistent":
        raise ConsistencyError(f"spanning level line at c={report.c_eff:.6g} without boundary-touching regions of both signs")
    return v


def with_verdict(report: ScaleReport) -> ScaleReport:
    return replace(report, verdict=open_line_verdict(report))
