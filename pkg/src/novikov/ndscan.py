"""Voxel scans of restrictions to subspaces of dimension 2 or 3.

Level surfaces are handled as bands of crossing voxels (some corner above
c, some not). Pure voxels of one sign and crossing voxels are both grouped
with face connectivity. Sizes come from bounding boxes of the interpolated
edge crossings, which track the surface to second order in the step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import ndimage
from scipy.stats import qmc

from . import critical as cr
from . import tracer2d as tr
from .embedding import QuasiperiodicFunction, restrict, transverse_offsets
from .errors import ConsistencyError, ContradictionError, InputError, ResourceError

DEFAULT_STEP_UNITS = 0.05
DEFAULT_SCALE_UNITS = (2, 3, 4)
VOXEL_BUDGET = 3 * 10**7


@dataclass(frozen=True)
class BoxWindow:
    center: tuple
    half_size: float
    step: float

    def __post_init__(self):
        if not (self.half_size > 0 and self.step > 0) or self.step > self.half_size:
            raise InputError("need 0 < step <= half_size")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def m(self) -> int:
        return int(round(self.half_size / self.step))

    @property
    def dims(self) -> tuple:
        return (2 * self.m + 1,) * self.n

    def axes(self) -> list[np.ndarray]:
        offs = self.step * np.arange(-self.m, self.m + 1)
        return [c + offs for c in self.center]


@dataclass(eq=False)
class VoxelField:
    """``values[i_{n-1}, ..., i_0]``: the last array axis runs along the first local coordinate."""
    window: BoxWindow
    values: np.ndarray
    source: object = None

    @property
    def step(self) -> float:
        return self.window.step

    @property
    def origin(self) -> np.ndarray:
        return np.array([a[0] for a in self.window.axes()])

    def crop(self, half_size: float) -> "VoxelField":
        m = int(round(half_size / self.window.step))
        if m > self.window.m:
            raise InputError("crop is larger than the sampled box")
        d = self.window.m - m
        sl = tuple(slice(d, s - d) for s in self.values.shape)
        return VoxelField(BoxWindow(self.window.center, m * self.step, self.step), self.values[sl], self.source)


def sample_box(f, w: BoxWindow, budget: int = VOXEL_BUDGET) -> VoxelField:
    if w.n != f.n:
        raise InputError(f"box dimension {w.n} != subspace dimension {f.n}")
    if w.n not in (2, 3):
        raise InputError("only 2- and 3-dimensional boxes are supported")
    if int(np.prod(w.dims)) > budget:
        raise ResourceError(f"box needs {int(np.prod(w.dims))} vertices, budget is {budget}")
    return VoxelField(w, f.grid(w.axes()), f)


def grid_step_nd(f, units: float = DEFAULT_STEP_UNITS) -> float:
    return units * f.period_scale()


def default_scales_nd(f, units=DEFAULT_SCALE_UNITS) -> list[float]:
    return [u * f.period_scale() for u in units]


def _corner_views(arr: np.ndarray):
    n = arr.ndim
    for corner in product((0, 1), repeat=n):
        yield arr[tuple(slice(k, arr.shape[d] - 1 + k) for d, k in enumerate(corner))]


def pure_voxels(values: np.ndarray, c: float, sign: str) -> np.ndarray:
    if sign not in ("below", "above"):
        raise InputError(f"sign must be 'below' or 'above', got {sign!r}")
    s = values < c if sign == "below" else values > c
    out = np.ones(tuple(d - 1 for d in s.shape), dtype=bool)
    for view in _corner_views(s):
        out &= view
    return out


def crossing_voxels(values: np.ndarray, c: float) -> np.ndarray:
    above = values > c
    anyv = np.zeros(tuple(d - 1 for d in above.shape), dtype=bool)
    allv = np.ones_like(anyv)
    for view in _corner_views(above):
        anyv |= view
        allv &= view
    return anyv & ~allv


def _faces(n):
    return ndimage.generate_binary_structure(n, 1)


def _touch_sides(labels: np.ndarray, count: int):
    """Per label: touches any face, and spans between two opposite faces."""
    touches = np.zeros(count + 1, dtype=bool)
    spans = np.zeros(count + 1, dtype=bool)
    for d in range(labels.ndim):
        lo = np.zeros(count + 1, dtype=bool)
        hi = np.zeros(count + 1, dtype=bool)
        lo[np.take(labels, 0, axis=d).ravel()] = True
        hi[np.take(labels, -1, axis=d).ravel()] = True
        touches |= lo | hi
        spans |= lo & hi
    return touches[1:], spans[1:]


# --------------------------------------------------------------------------
# regions

@dataclass
class VoxelRegionComponent:
    sign: str
    voxel_count: int
    touches_boundary: bool
    bbox_diameter: float
    spans_window: bool = False


def region_components_nd(field: VoxelField, c: float, sign: str) -> list[VoxelRegionComponent]:
    """Face-connected components of voxels whose corners all lie on one side of c."""
    mask = pure_voxels(field.values, c, sign)
    labels, n = ndimage.label(mask, structure=_faces(mask.ndim))
    if n == 0:
        return []
    counts = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    touches, spans = _touch_sides(labels, n)
    out = []
    for k, sl in enumerate(ndimage.find_objects(labels)):
        ext = np.array([s.stop - s.start for s in sl]) * field.step
        out.append(VoxelRegionComponent(sign, int(counts[k]), bool(touches[k]), float(np.linalg.norm(ext)),
                                        bool(spans[k])))
    return out


def vertex_cluster_flags(field: VoxelField, c: float, sign: str) -> tuple[bool, bool]:
    """(touches_boundary, spans) of face-connected vertex clusters of {f < c} or {f > c}."""
    mask = field.values < c if sign == "below" else field.values > c
    labels, n = ndimage.label(mask, structure=_faces(mask.ndim))
    if n == 0:
        return False, False
    touches, spans = _touch_sides(labels, n)
    return bool(touches.any()), bool(spans.any())


# --------------------------------------------------------------------------
# level bands

@dataclass
class LevelBandComponent:
    voxel_count: int
    touches_boundary: bool
    spans_window: bool
    diameter: float
    kind: str
    bbox: tuple = ()        # (lo, hi) corners of the crossing-point box, local coordinates
    clearance: float = float("nan")

    @property
    def closed(self) -> bool:
        return not self.touches_boundary


def _crossing_boxes(field: VoxelField, c: float, labels: np.ndarray, n: int):
    """Per band: min and max corner of the interpolated edge crossings it contains."""
    v = field.values
    nd = v.ndim
    h = field.step
    origin = field.origin           # local coordinate order
    lo = np.full((n, nd), np.inf)
    hi = np.full((n, nd), -np.inf)
    above = v > c
    vox_max = np.array(labels.shape) - 1
    for ax in range(nd):
        a = [slice(None)] * nd
        b = [slice(None)] * nd
        a[ax], b[ax] = slice(0, -1), slice(1, None)
        cross = above[tuple(a)] != above[tuple(b)]
        idx = np.nonzero(cross)
        v0, v1 = v[tuple(a)][idx], v[tuple(b)][idx]
        t = (c - v0) / (v1 - v0)
        vox = tuple(np.minimum(idx[d], vox_max[d]) for d in range(nd))
        lab = labels[vox] - 1
        keep = lab >= 0
        # array axis ax corresponds to local coordinate nd-1-ax
        coords = np.stack([origin[nd - 1 - d] + h * (idx[d] + (t if d == ax else 0.0)) for d in range(nd)], axis=1)
        coords = coords[:, ::-1]
        for k in range(nd):
            np.minimum.at(lo[:, k], lab[keep], coords[keep, k])
            np.maximum.at(hi[:, k], lab[keep], coords[keep, k])
    return lo, hi


def _probe_kind(f, point: np.ndarray, direction: np.ndarray, c: float, h: float) -> str:
    C = f.lipschitz_bound()
    for dist in (h, 2 * h):
        val = float(f.evaluate(point + dist * direction))
        if abs(val - c) >= 0.25 * C * h:
            return "electronic" if val > c else "hole"
    return "undetermined"


def level_components_nd(field: VoxelField, c: float) -> list[LevelBandComponent]:
    """Face-connected bands of crossing voxels with size and electronic/hole kind."""
    cross = crossing_voxels(field.values, c)
    labels, n = ndimage.label(cross, structure=_faces(cross.ndim))
    if n == 0:
        return []
    nd = cross.ndim
    counts = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    touches, spans = _touch_sides(labels, n)
    lo, hi = _crossing_boxes(field, c, labels, n)
    h = field.step
    origin = field.origin
    # voxel with the largest first local coordinate (last array axis) per band
    flat = np.flatnonzero(labels)
    lab = labels.ravel()[flat] - 1
    xi = np.unravel_index(flat, labels.shape)[nd - 1]
    order = np.lexsort((xi, lab))
    last = np.r_[np.flatnonzero(np.diff(lab[order])), lab.size - 1]
    extremal = flat[order[last]]
    out = []
    x_dir = np.zeros(nd)
    x_dir[0] = 1.0
    for k in range(n):
        kind = "boundary-truncated"
        if not touches[k] and field.source is not None:
            idx = np.array(np.unravel_index(extremal[k], labels.shape))[::-1]
            center = origin + h * (idx + 0.5)
            kind = _probe_kind(field.source, center, x_dir, c, h)
        diam = float(np.linalg.norm(hi[k] - lo[k])) if np.all(np.isfinite(lo[k])) else 0.0
        out.append(LevelBandComponent(int(counts[k]), bool(touches[k]), bool(spans[k]), diam, kind,
                                      (tuple(lo[k]), tuple(hi[k]))))
    return out


def nesting_violations_nd(bands: list[LevelBandComponent]) -> list[int]:
    """Closed electronic bands not inside the box of any larger closed hole band."""
    holes = [b for b in bands if b.closed and b.kind == "hole"]
    bad = []
    for i, b in enumerate(bands):
        if not (b.closed and b.kind == "electronic"):
            continue
        lo, hi = np.array(b.bbox[0]), np.array(b.bbox[1])
        if not any(np.all(np.array(o.bbox[0]) <= lo) and np.all(hi <= np.array(o.bbox[1])) for o in holes):
            bad.append(i)
    return bad


# --------------------------------------------------------------------------
# multiscale

@dataclass
class BoxRecord:
    L: float
    n_bands: int
    n_spanning: int
    n_closed: int
    max_closed_diameter: float
    max_electronic_diameter: float
    max_hole_diameter: float
    omega_minus_touch: bool
    omega_plus_touch: bool
    omega_minus_spans: bool
    omega_plus_spans: bool


@dataclass
class BoxReport:
    c: float
    h: float
    records: list = field(default_factory=list)
    verdict: str = "undetermined"

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def analyze_box(field: VoxelField, c: float) -> BoxRecord:
    bands = level_components_nd(field, c)
    closed = [b for b in bands if b.closed]

    def top(items):
        return max((b.diameter for b in items), default=0.0)

    mt, ms = vertex_cluster_flags(field, c, "below")
    pt, ps = vertex_cluster_flags(field, c, "above")
    return BoxRecord(field.window.m * field.step, len(bands), sum(b.spans_window for b in bands), len(closed),
                     top(closed), top([b for b in closed if b.kind == "electronic"]),
                     top([b for b in closed if b.kind == "hole"]), mt, pt, ms, ps)


def multiscale_scan_nd(f, c: float, scales=None, h: float | None = None, field: VoxelField | None = None,
                       center=None) -> BoxReport:
    scales = default_scales_nd(f) if scales is None else list(scales)
    if len(scales) < 2 or any(b <= a for a, b in zip(scales, scales[1:])):
        raise InputError("need at least two strictly increasing scales")
    if field is None:
        h = grid_step_nd(f) if h is None else h
        field = sample_box(f, BoxWindow(center or (0.0,) * f.n, max(scales), h))
    h = field.step
    c_eff, _ = tr.nudge_level(field.values, c, f.lipschitz_bound(), h)
    rep = BoxReport(float(c), h)
    for L in scales:
        rep.records.append(analyze_box(field.crop(L), c_eff))
    rep.verdict = _verdict(rep)
    return rep


def _verdict(rep: BoxReport) -> str:
    recs = rep.records
    spanning = [r.n_spanning > 0 for r in recs]
    if all(spanning):
        if all(r.omega_minus_touch and r.omega_plus_touch for r in recs):
            return "open"
        raise ConsistencyError("spanning level band without boundary-touching regions of both signs")
    if any(spanning):
        return "undetermined"
    d = rep.series("max_closed_diameter")
    if d[-1] > 0 and d[-1] >= tr.GROWTH_FACTOR * d[0]:
        return "closed-growing"
    top = d[-3:]
    if top.max() == 0 or top.max() - top.min() < tr.STABILITY_TOL * top.max():
        return "closed-bounded"
    return "undetermined"


# --------------------------------------------------------------------------
# interval, situations, uniform bound

class BoxProbe:
    def __init__(self, f, scales, h):
        self.scales = list(scales)
        full = sample_box(f, BoxWindow((0.0,) * f.n, max(self.scales), h))
        self._crops = [full.crop(L) for L in self.scales]
        self._cache = {}

    def spans(self, c: float, sign: str) -> bool:
        key = (sign, float(c))
        if key not in self._cache:
            self._cache[key] = all(vertex_cluster_flags(crop, c, sign)[1] for crop in self._crops)
        return self._cache[key]


def _subspace(F, frame):
    if isinstance(F, QuasiperiodicFunction):
        return F
    if frame is None:
        raise InputError("a frame is required with a periodic function")
    return restrict(F, frame)


def estimate_interval_nd(F, frame=None, level_points: int = cr.DEFAULT_LEVEL_POINTS, shift_samples: int = 8,
                         scales=None, h: float | None = None, seed: int = 0,
                         refinements: int = 9) -> cr.CriticalIntervalEstimate:
    f = _subspace(F, frame)
    scales = default_scales_nd(f) if scales is None else list(scales)
    h = grid_step_nd(f) if h is None else h
    # a saddle between lattice points is seen with an error of H * (half-diagonal)^2 / 2
    slack = f.hessian_bound() * f.n * h * h / 8
    return cr.interval_from_probes(f, lambda g: BoxProbe(g, scales, h), scales, h, slack, level_points,
                                   shift_samples, seed, refinements)


def label_from_box_report(rep: BoxReport) -> cr.SituationLabel:
    recs = rep.records
    minus = all(r.omega_minus_spans for r in recs)
    plus = all(r.omega_plus_spans for r in recs)
    no_lines = all(r.n_spanning == 0 for r in recs)
    elec = cr._growing(rep.series("max_electronic_diameter"))
    hole = cr._growing(rep.series("max_hole_diameter"))
    if rep.verdict == "open":
        label = "A'"
    elif no_lines and plus and not minus and elec:
        label = "B'"
    elif no_lines and minus and not plus and hole:
        label = "C'"
    elif no_lines and not minus and not plus and elec and hole:
        label = "D'"
    else:
        label = "undetermined"
    return cr.SituationLabel(label, rep.verdict == "open", minus, plus, elec, hole, rep.verdict,
                             outside_interval=(label == "undetermined" and rep.verdict == "closed-bounded"))


def classify_situation_nd(f, c: float, scales=None, h: float | None = None) -> cr.SituationLabel:
    return label_from_box_report(multiscale_scan_nd(f, c, scales, h))


def situation_sweep_nd(F, frame=None, levels=(), shift_samples: int = 8, scales=None, h=None, seed=0) -> list:
    """(shift_index, c, SituationLabel) for each pair; labels carry primes so check_theorem21 must strip them."""
    f = _subspace(F, frame)
    scales = default_scales_nd(f) if scales is None else list(scales)
    h = grid_step_nd(f) if h is None else h
    out = []
    for s, off in enumerate(transverse_offsets(f.frame, shift_samples, seed)):
        g = f.shifted(off)
        fld = sample_box(g, BoxWindow((0.0,) * g.n, max(scales), h))
        for c in levels:
            out.append((s, float(c), label_from_box_report(multiscale_scan_nd(g, float(c), scales, field=fld))))
    return out


def check_theorem31(interval: cr.CriticalIntervalEstimate, labels) -> list:
    """The planar endpoint rules applied to primed labels."""
    plain = [(s, c, (lab.label if isinstance(lab, cr.SituationLabel) else lab).rstrip("'")) for s, c, lab in labels]
    return cr.check_theorem21(interval, plain)


def window_offsets(frame, count: int, seed: int = 0) -> np.ndarray:
    """Transverse offsets; for a full-dimensional frame, offsets of the box inside the space instead."""
    if frame.N > frame.n:
        return transverse_offsets(frame, count, seed)
    pts = qmc.Halton(d=frame.N, scramble=True, seed=np.random.default_rng(seed)).random(max(count - 1, 0))
    return np.vstack([np.zeros((1, frame.N)), pts])


def uniform_diameter_check_nd(F, frame=None, c: float = 0.0, shift_samples: int = 8, scales=None,
                              h: float | None = None, seed: int = 0) -> cr.DiameterBoundEstimate:
    """Largest closed band over shifts and boxes, with its stability across boxes and shifts."""
    f = _subspace(F, frame)
    scales = default_scales_nd(f) if scales is None else list(scales)
    h = grid_step_nd(f) if h is None else h
    per_scale = np.zeros(len(scales))
    per_shift = []
    for off in window_offsets(f.frame, shift_samples, seed):
        rep = multiscale_scan_nd(f.shifted(off), c, scales, h)
        if any(r.n_spanning for r in rep.records):
            raise ContradictionError(f"level {c} carries spanning level bands; it lies inside the interval")
        d = rep.series("max_closed_diameter")
        per_scale = np.maximum(per_scale, d)
        per_shift.append(float(d.max()))
    return cr.DiameterBoundEstimate(float(c), float(per_scale.max()), [float(L) for L in scales],
                                    cr._stable(per_scale), per_scale.tolist(), per_shift)
