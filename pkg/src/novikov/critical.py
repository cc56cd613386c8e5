"""Critical levels of a plane direction and the four-way situation classifier.

The interval estimator works with two monotone percolation tests on the
sampled plane: ``below(c)`` asks whether {f < c} crosses every window of
the schedule, ``above(c)`` the same for {f > c}. The first switches on at
the lower critical level and the second switches off at the upper one, so
each threshold can be bisected independently per shift and the shifts are
combined with min/max, which does not depend on evaluation order.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .embedding import EmbeddingFrame, QuasiperiodicFunction, restrict, transverse_offsets
from .errors import ContradictionError, InputError, ResourceError
from .potential import PeriodicFunction, range_estimate
from . import tracer2d as tr

DEFAULT_SHIFTS = 16
DEFAULT_LEVEL_POINTS = 9
DEFAULT_REFINEMENTS = 11
THEOREM22_PASS_FRACTION = 0.95


def _plane(F, frame):
    if isinstance(F, QuasiperiodicFunction):
        return F
    if frame is None:
        raise InputError("a frame is required with a periodic function")
    return restrict(F, frame)


def discretization_slack(f, h: float) -> float:
    """Level error of the saddle decider: curvature times squared half-diagonal."""
    return f.hessian_bound() * h * h / 4.0


# --------------------------------------------------------------------------
# percolation tests on a cached field

class PlaneProbe:
    """One sampled plane with the scale schedule, answering percolation queries."""

    def __init__(self, f, scales, h, budget=tr.VERTEX_BUDGET):
        self.f = f
        self.scales = list(scales)
        self.field = tr.sample_for_scales(f, self.scales, h, budget=budget)
        self._crops = [self.field.crop(L) for L in self.scales]
        self._cache: dict[tuple[str, float], bool] = {}

    def spans(self, c: float, sign: str) -> bool:
        key = (sign, float(c))
        if key not in self._cache:
            ok = True
            for crop in self._crops:
                if not tr.sign_cluster_flags(crop, c, sign)[1]:
                    ok = False
                    break
            self._cache[key] = ok
        return self._cache[key]

    def trace(self, c: float) -> tr.ScaleReport:
        return tr.multiscale_trace(self.f, c, self.scales, field=self.field)


def _first_true(test, lo: int, hi: int, coarse=()) -> int:
    """Smallest j in (lo, hi] with test(j), given test(lo) False and test(hi) True.

    The coarse indices strictly inside (lo, hi) are searched first.
    """
    cand = [j for j in coarse if lo < j < hi]
    a, b = -1, len(cand)
    while b - a > 1:
        m = (a + b) // 2
        if test(cand[m]):
            b = m
        else:
            a = m
    lo = cand[a] if a >= 0 else lo
    hi = cand[b] if b < len(cand) else hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if test(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --------------------------------------------------------------------------
# predicate

def unboundedness_predicate(F, frame=None, c: float = 0.0, shift_samples: int = DEFAULT_SHIFTS, scales=None,
                            h: float | None = None, seed: int = 0, tolerance: float | None = None):
    """True / False / None (undetermined) for 'some plane carries unbounded level lines at c'.

    A shift counts as positive on an open or closed-growing verdict, or when
    both sign regions percolate within ``tolerance`` of c (the level error
    of the grid, or the applied nudge if larger).
    """
    return predicate_details(F, frame, c, shift_samples, scales, h, seed, tolerance)["value"]


def predicate_details(F, frame=None, c=0.0, shift_samples=DEFAULT_SHIFTS, scales=None, h=None, seed=0,
                      tolerance=None) -> dict:
    if shift_samples < 1:
        raise InputError("shift_samples must be at least 1")
    f = _plane(F, frame)
    scales = tr.default_scales(f) if scales is None else list(scales)
    h = tr.grid_step(f) if h is None else h
    offsets = transverse_offsets(f.frame, shift_samples, seed)
    verdicts = []
    for off in offsets:
        g = f.shifted(off)
        try:
            probe = PlaneProbe(g, scales, h)
            rep = probe.trace(c)
        except ResourceError:
            verdicts.append("undetermined")
            continue
        tol = max(discretization_slack(g, h) / 2, abs(rep.c_eff - c)) if tolerance is None else tolerance
        v = rep.verdict
        if v not in ("open", "closed-growing") and probe.spans(c + tol, "below") and probe.spans(c - tol, "above"):
            v = "open"
        verdicts.append(v)
    if any(v in ("open", "closed-growing") for v in verdicts):
        value = True
    elif all(v == "closed-bounded" for v in verdicts):
        value = False
    else:
        value = None
    return {"value": value, "verdicts": verdicts, "c": float(c), "shifts": offsets.tolist()}


# --------------------------------------------------------------------------
# interval

@dataclass
class CriticalIntervalEstimate:
    c1_bracket: tuple[float, float]
    c2_bracket: tuple[float, float]
    degenerate: bool
    shifts_sampled: int
    scales: list
    h: float
    slack: float
    range_bracket: tuple[float, float]
    unresolved: bool = False
    log: list = field(default_factory=list)
    per_shift: list = field(default_factory=list)
    contiguity_violations: list = field(default_factory=list)

    @property
    def width(self) -> float:
        return max(self.c1_bracket[1] - self.c1_bracket[0], self.c2_bracket[1] - self.c2_bracket[0])

    def contains(self, c: float) -> bool:
        return self.c1_bracket[0] <= c <= self.c2_bracket[1]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["width"] = self.width
        return d


def estimate_interval(F, frame=None, level_points: int = DEFAULT_LEVEL_POINTS, shift_samples: int = DEFAULT_SHIFTS,
                      scales=None, h: float | None = None, seed: int = 0, refinements: int = DEFAULT_REFINEMENTS,
                      range_resolution: int = 64) -> CriticalIntervalEstimate:
    """Brackets for the lowest and highest levels carrying unbounded level lines.

    A coarse scan over ``level_points`` levels inside the estimated range is
    followed by bisection of each threshold to (range / 2**refinements); the
    brackets are then widened by the grid's level error.
    """
    f = _plane(F, frame)
    scales = tr.default_scales(f) if scales is None else list(scales)
    h = tr.grid_step(f) if h is None else h
    return interval_from_probes(f, lambda g: PlaneProbe(g, scales, h), scales, h, discretization_slack(f, h),
                                level_points, shift_samples, seed, refinements, range_resolution)


def interval_from_probes(f, make_probe, scales, h, slack, level_points=DEFAULT_LEVEL_POINTS,
                         shift_samples=DEFAULT_SHIFTS, seed=0, refinements=DEFAULT_REFINEMENTS,
                         range_resolution=64) -> CriticalIntervalEstimate:
    """Threshold search shared by planes and higher-dimensional subspaces.

    ``make_probe(g)`` returns an object whose ``spans(c, sign)`` answers the
    percolation test on the shifted restriction g. On a fixed sample both
    tests are monotone in c, so each threshold is a binary search over the
    dyadic levels fmin + j (fmax - fmin) / 2**refinements, coarse levels
    first. A later shift is searched only if it beats the current extreme
    index, which leaves the min/max independent of the shift order.
    """
    if level_points < 8:
        raise InputError("level grid needs at least 8 points")
    rng = range_estimate(f.source, range_resolution)
    fmin, fmax = rng.f_min_est, rng.f_max_est
    top = 2**refinements
    coarse = sorted({int(round(k * top / (level_points + 1))) for k in range(1, level_points + 1)})

    def level(j):
        return fmin + (fmax - fmin) * j / top

    offsets = transverse_offsets(f.frame, shift_samples, seed)
    log, per_shift = [], []
    first_below, last_above = top, 0
    for s, off in enumerate(offsets):
        probe = make_probe(f.shifted(off))
        stage = ["prune"]

        def test(j, sign):
            val = probe.spans(level(j), sign)
            log.append({"shift": s, "c": float(level(j)), "sign": sign, "spans": bool(val), "stage": stage[0]})
            return val

        rec = {"shift": s, "offset": off.tolist(), "first_below": None, "last_above": None}
        # {f < c} percolates from some index on; only indices below the current best can matter
        if first_below > 0 and test(first_below - 1, "below"):
            stage[0] = "search"
            first_below = _first_true(lambda j: test(j, "below"), 0, first_below - 1, coarse)
            rec["first_below"] = first_below
        stage[0] = "prune"
        if last_above < top and test(last_above + 1, "above"):
            stage[0] = "search"
            last_above = _first_true(lambda j: not test(j, "above"), last_above + 1, top, coarse) - 1
            rec["last_above"] = last_above
        per_shift.append(rec)

    unresolved = first_below >= top or last_above <= 0
    c1 = (level(first_below - 1) - slack, level(first_below) + slack)
    c2 = (level(last_above) - slack, level(last_above + 1) + slack)
    c1, c2 = (tuple(float(np.clip(v, fmin, fmax)) for v in b) for b in (c1, c2))
    w = max(c1[1] - c1[0], c2[1] - c2[0])
    gap = 0.5 * (c2[0] + c2[1]) - 0.5 * (c1[0] + c1[1])
    degenerate = bool(gap <= 2 * w) and not unresolved
    if degenerate and (c1[0] > c2[0] or c1[1] > c2[1]):
        c1 = c2 = (min(c1[0], c2[0]), max(c1[1], c2[1]))
    if unresolved:
        c1 = c2 = (float(fmin), float(fmax))
    return CriticalIntervalEstimate(
        c1_bracket=c1, c2_bracket=c2, degenerate=degenerate, shifts_sampled=len(offsets),
        scales=[float(L) for L in scales], h=float(h), slack=float(slack), range_bracket=(float(fmin), float(fmax)),
        unresolved=bool(unresolved), log=log, per_shift=per_shift, contiguity_violations=_monotonicity_violations(log))


def _monotonicity_violations(log) -> list:
    """Evaluated levels where a percolation test contradicts monotonicity within one shift."""
    out = []
    for key in {(e["shift"], e["sign"]) for e in log}:
        pts = sorted({(e["c"], e["spans"]) for e in log if (e["shift"], e["sign"]) == key})
        vals = [v for _, v in pts]
        if key[1] == "above":
            vals = [not v for v in vals]
        for (c, _), prev, cur in zip(pts[1:], vals, vals[1:]):
            if prev and not cur:
                out.append({"shift": key[0], "sign": key[1], "c": c})
    return sorted(out, key=lambda d: (d["shift"], d["sign"], d["c"]))


# --------------------------------------------------------------------------
# situations

@dataclass
class SituationLabel:
    label: str
    open_lines: bool
    omega_minus_unbounded: bool
    omega_plus_unbounded: bool
    large_electronic: bool
    large_hole: bool
    verdict: str = "undetermined"
    outside_interval: bool = False

    def evidence(self) -> dict:
        return {k: getattr(self, k) for k in
                ("open_lines", "omega_minus_unbounded", "omega_plus_unbounded", "large_electronic", "large_hole")}


def _growing(series) -> bool:
    s = np.asarray(series, dtype=float)
    return bool(s[-1] > 0 and s[-1] >= tr.GROWTH_FACTOR * s[0])


def label_from_report(report: tr.ScaleReport) -> SituationLabel:
    recs = report.records
    minus = all(r.omega_minus_spans for r in recs)
    plus = all(r.omega_plus_spans for r in recs)
    no_lines = all(r.n_spanning == 0 for r in recs)
    elec = _growing(report.series("max_electronic_diameter"))
    hole = _growing(report.series("max_hole_diameter"))
    v = report.verdict
    if v == "open":
        label = "A"
    elif no_lines and plus and not minus and elec:
        label = "B"
    elif no_lines and minus and not plus and hole:
        label = "C"
    elif no_lines and not minus and not plus and elec and hole:
        label = "D"
    else:
        label = "undetermined"
    return SituationLabel(label, v == "open", minus, plus, elec, hole, v,
                          outside_interval=(label == "undetermined" and v == "closed-bounded"))


def classify_situation(f: QuasiperiodicFunction, c: float, scales=None, h: float | None = None) -> SituationLabel:
    return label_from_report(tr.multiscale_trace(f, c, scales, h))


@dataclass
class SweepRecord:
    shift_index: int
    c: float
    situation: SituationLabel
    report: tr.ScaleReport

    @property
    def label(self) -> str:
        return self.situation.label


def situation_sweep(F, frame=None, levels=(), shift_samples: int = DEFAULT_SHIFTS, scales=None,
                    h: float | None = None, seed: int = 0) -> list[SweepRecord]:
    """Label every (shift, level) pair; each shifted plane is sampled once."""
    f = _plane(F, frame)
    scales = tr.default_scales(f) if scales is None else list(scales)
    h = tr.grid_step(f) if h is None else h
    out = []
    for s, off in enumerate(transverse_offsets(f.frame, shift_samples, seed)):
        g = f.shifted(off)
        fld = tr.sample_for_scales(g, scales, h)
        for c in levels:
            rep = tr.multiscale_trace(g, float(c), scales, field=fld)
            out.append(SweepRecord(s, float(c), label_from_report(rep), rep))
    return out


# --------------------------------------------------------------------------
# theorem checks

@dataclass
class Violation:
    shift_index: int
    c: float
    label: str
    reason: str


def check_theorem21(interval: CriticalIntervalEstimate, labels, tolerance: float | None = None) -> list[Violation]:
    """B only at the lower end, C only at the upper end, D only for a degenerate interval.

    ``labels`` holds (shift_index, c, label) triples or SweepRecords.
    """
    tol = interval.width if tolerance is None else tolerance
    lo1, hi1 = interval.c1_bracket[0] - tol, interval.c1_bracket[1] + tol
    lo2, hi2 = interval.c2_bracket[0] - tol, interval.c2_bracket[1] + tol
    out = []
    for item in labels:
        if isinstance(item, SweepRecord):
            s, c, lab = item.shift_index, item.c, item.label
        else:
            s, c, lab = item
            lab = lab.label if isinstance(lab, SituationLabel) else lab
        if lab == "B" and not lo1 <= c <= hi1:
            out.append(Violation(s, c, lab, "B away from the lower critical level"))
        elif lab == "C" and not lo2 <= c <= hi2:
            out.append(Violation(s, c, lab, "C away from the upper critical level"))
        elif lab == "D" and not interval.degenerate:
            out.append(Violation(s, c, lab, "D with a non-degenerate interval"))
    return out


@dataclass
class Theorem22Result:
    applicable: bool
    passed: bool
    open_fraction: float
    samples: int
    exceptions: list = field(default_factory=list)


def check_theorem22(F, frame=None, interval: CriticalIntervalEstimate | None = None, levels: int = 9,
                    shift_samples: int = 5, scales=None, h: float | None = None, delta: float | None = None,
                    seed: int = 0) -> Theorem22Result:
    """Every level strictly inside a non-degenerate interval should give open lines."""
    if interval is None:
        raise InputError("an interval estimate is required")
    if interval.degenerate:
        return Theorem22Result(False, True, float("nan"), 0)
    d = 2 * interval.width if delta is None else delta
    lo, hi = interval.c1_bracket[1] + d, interval.c2_bracket[0] - d
    if hi <= lo:
        return Theorem22Result(False, True, float("nan"), 0)
    cs = np.linspace(lo, hi, levels + 2)[1:-1]
    recs = situation_sweep(F, frame, cs, shift_samples, scales, h, seed)
    exceptions = [{"shift": r.shift_index, "c": r.c, "verdict": r.report.verdict,
                   "records": [asdict(x) for x in r.report.records]}
                  for r in recs if r.report.verdict != "open"]
    frac = 1.0 - len(exceptions) / len(recs)
    return Theorem22Result(True, frac >= THEOREM22_PASS_FRACTION, frac, len(recs), exceptions)


@dataclass
class TransferResult:
    passed: bool
    counterexamples: int
    cells_checked: int
    shifted_cells: int


def transfer_inclusion_check(F: PeriodicFunction, frame: EmbeddingFrame, c: float, c_prime: float, a,
                             half_size: float | None = None, h: float | None = None) -> TransferResult:
    """Pure {f < c'} cells of the plane shifted by ``a`` must be pure {f < c} cells of the original plane."""
    a = np.asarray(a, dtype=float)
    f = restrict(F, frame)
    C = f.lipschitz_bound()
    if not c_prime < c:
        raise InputError("need c' < c")
    if not np.linalg.norm(a) < (c - c_prime) / C:
        raise InputError("shift is too large: need |a| < (c - c') / C")
    ps = f.period_scale()
    L = 4 * ps if half_size is None else half_size
    h = tr.grid_step(f) if h is None else h
    w = tr.Window((0.0, 0.0), L, h)
    base = tr.sample_grid(f, w)
    moved = tr.sample_grid(f.shifted(a), w)
    small = tr.pure_cells(moved.values, c_prime, "below")
    big = tr.pure_cells(base.values, c, "below")
    bad = int(np.count_nonzero(small & ~big))
    return TransferResult(bad == 0, bad, int(small.size), int(small.sum()))


@dataclass
class DiameterBoundEstimate:
    c: float
    D_est: float
    scales: list
    stable: bool
    series: list = field(default_factory=list)
    per_shift: list = field(default_factory=list)

    @property
    def spread(self) -> float:
        p = np.asarray(self.per_shift, dtype=float)
        return float((p.max() - p.min()) / p.max()) if p.size and p.max() > 0 else 0.0


def _stable(series) -> bool:
    top = np.asarray(series[-3:], dtype=float)
    return bool(top.max() == 0 or (top.max() - top.min()) < tr.STABILITY_TOL * top.max())


def bounded_diameter_estimate(F, frame=None, c: float = 0.0, shift_samples: int = 8, scales=None,
                              h: float | None = None, seed: int = 0,
                              interval: CriticalIntervalEstimate | None = None) -> DiameterBoundEstimate:
    """Largest closed level line over shifts and scales at a level outside the critical interval."""
    f = _plane(F, frame)
    if interval is not None:
        w = interval.width
        if interval.c1_bracket[0] - w < c < interval.c2_bracket[1] + w:
            raise InputError("level is not outside the interval by a bracket width")
    scales = tr.default_scales(f) if scales is None else list(scales)
    per_scale = np.zeros(len(scales))
    per_shift = []
    for off in transverse_offsets(f.frame, shift_samples, seed):
        rep = tr.multiscale_trace(f.shifted(off), c, scales, h)
        if rep.verdict == "open" or any(r.n_spanning for r in rep.records):
            raise ContradictionError(f"level {c} carries spanning level lines; it lies inside the interval")
        d = rep.series("max_closed_diameter")
        per_scale = np.maximum(per_scale, d)
        per_shift.append(float(d.max()))
    return DiameterBoundEstimate(float(c), float(per_scale.max()), [float(L) for L in scales],
                                 _stable(per_scale), per_scale.tolist(), per_shift)
