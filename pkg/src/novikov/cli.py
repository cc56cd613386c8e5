"""Command line entry point: ``python -m novikov <task> [options]``.

Exit codes: 0 success, 2 bad input, 3 resource limit, 4 a theorem check
found violations, 5 internal consistency failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import critical as cr
from . import io as nio
from . import ndscan as nd
from . import tracer2d as tr
from .embedding import classify_direction, identity_frame, restrict
from .errors import ConsistencyError, InputError, NovikovError, ResourceError
from .presets import preset
from .render import render_svg

TASKS = ("trace", "classify", "interval", "sweep", "ndscan", "check", "plot")
CHECKS = ("theorem21", "theorem22", "transfer", "theorem31", "lemma21")

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_VIOLATION, EXIT_CONSISTENCY = 0, 2, 3, 4, 5

DEFAULTS = {
    "potential": {"preset": "separable"},
    "frame": None,
    "level": 0.3,
    "levels": None,
    "scales": None,
    "h": None,
    "shifts": cr.DEFAULT_SHIFTS,
    "seed": 0,
    "window": None,
    "check": "theorem21",
    "level_points": cr.DEFAULT_LEVEL_POINTS,
    "transfer": {"c": 0.5, "c_prime": 0.3, "fraction": 0.5},
    "voxel_dump": False,
    "direction_search": 6,
}


# --------------------------------------------------------------------------
# configuration

def parse_levels(value) -> list[float]:
    if value is None:
        return []
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 3:
            raise InputError("levels must look like lo:hi:count")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise InputError(f"levels: {exc}") from exc
    elif isinstance(value, dict):
        lo, hi, count = float(value["lo"]), float(value["hi"]), int(value["count"])
    else:
        return [float(c) for c in value]
    if count < 1:
        raise InputError("levels: count must be positive")
    return np.linspace(lo, hi, count).tolist() if count > 1 else [lo]


def parse_scales(value):
    if value is None:
        return None
    if isinstance(value, str):
        try:
            return [float(s) for s in value.split(",") if s.strip()]
        except ValueError as exc:
            raise InputError(f"scales: {exc}") from exc
    return [float(s) for s in value]


def resolve_config(task: str, config: dict, overrides: dict) -> dict:
    unknown = set(config) - set(DEFAULTS) - {"task"}
    if unknown:
        raise InputError(f"unknown config fields: {', '.join(sorted(unknown))}")
    cfg = {**DEFAULTS, **config, **{k: v for k, v in overrides.items() if v is not None}}
    cfg["task"] = task
    cfg["levels"] = parse_levels(cfg["levels"])
    cfg["scales"] = parse_scales(cfg["scales"])
    if not isinstance(cfg["shifts"], int) or cfg["shifts"] < 1:
        raise InputError("shifts must be a positive integer")
    if cfg["check"] not in CHECKS:
        raise InputError(f"check must be one of {', '.join(CHECKS)}")
    return cfg


def build_problem(cfg: dict, n_default: int = 2):
    """(F, frame) from the config's potential and frame sections."""
    pot = cfg["potential"]
    frame = None
    if not isinstance(pot, dict):
        raise InputError("potential must be an object")
    if "preset" in pot:
        F, frame = preset(pot["preset"])
    elif "file" in pot:
        data = nio.read_json(pot["file"])
        if "waves" in data:
            F, frame = nio.superposition_from_dict(data, "potential.file.")
        else:
            F = nio.potential_from_dict(data, "potential.file.")
    elif "waves" in pot:
        F, frame = nio.superposition_from_dict(pot, "potential.")
    else:
        F = nio.potential_from_dict(pot, "potential.")
    fr = cfg.get("frame")
    if fr is not None:
        frame = nio.load_frame(fr["file"]) if "file" in fr else nio.frame_from_dict(fr, "frame.")
    if frame is None:
        frame = identity_frame(F.dimension, min(n_default, F.dimension))
    return F, frame


# --------------------------------------------------------------------------
# tasks

class Run:
    def __init__(self, cfg: dict, out: Path, formats):
        self.cfg = cfg
        self.out = out
        self.formats = set(formats)
        self.outputs: dict[str, str] = {}
        self.warnings: list[str] = []
        self.violations = 0

    def want(self, fmt: str) -> bool:
        return not self.formats or fmt in self.formats

    def emit(self, name: str, text: str):
        nio.write_text(self.out / name, text)
        self.outputs[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()

    def emit_json(self, name: str, obj):
        self.emit(name, nio.dumps_report(obj))


def _record_dicts(rep):
    return [asdict(r) for r in rep.records]


def _warn_report(run: Run, rep, where: str):
    if getattr(rep, "nudged", False):
        run.warnings.append(f"{where}: level nudged from {rep.c:.6g} to {rep.c_eff:.6g}")
    if rep.verdict == "undetermined":
        run.warnings.append(f"{where}: verdict undetermined")


def task_trace(run: Run, svg_only: bool = False):
    F, frame = build_problem(run.cfg)
    f = restrict(F, frame)
    h = run.cfg["h"] or tr.grid_step(f)
    win = run.cfg["window"] or {}
    L = float(win.get("half_size", 4 * f.period_scale()))
    w = tr.Window(tuple(win.get("center", (0.0, 0.0))), L, h)
    field = tr.sample_grid(f, w)
    c = float(run.cfg["level"])
    c_eff, nudged = tr.nudge_level(field.values, c, f.lipschitz_bound(), h)
    if nudged:
        run.warnings.append(f"trace: level nudged from {c:.6g} to {c_eff:.6g}")
    comps = tr.extract_level_components(field, c_eff, nudge=False)
    if svg_only or run.want("svg"):
        run.emit("trace.svg", render_svg(comps, w, level=c_eff))
    if svg_only:
        return
    if run.want("csv"):
        run.emit("components.csv", nio.components_csv(comps))
    if run.want("json"):
        run.emit_json("trace.json", {
            "c": c, "c_eff": c_eff, "nudged": nudged, "h": h, "window": {"center": list(w.center), "half_size": L},
            "components": [{"id": i, "closed": x.closed, "kind": x.kind, "diameter": x.diameter,
                            "spans_window": x.spans_window, "sides": list(x.sides), "vertex_count": x.vertex_count}
                           for i, x in enumerate(comps)]})


def task_classify(run: Run):
    F, frame = build_problem(run.cfg)
    f = restrict(F, frame)
    c = float(run.cfg["level"])
    rep = tr.multiscale_trace(f, c, run.cfg["scales"], run.cfg["h"])
    lab = cr.label_from_report(rep)
    _warn_report(run, rep, "classify")
    run.emit_json("classify.json", {"c": c, "c_eff": rep.c_eff, "nudged": rep.nudged, "h": rep.h,
                                    "label": lab.label, "verdict": rep.verdict, "evidence": lab.evidence(),
                                    "outside_interval": lab.outside_interval, "records": _record_dicts(rep)})


def _interval(run: Run, F, frame):
    est = cr.estimate_interval(F, frame, run.cfg["level_points"], run.cfg["shifts"], run.cfg["scales"],
                               run.cfg["h"], run.cfg["seed"])
    if est.unresolved:
        run.warnings.append("interval: no scanned level had both signs percolating; full-range bracket")
    if est.contiguity_violations:
        run.warnings.append(f"interval: predicate gaps at levels {est.contiguity_violations}")
    return est


def _direction(frame, K):
    try:
        return classify_direction(frame, K=K).to_dict()
    except ResourceError as exc:
        return {"label": "skipped", "reason": str(exc)}


def task_interval(run: Run):
    F, frame = build_problem(run.cfg)
    est = _interval(run, F, frame)
    run.emit_json("interval.json", {**est.to_dict(), "direction": _direction(frame, run.cfg["direction_search"])})
    return est


def _sweep_levels(run: Run, est=None):
    levels = run.cfg["levels"]
    if levels:
        return levels
    if est is None:
        raise InputError("sweep needs --levels lo:hi:count")
    lo, hi = est.range_bracket
    return np.linspace(lo, hi, 12)[1:-1].tolist()


def _sweep(run: Run, F, frame, levels):
    recs = cr.situation_sweep(F, frame, levels, run.cfg["shifts"], run.cfg["scales"], run.cfg["h"], run.cfg["seed"])
    for r in recs:
        _warn_report(run, r.report, f"sweep shift {r.shift_index} c={r.c:.6g}")
    return recs


def _emit_sweep(run: Run, recs, name="sweep"):
    triples = [(r.shift_index, r.c, r.situation) for r in recs]
    if run.want("csv"):
        run.emit(f"{name}.csv", nio.sweep_csv(triples))
    if run.want("json"):
        run.emit_json(f"{name}.json", [{"shift_index": r.shift_index, "c": r.c, "label": r.label,
                                        "verdict": r.report.verdict, "c_eff": r.report.c_eff,
                                        "evidence": r.situation.evidence(), "records": _record_dicts(r.report)}
                                       for r in recs])


def task_sweep(run: Run):
    F, frame = build_problem(run.cfg)
    recs = _sweep(run, F, frame, _sweep_levels(run))
    _emit_sweep(run, recs)


def task_ndscan(run: Run):
    F, frame = build_problem(run.cfg, n_default=3)
    if frame.n not in (2, 3):
        raise InputError("ndscan needs a 2- or 3-dimensional frame")
    f = restrict(F, frame)
    scales = run.cfg["scales"]
    h = run.cfg["h"]
    est = nd.estimate_interval_nd(F, frame, run.cfg["level_points"], run.cfg["shifts"], scales, h, run.cfg["seed"])
    c = float(run.cfg["level"])
    rep = nd.multiscale_scan_nd(f, c, scales, h)
    lab = nd.label_from_box_report(rep)
    run.emit_json("ndscan.json", {"interval": est.to_dict(), "c": c, "label": lab.label, "verdict": rep.verdict,
                                  "evidence": lab.evidence(), "records": [asdict(r) for r in rep.records]})
    if run.cfg["voxel_dump"]:
        hh = h or nd.grid_step_nd(f)
        L = (scales or nd.default_scales_nd(f))[-1]
        fld = nd.sample_box(f, nd.BoxWindow((0.0,) * f.n, L, hh))
        signs = np.sign(fld.values - c).astype(np.int8)
        path = nio.write_voxel_dump(run.out / "voxels.bin", signs, hh, fld.origin)
        run.outputs["voxels.bin"] = hashlib.sha256(path.read_bytes()).hexdigest()


def task_check(run: Run):
    F, frame = build_problem(run.cfg, n_default=3 if run.cfg["check"] == "theorem31" else 2)
    kind = run.cfg["check"]
    result: dict = {"check": kind}
    if kind == "theorem21":
        est = _interval(run, F, frame)
        recs = _sweep(run, F, frame, _sweep_levels(run, est))
        viol = cr.check_theorem21(est, recs)
        _emit_sweep(run, recs)
        result.update(interval=est.to_dict(), labels=len(recs), violations=[asdict(v) for v in viol])
        run.violations = len(viol)
    elif kind == "theorem22":
        est = _interval(run, F, frame)
        res = cr.check_theorem22(F, frame, est, shift_samples=min(run.cfg["shifts"], 5), scales=run.cfg["scales"],
                                 h=run.cfg["h"], seed=run.cfg["seed"])
        result.update(interval=est.to_dict(), **asdict(res))
        run.violations = 0 if res.passed else len(res.exceptions)
    elif kind == "transfer":
        t = run.cfg["transfer"]
        f = restrict(F, frame)
        C = f.lipschitz_bound()
        c, cp = float(t["c"]), float(t["c_prime"])
        rng = np.random.default_rng(run.cfg["seed"])
        rows = []
        for _ in range(run.cfg["shifts"]):
            d = frame.project_out(rng.standard_normal(F.dimension))
            norm = np.linalg.norm(d)
            a = d / norm * float(t["fraction"]) * (c - cp) / C if norm > 0 else d
            res = cr.transfer_inclusion_check(F, frame, c, cp, a, h=run.cfg["h"])
            rows.append({"a": a.tolist(), **asdict(res)})
        result.update(c=c, c_prime=cp, trials=rows)
        run.violations = sum(r["counterexamples"] > 0 for r in rows)
    elif kind == "theorem31":
        est = nd.estimate_interval_nd(F, frame, run.cfg["level_points"], run.cfg["shifts"], run.cfg["scales"],
                                      run.cfg["h"], run.cfg["seed"])
        levels = run.cfg["levels"] or np.linspace(*est.range_bracket, 12)[1:-1].tolist()
        labels = nd.situation_sweep_nd(F, frame, levels, run.cfg["shifts"], run.cfg["scales"], run.cfg["h"],
                                       run.cfg["seed"])
        viol = nd.check_theorem31(est, labels)
        result.update(interval=est.to_dict(), labels=[{"shift_index": s, "c": c, "label": lab.label}
                                                      for s, c, lab in labels],
                      violations=[asdict(v) for v in viol])
        run.violations = len(viol)
    elif kind == "lemma21":
        recs = _sweep(run, F, frame, _sweep_levels(run))
        result.update(traces=len(recs) * len(recs[0].report.records) if recs else 0, consistency_errors=0)
    run.emit_json("check.json", result)
    if run.violations:
        run.warnings.append(f"check {kind}: {run.violations} violation(s)")


def run(task: str, cfg: dict, out: Path, formats=()) -> tuple[int, dict]:
    """Execute a task; returns (exit code, report)."""
    r = Run(cfg, out, formats)
    t0 = time.perf_counter()
    handlers = {"trace": task_trace, "classify": task_classify, "interval": task_interval, "sweep": task_sweep,
                "ndscan": task_ndscan, "check": task_check, "plot": lambda x: task_trace(x, svg_only=True)}
    handlers[task](r)
    report = {"config_hash": nio.config_hash({k: v for k, v in cfg.items()}), "task": task, "seed": cfg["seed"],
              "outputs": dict(sorted(r.outputs.items())), "warnings": r.warnings}
    nio.write_text(out / "report.json", nio.dumps_report(report))
    nio.write_text(out / "timings.json", nio.dumps_report({"task": task, "seconds": time.perf_counter() - t0}))
    return (EXIT_VIOLATION if r.violations else EXIT_OK), report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="novikov", description="Level lines of quasiperiodic functions.")
    p.add_argument("task", choices=TASKS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", default="novikov-out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--scales", help="comma-separated window half sizes")
    p.add_argument("--shifts", type=int)
    p.add_argument("--level", type=float)
    p.add_argument("--levels", help="lo:hi:count")
    p.add_argument("--format", choices=("csv", "json", "svg"), action="append", default=[])
    p.add_argument("--potential", help="named test potential (overrides the config's potential)")
    p.add_argument("--check", choices=CHECKS)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = nio.read_json(args.config) if args.config else {}
        if config.get("task", args.task) != args.task:
            raise InputError(f"config task {config['task']!r} differs from command {args.task!r}")
        overrides = {"seed": args.seed, "scales": args.scales, "shifts": args.shifts, "level": args.level,
                     "levels": args.levels, "check": args.check,
                     "potential": {"preset": args.potential} if args.potential else None}
        cfg = resolve_config(args.task, config, overrides)
        code, report = run(args.task, cfg, Path(args.out), args.format)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConsistencyError as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except NovikovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps({"task": report["task"], "config_hash": report["config_hash"], "outputs": list(report["outputs"]),
                      "warnings": len(report["warnings"])}))
    return code


if __name__ == "__main__":
    sys.exit(main())
