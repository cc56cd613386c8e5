"""File formats: potential, superposition and frame JSON; CSV/JSON reports; voxel dumps."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import struct
from pathlib import Path

import numpy as np

from .embedding import EmbeddingFrame, make_frame
from .errors import InputError
from .potential import PeriodicFunction, Wave, from_superposition

VOXEL_MAGIC = b"NVOX"


def _require(obj, key, path):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"missing field {path}{key}")
    return obj[key]


def read_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"file not found: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON ({exc})") from exc


def potential_from_dict(d: dict, path: str = "") -> PeriodicFunction:
    N = _require(d, "dimension", path)
    terms = _require(d, "terms", path)
    if not isinstance(terms, list):
        raise InputError(f"{path}terms must be a list")
    out = []
    for i, t in enumerate(terms):
        here = f"{path}terms[{i}]."
        out.append((_require(t, "k", here), _require(t, "amplitude", here), t.get("phase", 0.0)))
    return PeriodicFunction(N, out)


def potential_to_dict(F: PeriodicFunction) -> dict:
    terms = [{"k": [int(v) for v in t.k], "amplitude": float(t.amplitude), "phase": float(t.phase)} for t in F.terms]
    return {"dimension": F.dimension, "terms": terms}


def waves_from_dict(d: dict, path: str = "") -> list[Wave]:
    waves = _require(d, "waves", path)
    out = []
    for i, w in enumerate(waves):
        here = f"{path}waves[{i}]."
        if "theta_deg" in w:
            theta = np.deg2rad(float(w["theta_deg"]))
        else:
            theta = float(_require(w, "theta", here))
        out.append(Wave(theta, float(w.get("period", 1.0)), float(w.get("amplitude", 1.0)), float(w.get("phase", 0.0))))
    return out


def superposition_from_dict(d: dict, path: str = ""):
    return from_superposition(waves_from_dict(d, path))


def frame_from_dict(d: dict, path: str = "") -> EmbeddingFrame:
    raw = _require(d, "basis_raw", path)
    shift = d.get("shift")
    frame = make_frame(raw, shift)
    for key, val in (("N", frame.N), ("n", frame.n)):
        if key in d and int(d[key]) != val:
            raise InputError(f"{path}{key} = {d[key]} does not match basis_raw ({val})")
    return frame


def load_potential(path) -> PeriodicFunction:
    return potential_from_dict(read_json(path))


def load_frame(path) -> EmbeddingFrame:
    return frame_from_dict(read_json(path))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=_jsonable)


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def _jsonable(x):
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def dumps_report(obj) -> str:
    """Pretty, key-sorted JSON with a trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, default=_jsonable) + "\n"


def write_text(path, text: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return p


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x: float) -> str:
    return repr(float(x))


COMPONENT_HEADER = ("id", "closed", "kind", "diameter", "touches_boundary", "vertex_count")


def components_csv(components) -> str:
    rows = [(i, int(c.closed), c.kind, _num(c.diameter), int(c.touches_boundary), c.vertex_count)
            for i, c in enumerate(components)]
    return csv_text(COMPONENT_HEADER, rows)


SWEEP_HEADER = ("shift_index", "c", "label", "open_lines", "omega_minus_unbounded", "omega_plus_unbounded",
                "large_electronic", "large_hole", "verdict")


def sweep_csv(records) -> str:
    rows = []
    for s, c, lab in records:
        e = lab.evidence()
        rows.append((s, _num(c), lab.label, *(int(e[k]) for k in SWEEP_HEADER[3:8]), lab.verdict))
    return csv_text(SWEEP_HEADER, rows)


def write_voxel_dump(path, signs: np.ndarray, h: float, origin) -> Path:
    """Header: magic, n (u32), dims (n x u32), h (f64), origin (n x f64); then int8 signs in C order."""
    signs = np.ascontiguousarray(signs, dtype=np.int8)
    n = signs.ndim
    origin = [float(v) for v in origin]
    if len(origin) != n:
        raise InputError("origin length must match the array dimension")
    head = VOXEL_MAGIC + struct.pack(f"<I{n}Id{n}d", n, *signs.shape, float(h), *origin)
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(head + signs.tobytes())
    return p


def read_voxel_dump(path):
    data = Path(path).read_bytes()
    if data[:4] != VOXEL_MAGIC:
        raise InputError("not a voxel dump")
    (n,) = struct.unpack_from("<I", data, 4)
    fmt = f"<{n}Id{n}d"
    vals = struct.unpack_from(fmt, data, 8)
    dims, h, origin = vals[:n], vals[n], vals[n + 1:]
    off = 8 + struct.calcsize(fmt)
    signs = np.frombuffer(data, dtype=np.int8, offset=off).reshape(dims)
    return signs, h, np.array(origin)
