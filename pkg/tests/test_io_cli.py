import json
from pathlib import Path

import numpy as np
import pytest

from novikov import cli
from novikov import critical as cr
from novikov import io as nio
from novikov import tracer2d as tr
from novikov.embedding import identity_frame, restrict
from novikov.errors import ConsistencyError, InputError
from novikov.potential import PeriodicFunction, cosine_sum
from novikov.render import MARGIN, SIZE, render_svg

FAST = "4,8,16"


# -- file formats -----------------------------------------------------------

def test_potential_roundtrip():
    F = PeriodicFunction(3, [((1, 0, 2), 0.5, 0.3), ((0, 1, 0), 1.5, 0.0)])
    d = nio.potential_to_dict(F)
    assert nio.potential_from_dict(json.loads(json.dumps(d))) == F


def test_error_messages_carry_field_paths(tmp_path):
    with pytest.raises(InputError, match=r"terms\[1\]\.amplitude"):
        nio.potential_from_dict({"dimension": 2, "terms": [{"k": [1, 0], "amplitude": 1}, {"k": [0, 1]}]})
    with pytest.raises(InputError, match="not found"):
        nio.read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(InputError, match="invalid JSON"):
        nio.read_json(bad)
    with pytest.raises(InputError, match="N = 4"):
        nio.frame_from_dict({"basis_raw": [[1, 0, 0], [0, 1, 0]], "N": 4})


def test_superposition_from_degrees():
    F, frame = nio.superposition_from_dict({"waves": [{"theta_deg": 0}, {"theta_deg": 90, "amplitude": 2.0}]})
    f = restrict(F, frame)
    p = np.array([0.1, 0.2])
    assert f.evaluate(p) == pytest.approx(np.cos(2 * np.pi * 0.1) + 2 * np.cos(2 * np.pi * 0.2))


def test_config_hash_ignores_key_order():
    a = {"level": 0.3, "potential": {"preset": "separable"}, "scales": [1.0, 2.0]}
    b = {"scales": [1.0, 2.0], "potential": {"preset": "separable"}, "level": 0.3}
    assert nio.config_hash(a) == nio.config_hash(b)
    assert nio.config_hash(a) != nio.config_hash({**a, "level": 0.31})


def test_csv_has_header_and_lf():
    text = nio.csv_text(("a", "b"), [(1, "x"), (2, "y")])
    assert text == "a,b\n1,x\n2,y\n"


def test_voxel_dump_roundtrip(tmp_path):
    signs = np.random.default_rng(3).integers(-1, 2, (4, 5, 6)).astype(np.int8)
    p = nio.write_voxel_dump(tmp_path / "v.bin", signs, 0.05, (-1.0, -2.0, -3.0))
    back, h, origin = nio.read_voxel_dump(p)
    assert np.array_equal(back, signs) and h == 0.05 and origin.tolist() == [-1.0, -2.0, -3.0]
    assert p.read_bytes()[:4] == b"NVOX"
    with pytest.raises(InputError):
        nio.write_voxel_dump(tmp_path / "w.bin", signs, 0.05, (0.0,))


# -- SVG --------------------------------------------------------------------

class Circle:
    def evaluate(self, p):
        p = np.asarray(p, float)
        return p[..., 0] ** 2 + p[..., 1] ** 2 - 1

    def lipschitz_bound(self):
        return 6.0


def test_svg_empty_and_circle():
    w = tr.Window((0, 0), 2.0, 0.05)
    empty = render_svg([], w, level=0.0)
    assert "<path" not in empty and "<rect" in empty and "level c = 0" in empty
    comps = tr.extract_level_components(tr.sample_grid(Circle(), w), 0.0)
    a, b = render_svg(comps, w, level=0.0), render_svg(comps, w, level=0.0)
    assert a == b and a.count("<path") == 1 and ' Z"' in a
    assert 'stroke="#1f77b4"' in a


def test_svg_spanning_path_meets_opposite_edges():
    f = restrict(cosine_sum(2, [[1, 0]]), identity_frame(2))
    w = tr.Window((0.0, 0.0), 1.0, 0.01)
    comps = tr.extract_level_components(tr.sample_grid(f, w), 0.0)
    assert all(c.spans_window for c in comps)
    svg = render_svg(comps, w, level=0.0)
    assert svg.count('stroke="#2ca02c"') == len(comps) == 4
    d = svg.split('id="c0" d="')[1].split('"')[0]
    ys = [float(t.split(",")[1]) for t in d.replace("M", "").replace("L", "").split()]
    assert min(ys) == MARGIN and max(ys) == MARGIN + SIZE


# -- CLI --------------------------------------------------------------------

def _files(out: Path):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "timings.json"}


def test_trace_outputs_and_determinism(tmp_path):
    args = ["trace", "--potential", "separable", "--level", "0.3"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert a == b and set(a) == {"trace.svg", "components.csv", "trace.json", "report.json"}
    rep = json.loads(a["report.json"])
    assert rep["warnings"] == [] and rep["seed"] == 0
    for name, digest in rep["outputs"].items():
        assert nio.hashlib.sha256(a[name]).hexdigest() == digest
    comps = json.loads(a["trace.json"])["components"]
    assert comps and not any(c["spans_window"] for c in comps)
    assert all(b"\r" not in v for v in a.values())
    assert a["components.csv"].startswith(b"id,closed,kind,diameter,touches_boundary,vertex_count\n")


def test_format_filter_and_plot(tmp_path):
    assert cli.main(["trace", "--format", "csv", "--out", str(tmp_path / "a")]) == 0
    assert set(_files(tmp_path / "a")) == {"components.csv", "report.json"}
    assert cli.main(["plot", "--out", str(tmp_path / "b")]) == 0
    assert set(_files(tmp_path / "b")) == {"trace.svg", "report.json"}


def test_nudge_is_warned(tmp_path):
    assert cli.main(["trace", "--level", "0", "--out", str(tmp_path)]) == 0
    assert "nudged" in json.loads((tmp_path / "report.json").read_text())["warnings"][0]


def test_config_file_with_inline_terms_and_frame(tmp_path):
    cfg = {"task": "classify", "level": 0.2, "scales": [4, 8, 16],
           "potential": {"dimension": 3, "terms": [{"k": [1, 0, 0], "amplitude": 1.0}]},
           "frame": {"basis_raw": [[1, 0, 0], [0, 1, 0]], "shift": [0, 0, 0.25]}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["classify", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    out = json.loads((tmp_path / "o" / "classify.json").read_text())
    assert out["label"] == "A" and out["verdict"] == "open"


def test_interval_single_cosine(tmp_path):
    args = ["interval", "--potential", "single-cosine", "--scales", FAST, "--shifts", "1", "--out", str(tmp_path)]
    assert cli.main(args) == 0
    iv = json.loads((tmp_path / "interval.json").read_text())
    assert iv["c1_bracket"][0] < -0.98 and iv["c2_bracket"][1] > 0.98 and not iv["degenerate"]
    assert iv["direction"]["label"] == "rational-content"


def test_sweep_and_consistency_check(tmp_path):
    base = ["--potential", "separable-lifted", "--scales", FAST, "--shifts", "2", "--levels=-1:1:3"]
    assert cli.main(["sweep", *base, "--out", str(tmp_path / "s")]) == 0
    rows = (tmp_path / "s" / "sweep.csv").read_text().splitlines()
    assert len(rows) == 1 + 6 and rows[0].startswith("shift_index,c,label")
    assert cli.main(["check", "--check", "lemma21", *base, "--out", str(tmp_path / "c")]) == 0
    assert json.loads((tmp_path / "c" / "check.json").read_text())["traces"] == 18


def test_transfer_check(tmp_path):
    assert cli.main(["check", "--check", "transfer", "--potential", "golden", "--shifts", "3",
                     "--out", str(tmp_path)]) == 0
    trials = json.loads((tmp_path / "check.json").read_text())["trials"]
    assert len(trials) == 3 and all(t["passed"] for t in trials)


def test_ndscan_with_voxels(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"voxel_dump": True, "scales": [1.0, 1.5, 2.0], "level": 2.5}))
    assert cli.main(["ndscan", "--config", str(cfg), "--potential", "separable3", "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert set(rep["outputs"]) == {"ndscan.json", "voxels.bin"}
    signs, h, origin = nio.read_voxel_dump(tmp_path / "o" / "voxels.bin")
    assert signs.shape == (81, 81, 81) and np.allclose(origin, -2.0)


@pytest.mark.parametrize("args, config", [
    (["trace", "--levels", "1:2"], None),
    (["trace"], {"bogus": 1}),
    (["classify"], {"task": "trace"}),
    (["trace", "--potential", "nonexistent"], None),
    (["trace", "--shifts", "0"], None),
    (["trace"], {"potential": {"dimension": 2, "terms": [{"k": [1]}]}}),
])
def test_input_errors_exit_2(tmp_path, capsys, args, config):
    if config is not None:
        (tmp_path / "c.json").write_text(json.dumps(config))
        args = args + ["--config", str(tmp_path / "c.json")]
    assert cli.main(args + ["--out", str(tmp_path / "o")]) == cli.EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert cli.main(["trace", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == 2


def test_resource_error_exit_3(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"h": 1e-4, "window": {"half_size": 10.0}}))
    assert cli.main(["trace", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "o")]) == 3


def test_violations_exit_4(tmp_path, monkeypatch):
    monkeypatch.setattr(cr, "check_theorem21", lambda iv, recs: [cr.Violation(0, 0.0, "B", "planted")])
    args = ["check", "--potential", "separable", "--scales", FAST, "--shifts", "1", "--levels", "0.5:0.5:1"]
    assert cli.main(args + ["--out", str(tmp_path)]) == 4
    check = json.loads((tmp_path / "check.json").read_text())
    assert check["violations"][0]["reason"] == "planted"
    assert any("violation" in w for w in json.loads((tmp_path / "report.json").read_text())["warnings"])


def test_consistency_error_exit_5(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise ConsistencyError("planted")
    monkeypatch.setattr(tr, "multiscale_trace", boom)
    assert cli.main(["classify", "--out", str(tmp_path)]) == 5


def test_parse_levels():
    assert cli.parse_levels("0:1:3") == [0.0, 0.5, 1.0]
    assert cli.parse_levels({"lo": 1, "hi": 1, "count": 1}) == [1.0]
    assert cli.parse_levels([0.1, 0.2]) == [0.1, 0.2]
    with pytest.raises(InputError):
        cli.parse_levels("0:1:x")
