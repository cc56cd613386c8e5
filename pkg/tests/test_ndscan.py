import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from novikov import critical as cr
from novikov import ndscan as nd
from novikov import presets
from novikov import tracer2d as tr
from novikov.embedding import identity_frame, make_frame, restrict
from novikov.errors import InputError, ResourceError

from conftest import random_potential

SEP3 = restrict(*presets.separable3())
COS3 = restrict(*presets.single_cosine3())


class Radial3:
    """-cos(pi r) on R^3, sampled like a subspace restriction."""

    n = 3

    def evaluate(self, p):
        p = np.asarray(p, float)
        return -np.cos(np.pi * np.linalg.norm(p, axis=-1))

    def grid(self, axes):
        z, y, x = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
        return -np.cos(np.pi * np.sqrt(x * x + y * y + z * z))

    def lipschitz_bound(self):
        return np.pi


def test_sample_box_pointwise(rng):
    F = random_potential(rng, 4, 4)
    f = restrict(F, make_frame(rng.standard_normal((3, 4))))
    fld = nd.sample_box(f, nd.BoxWindow((0.1, 0.2, 0.3), 0.5, 0.1))
    assert fld.values.shape == (11, 11, 11)
    ax = fld.window.axes()
    for _ in range(30):
        k = rng.integers(0, 11, 3)
        p = np.array([ax[0][k[2]], ax[1][k[1]], ax[2][k[0]]])
        assert fld.values[tuple(k)] == pytest.approx(f.evaluate(p), abs=1e-12)


def test_box_validation():
    with pytest.raises(InputError):
        nd.BoxWindow((0, 0, 0), 0.1, 0.2)
    with pytest.raises(InputError):
        nd.sample_box(SEP3, nd.BoxWindow((0, 0), 1, 0.1))
    with pytest.raises(ResourceError):
        nd.sample_box(SEP3, nd.BoxWindow((0, 0, 0), 5, 0.01), budget=10**6)


@given(st.integers(0, 2**32 - 1), st.floats(-0.7, 0.7))
def test_planar_census_matches_tracer(seed, t):
    rng = np.random.default_rng(seed)
    F = random_potential(rng, 3, 4)
    f = restrict(F, make_frame(rng.standard_normal((2, 3))))
    flat = tr.sample_grid(f, tr.Window((0, 0), 1.5, 0.05))
    box = nd.sample_box(f, nd.BoxWindow((0, 0), 1.5, 0.05))
    assert np.array_equal(flat.values, box.values)
    c = t * np.abs(flat.values).max()
    for sign in ("below", "above"):
        a = tr.region_components(flat, c, sign)
        b = nd.region_components_nd(box, c, sign)
        assert [r.cell_count for r in a] == [r.voxel_count for r in b]
        assert [r.touches_boundary for r in a] == [r.touches_boundary for r in b]


def test_pure_and_crossing_voxels_partition():
    fld = nd.sample_box(SEP3, nd.BoxWindow((0, 0, 0), 1.0, 0.1))
    below = nd.pure_voxels(fld.values, 0.3, "below")
    above = nd.pure_voxels(fld.values, 0.3, "above")
    cross = nd.crossing_voxels(fld.values, 0.3)
    assert np.array_equal(below.astype(int) + above + cross, np.ones_like(cross, dtype=int))
    with pytest.raises(InputError):
        nd.pure_voxels(fld.values, 0.3, "left")


def test_separable3_closed_bands():
    h = 0.02
    fld = nd.sample_box(SEP3, nd.BoxWindow((0, 0, 0), 0.5, h))
    bands = nd.level_components_nd(fld, 2.5)
    (hole,) = [b for b in bands if b.closed]
    assert hole.kind == "hole"
    # the surface meets the axes where cos 2πx = 1/2; the box of crossings is the cube [-1/6, 1/6]^3
    assert hole.diameter == pytest.approx(np.sqrt(3) / 3, abs=2 * h)
    assert np.allclose(hole.bbox[0], -1 / 6, atol=h) and np.allclose(hole.bbox[1], 1 / 6, atol=h)
    fld = nd.sample_box(SEP3, nd.BoxWindow((0.5, 0.5, 0.5), 0.5, h))
    elec = [b for b in nd.level_components_nd(fld, -2.5) if b.closed]
    assert len(elec) == 1 and elec[0].kind == "electronic"


def test_nesting_in_three_dimensions():
    fld = nd.sample_box(Radial3(), nd.BoxWindow((0, 0, 0), 2.0, 0.05))
    bands = nd.level_components_nd(fld, -0.5)
    assert sorted(b.kind for b in bands if b.closed) == ["electronic", "hole"]
    assert nd.nesting_violations_nd(bands) == []
    flipped = [nd.LevelBandComponent(b.voxel_count, b.touches_boundary, b.spans_window, b.diameter,
                                     {"hole": "electronic", "electronic": "hole"}.get(b.kind, b.kind), b.bbox)
               for b in bands]
    assert len(nd.nesting_violations_nd(flipped)) == 1


def test_vertex_cluster_flags():
    fld = nd.sample_box(SEP3, nd.BoxWindow((0, 0, 0), 2.0, 0.05))
    assert nd.vertex_cluster_flags(fld, 0.0, "below") == (True, True)
    assert nd.vertex_cluster_flags(fld, 2.5, "above") == (True, False)  # caps around maxima on the faces
    assert nd.vertex_cluster_flags(fld, 5.0, "above") == (False, False)


def test_multiscale_verdicts():
    scales = [1.0, 1.5, 2.0]
    assert nd.multiscale_scan_nd(COS3, 0.2, scales).verdict == "open"
    assert nd.classify_situation_nd(COS3, 0.2, scales).label == "A'"
    rep = nd.multiscale_scan_nd(SEP3, 2.0, scales)
    assert rep.verdict == "closed-bounded"
    assert nd.label_from_box_report(rep).outside_interval
    with pytest.raises(InputError):
        nd.multiscale_scan_nd(SEP3, 2.0, [1.0])


def test_interval_separable3():
    iv = nd.estimate_interval_nd(SEP3, scales=[1.0, 1.5, 2.0])
    assert not iv.degenerate and iv.shifts_sampled == 1
    assert iv.c1_bracket[0] - iv.width <= -1.0 <= iv.c1_bracket[1] + iv.width
    assert iv.c2_bracket[0] - iv.width <= 1.0 <= iv.c2_bracket[1] + iv.width
    labels = nd.situation_sweep_nd(*presets.separable3(), levels=[0.0, 1.5], scales=[1.0, 1.5, 2.0])
    assert [lab.label for _, _, lab in labels] == ["A'", "undetermined"]
    assert nd.check_theorem31(iv, labels) == []
    assert [v.label for v in nd.check_theorem31(iv, [(0, 0.0, "D'")])] == ["D"]


def test_window_offsets():
    full = nd.window_offsets(identity_frame(3, 3), 5, seed=1)
    assert full.shape == (5, 3) and np.all(full[0] == 0) and np.all((0 <= full) & (full < 1))
    assert len(np.unique(full, axis=0)) == 5
    _, fr = presets.quartic_generic()
    part = nd.window_offsets(fr, 4)
    assert part.shape == (4, 4) and np.allclose(part @ fr.basis.T, 0, atol=1e-12)


def test_uniform_diameter_small():
    est = nd.uniform_diameter_check_nd(*presets.separable3(), c=2.9, shift_samples=3, scales=[1.0, 1.5, 2.0])
    assert est.stable and est.spread < 0.1
    # crossing box of the surface cos 2πx = 0.9 - 2 near the origin
    assert est.D_est == pytest.approx(np.sqrt(3) * np.arccos(0.9) / np.pi, abs=0.1)
