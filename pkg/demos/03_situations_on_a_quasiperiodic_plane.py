# Situations A-D on the plane (x, y, (x + y)/φ) through the three-torus.
#
# F(z) = cos 2πz1 + cos 2πz2 + cos 2πz3 restricted to this plane is the
# quasiperiodic function cos 2πx + cos 2πy + cos 2π(x + y)/φ. Each level is
# labelled from multiscale evidence, then checked against the interval rules.
import numpy as np

from novikov import critical as cr, presets
from novikov.embedding import classify_direction

F, frame = presets.golden()
print("direction:", classify_direction(frame, K=6).to_dict()["label"])

scales = [4, 8, 16]
iv = cr.estimate_interval(F, frame, shift_samples=4, scales=scales)
print("c1", np.round(iv.c1_bracket, 4), "c2", np.round(iv.c2_bracket, 4), "degenerate", iv.degenerate)
for rec in iv.per_shift:
    print("  shift", rec["shift"], "first below index", rec["first_below"], "last above index", rec["last_above"])

levels = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]
sweep = cr.situation_sweep(F, frame, levels, shift_samples=2, scales=scales)
print(f"{'shift':>5} {'c':>6}  label        verdict          evidence")
for r in sweep:
    ev = "".join("x" if v else "." for v in r.situation.evidence().values())
    print(f"{r.shift_index:5d} {r.c:6.2f}  {r.label:12s} {r.report.verdict:16s} {ev}")
print("evidence columns: open lines, Ω- unbounded, Ω+ unbounded, large electronic, large hole")
print("violations:", cr.check_theorem21(iv, sweep))
