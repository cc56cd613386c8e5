# Which integer vectors does a plane contain, or lie orthogonal to?
#
# The search is bounded (|k|_inf <= K) and only advisory, but it separates
# the shipped examples cleanly.
import math

from novikov import presets
from novikov.embedding import classify_direction, make_frame, min_integer_shift_distance

GOLDEN = (1 + math.sqrt(5)) / 2
frames = {
    "coordinate plane in R^3": make_frame([[1, 0, 0], [0, 1, 0]]),
    "(1,0,√2), (0,1,√3)": make_frame([[1, 0, math.sqrt(2)], [0, 1, math.sqrt(3)]]),
    "(1,1,0,0), (0,0,1,φ)": make_frame([[1, 1, 0, 0], [0, 0, 1, GOLDEN]]),
    "triangular three-wave": presets.triangular()[1],
    "golden plane": presets.golden()[1],
    "octagonal four-wave": presets.octagonal()[1],
}
for name, frame in frames.items():
    d = classify_direction(frame, K=6)
    print(f"{name:26s} {d.label:22s} in-plane {d.witnesses_in_plane[:2]} orthogonal {d.witnesses_orthogonal[:2]}")

# How close do integer translates of the plane come to each other?
for name in ("golden plane", "octagonal four-wave"):
    print(name, "min transverse distance of integer shifts:", min_integer_shift_distance(frames[name], M=6))
