"""Named test potentials, each returned as (periodic function, frame)."""
from __future__ import annotations

import math

import numpy as np

from .embedding import identity_frame, make_frame
from .errors import InputError
from .potential import PeriodicFunction, Wave, cosine_sum, from_superposition

GOLDEN = (1 + math.sqrt(5)) / 2


def separable():
    """cos 2πx + cos 2πy on the coordinate plane."""
    return cosine_sum(2, [[1, 0], [0, 1]]), identity_frame(2)


def single_cosine():
    """cos 2πx on the coordinate plane: every level line is straight."""
    return cosine_sum(2, [[1, 0]]), identity_frame(2)


def triangular():
    """Three unit waves at 0, 120 and 240 degrees."""
    return from_superposition([Wave.from_degrees(t) for t in (0, 120, 240)])


def octagonal():
    """Four unit waves at 0, 45, 90 and 135 degrees (four quasiperiods)."""
    return from_superposition([Wave.from_degrees(t) for t in (0, 45, 90, 135)])


def golden():
    """cos 2πx + cos 2πy + cos(2π(x + y)/φ), a restriction of cos z1 + cos z2 + cos z3 in R^3."""
    F = cosine_sum(3, np.eye(3, dtype=int))
    return F, make_frame([[1, 0, 1 / GOLDEN], [0, 1, 1 / GOLDEN]])


def separable_lifted(transverse: float = 0.3):
    """The separable potential in R^3 plus a cosine along the transverse axis."""
    F = cosine_sum(3, np.eye(3, dtype=int), [1.0, 1.0, transverse])
    return F, identity_frame(3, 2)


def separable3():
    """cos 2πx + cos 2πy + cos 2πz on the whole of R^3."""
    return cosine_sum(3, np.eye(3, dtype=int)), identity_frame(3, 3)


def single_cosine3():
    return cosine_sum(3, [[1, 0, 0]]), identity_frame(3, 3)


def quartic_generic():
    """Sum of four coordinate cosines on R^4, restricted to a fixed irrational 3-frame."""
    F = cosine_sum(4, np.eye(4, dtype=int))
    raw = [[1, 0, 0, math.sqrt(2) - 1], [0, 1, 0, math.sqrt(3) - 1], [0, 0, 1, GOLDEN - 1]]
    return F, make_frame(raw)


PRESETS = {
    "separable": separable,
    "single-cosine": single_cosine,
    "triangular": triangular,
    "octagonal": octagonal,
    "golden": golden,
    "separable-lifted": separable_lifted,
    "separable3": separable3,
    "single-cosine3": single_cosine3,
    "quartic-generic": quartic_generic,
}

PLANAR = ("separable", "single-cosine", "triangular", "octagonal", "golden", "separable-lifted")


def preset(name: str) -> tuple[PeriodicFunction, object]:
    try:
        return PRESETS[name]()
    except KeyError:
        raise InputError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
