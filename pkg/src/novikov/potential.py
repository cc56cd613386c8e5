"""N-periodic functions as finite trigonometric sums.

F(z) = const + sum_t a_t cos(2 pi k_t . z + phi_t), periodic under the integer
lattice by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, ResourceError

TWO_PI = 2.0 * math.pi

#: default cap on streamed grid points for range estimation
RANGE_POINT_BUDGET = 2 * 10**8


@dataclass(frozen=True)
class FrequencyComponent:
    k: tuple[int, ...]
    amplitude: float
    phase: float = 0.0


@dataclass(frozen=True)
class RangeEstimate:
    f_min_est: float
    f_max_est: float
    grid_resolution: int
    slack: float = 0.0

    @property
    def bracket(self) -> tuple[float, float]:
        """Interval guaranteed to contain the true range."""
        return (self.f_min_est - self.slack, self.f_max_est + self.slack)


def _canonical_k(k: np.ndarray) -> tuple[np.ndarray, int]:
    """Flip k so its first nonzero entry is positive; returns (k, sign)."""
    nz = np.flatnonzero(k)
    if nz.size and k[nz[0]] < 0:
        return -k, -1
    return k, 1


class PeriodicFunction:
    """Immutable finite cosine sum on R^N.

    Terms sharing a frequency (up to sign) are merged by phasor addition, so
    the stored representation is canonical: every k is nonzero with positive
    leading entry, and the k = 0 part is kept as ``constant``.
    """

    def __init__(self, dimension: int, terms: Iterable[FrequencyComponent | dict | tuple]):
        if int(dimension) < 1:
            raise InputError(f"dimension must be positive, got {dimension}")
        self.dimension = int(dimension)
        phasors: dict[tuple[int, ...], complex] = {}
        scale: dict[tuple[int, ...], float] = {}
        single: dict[tuple[int, ...], tuple[float, float] | None] = {}
        constant = 0.0
        for term in terms:
            term = _as_component(term)
            k = np.asarray(term.k, dtype=np.int64)
            if k.shape != (self.dimension,):
                raise InputError(f"frequency {term.k} does not have length {self.dimension}")
            if not np.all(np.asarray(term.k) == k):
                raise InputError(f"frequency {term.k} is not an integer vector")
            if not (math.isfinite(term.amplitude) and math.isfinite(term.phase)):
                raise InputError("amplitude and phase must be finite")
            if not k.any():
                constant += term.amplitude * math.cos(term.phase)
                continue
            k, sign = _canonical_k(k)
            key = tuple(int(v) for v in k)
            phasors[key] = phasors.get(key, 0j) + term.amplitude * complex(
                math.cos(sign * term.phase), math.sin(sign * term.phase))
            scale[key] = scale.get(key, 0.0) + abs(term.amplitude)
            # a lone term keeps its exact amplitude and phase
            a, ph = float(term.amplitude), sign * float(term.phase)
            single[key] = None if key in single else ((a, ph) if a >= 0 else (-a, ph + math.pi))

        # exact cancellation leaves rounding residue; drop it
        keys = sorted(key for key, p in phasors.items() if abs(p) > 1e-14 * scale[key])
        self.constant = float(constant)
        self._k = np.array(keys, dtype=np.int64).reshape(len(keys), self.dimension)
        ph = np.array([phasors[key] for key in keys], dtype=complex)
        self._amp = np.abs(ph)
        self._phase = np.angle(ph)
        for i, key in enumerate(keys):
            if single[key] is not None:
                self._amp[i], self._phase[i] = single[key]
        self._phase = np.mod(self._phase, TWO_PI)
        for arr in (self._k, self._amp, self._phase):
            arr.setflags(write=False)

    # -- representation -------------------------------------------------
    @property
    def frequencies(self) -> np.ndarray:
        return self._k

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amp

    @property
    def phases(self) -> np.ndarray:
        return self._phase

    @property
    def terms(self) -> list[FrequencyComponent]:
        out = [FrequencyComponent(tuple(int(v) for v in k), float(a), float(p))
               for k, a, p in zip(self._k, self._amp, self._phase)]
        if self.constant != 0.0:
            out.insert(0, FrequencyComponent((0,) * self.dimension, self.constant, 0.0))
        return out

    def __repr__(self):
        return f"PeriodicFunction(N={self.dimension}, terms={len(self._amp)}, constant={self.constant:g})"

    def __eq__(self, other):
        if not isinstance(other, PeriodicFunction):
            return NotImplemented
        return (self.dimension == other.dimension and self.constant == other.constant
                and np.array_equal(self._k, other._k)
                and np.array_equal(self._amp, other._amp)
                and np.array_equal(self._phase, other._phase))

    __hash__ = None

    def amplitude_sum(self) -> float:
        return float(np.sum(self._amp))

    # -- evaluation -----------------------------------------------------
    def _check_points(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.shape[-1:] != (self.dimension,):
            raise InputError(f"points must have trailing dimension {self.dimension}, got shape {z.shape}")
        return z

    def __call__(self, z):
        return evaluate(self, z)


def _as_component(term) -> FrequencyComponent:
    if isinstance(term, FrequencyComponent):
        return term
    if isinstance(term, dict):
        return FrequencyComponent(tuple(term["k"]), float(term["amplitude"]), float(term.get("phase", 0.0)))
    k, amplitude, *rest = term
    return FrequencyComponent(tuple(k), float(amplitude), float(rest[0]) if rest else 0.0)


def cosine_sum(dimension: int, frequencies: Sequence[Sequence[int]], amplitudes=None, phases=None) -> PeriodicFunction:
    """Shorthand: ``cosine_sum(2, [(1, 0), (0, 1)])`` is cos 2pi z1 + cos 2pi z2."""
    n = len(frequencies)
    amplitudes = [1.0] * n if amplitudes is None else amplitudes
    phases = [0.0] * n if phases is None else phases
    return PeriodicFunction(dimension, [FrequencyComponent(tuple(k), float(a), float(p))
                                        for k, a, p in zip(frequencies, amplitudes, phases)])


def evaluate(F: PeriodicFunction, z) -> float | np.ndarray:
    """F at a point (shape (N,)) or a batch of points (shape (..., N))."""
    z = F._check_points(z)
    arg = TWO_PI * (z @ F.frequencies.T.astype(float)) + F.phases
    out = F.constant + np.cos(arg) @ F.amplitudes
    return float(out) if z.ndim == 1 else out


def gradient(F: PeriodicFunction, z) -> np.ndarray:
    """Exact gradient; component j is sum -2 pi a k_j sin(2 pi k.z + phi)."""
    z = F._check_points(z)
    k = F.frequencies.astype(float)
    arg = TWO_PI * (z @ k.T) + F.phases
    return -TWO_PI * (np.sin(arg) * F.amplitudes) @ k


def lipschitz_bound(F: PeriodicFunction) -> float:
    """C = 2 pi sum |a| |k|_2, an upper bound for sup |grad F|."""
    if not F.amplitudes.size:
        return 0.0
    return float(TWO_PI * np.sum(F.amplitudes * np.linalg.norm(F.frequencies, axis=1)))


def hessian_bound(F: PeriodicFunction) -> float:
    """4 pi^2 sum |a| |k|^2, an upper bound for the operator norm of the Hessian."""
    if not F.amplitudes.size:
        return 0.0
    return float(TWO_PI**2 * np.sum(F.amplitudes * np.sum(F.frequencies.astype(float) ** 2, axis=1)))


def range_estimate(F: PeriodicFunction, resolution: int = 64, budget: int = RANGE_POINT_BUDGET,
                   chunk: int = 1 << 20) -> RangeEstimate:
    """Min and max of F over the uniform grid on [0, 1)^N, streamed in chunks.

    The returned ``slack`` = C h sqrt(N) / 2 widens the grid extrema into a
    bracket that provably contains [F_min, F_max].
    """
    resolution = int(resolution)
    if resolution < 2:
        raise InputError("resolution must be at least 2")
    N = F.dimension
    if N * math.log(resolution) > math.log(budget):
        raise ResourceError(f"{resolution}^{N} grid points exceed the budget of {budget}")
    total = resolution**N
    lo, hi = math.inf, -math.inf
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        pts = np.empty((idx.size, N))
        for d in range(N - 1, -1, -1):
            pts[:, d] = idx % resolution
            idx //= resolution
        vals = evaluate(F, pts / resolution)
        lo = min(lo, float(vals.min()))
        hi = max(hi, float(vals.max()))
    slack = lipschitz_bound(F) * math.sqrt(N) / (2.0 * resolution)
    return RangeEstimate(lo, hi, resolution, slack)


@dataclass(frozen=True)
class Wave:
    """One planar plane wave: amplitude cos(2 pi e(theta).x / period + phase)."""
    theta: float
    period: float = 1.0
    amplitude: float = 1.0
    phase: float = 0.0

    @classmethod
    def from_degrees(cls, theta_deg: float, period: float = 1.0, amplitude: float = 1.0, phase: float = 0.0):
        return cls(math.radians(theta_deg), period, amplitude, phase)

    @property
    def wavevector(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)]) / self.period


def superposition_value(waves: Sequence[Wave], x) -> np.ndarray:
    """Direct planar formula sum a cos(2 pi e.x / lambda + phase); the oracle for from_superposition."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape[:-1])
    for w in waves:
        out = out + w.amplitude * np.cos(TWO_PI * (x @ w.wavevector) + w.phase)
    return out


def from_superposition(waves: Sequence[Wave | dict]):
    """Lift a superposition of M plane waves to an M-periodic function and a plane.

    Returns ``(F, frame)`` with F(z) = sum a_i cos(2 pi z^i + phase_i) on R^M and
    ``frame`` spanned by the columns of the M x 2 matrix whose row i is
    e_i / lambda_i, so that F(frame.lift_raw(x)) reproduces the planar sum.
    """
    from .embedding import make_frame

    waves = [w if isinstance(w, Wave) else _wave_from_dict(w) for w in waves]
    if len(waves) < 2:
        raise InputError("a superposition needs at least two waves")
    for w in waves:
        if not w.period > 0:
            raise InputError(f"wave period must be positive, got {w.period}")
    A = np.array([w.wavevector for w in waves])
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= 1e-10 * s[0]:
        raise InputError("all wave vectors are parallel; the superposition is one-dimensional")
    M = len(waves)
    F = PeriodicFunction(M, [FrequencyComponent(tuple(int(i == j) for j in range(M)), w.amplitude, w.phase)
                             for i, w in enumerate(waves)])
    frame = make_frame(A.T, np.zeros(M))
    return F, frame


def _wave_from_dict(d: dict) -> Wave:
    if "theta_deg" in d:
        theta = math.radians(float(d["theta_deg"]))
    else:
        theta = float(d["theta"])
    return Wave(theta, float(d.get("period", 1.0)), float(d.get("amplitude", 1.0)), float(d.get("phase", 0.0)))
