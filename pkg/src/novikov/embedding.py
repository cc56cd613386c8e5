"""Affine n-planes in R^N and restriction of periodic functions to them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ResourceError
from .potential import TWO_PI, PeriodicFunction, hessian_bound, lipschitz_bound

RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EmbeddingFrame:
    """Orthonormal basis u_1..u_n (rows of ``basis``) plus shift a in R^N.

    ``raw`` keeps the vectors the frame was built from and ``transform`` the
    lower-triangular T with raw = T @ basis, so raw coordinates x map to local
    orthonormal coordinates x @ T.
    """
    basis: np.ndarray
    shift: np.ndarray
    raw: np.ndarray
    transform: np.ndarray

    @property
    def N(self) -> int:
        return self.basis.shape[1]

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    def lift(self, x) -> np.ndarray:
        """Point a + sum x^i u_i of R^N for local coordinates x (..., n)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.n,):
            raise InputError(f"local coordinates must have trailing dimension {self.n}")
        return self.shift + x @ self.basis

    def lift_raw(self, x) -> np.ndarray:
        """Point a + sum x^i raw_i, i.e. the embedding in the caller's original coordinates."""
        return self.lift(self.local_from_raw(x))

    def local_from_raw(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.transform

    def with_shift(self, shift) -> "EmbeddingFrame":
        shift = np.asarray(shift, dtype=float)
        if shift.shape != (self.N,):
            raise InputError(f"shift must have length {self.N}")
        return EmbeddingFrame(self.basis, _frozen(shift), self.raw, self.transform)

    def transverse_basis(self) -> np.ndarray:
        """Orthonormal basis (rows) of the orthogonal complement of the plane."""
        if self.N == self.n:
            return np.zeros((0, self.N))
        _, _, vt = np.linalg.svd(self.basis)
        return vt[self.n:]

    def project_out(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return v - (v @ self.basis.T) @ self.basis

    def to_dict(self) -> dict:
        return {"N": self.N, "n": self.n, "basis_raw": self.raw.tolist(), "shift": self.shift.tolist()}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def make_frame(vectors, shift=None) -> EmbeddingFrame:
    """Ordered Gram-Schmidt (two passes) on the given vectors; shift kept verbatim."""
    raw = np.array(vectors, dtype=float)
    if raw.ndim != 2 or raw.shape[0] < 1:
        raise InputError("direction vectors must form a non-empty 2-d array")
    n, N = raw.shape
    if n > N:
        raise InputError(f"subspace dimension {n} exceeds ambient dimension {N}")
    shift = np.zeros(N) if shift is None else np.asarray(shift, dtype=float)
    if shift.shape != (N,):
        raise InputError(f"shift must have length {N}")
    if not np.all(np.isfinite(raw)) or not np.all(np.isfinite(shift)):
        raise InputError("frame data must be finite")
    basis = np.zeros((n, N))
    T = np.zeros((n, n))
    for i in range(n):
        v = raw[i].copy()
        norm_in = np.linalg.norm(v)
        for _ in range(2):
            coef = basis[:i] @ v
            v -= coef @ basis[:i]
            T[i, :i] += coef
        pivot = np.linalg.norm(v)
        if norm_in == 0.0 or pivot < RANK_TOL * norm_in:
            raise InputError(f"direction vector {i} is linearly dependent on the previous ones")
        basis[i] = v / pivot
        T[i, i] = pivot
    return EmbeddingFrame(_frozen(basis), _frozen(shift), _frozen(raw), _frozen(T))


def identity_frame(N: int, n: int = 2, shift=None) -> EmbeddingFrame:
    return make_frame(np.eye(N)[:n], shift)


class QuasiperiodicFunction:
    """Restriction f(x) = F(a + sum x^i u_i) of a periodic F to a frame.

    Stored as projected frequencies kappa_t = (k_t . u_1, ..., k_t . u_n) and
    effective phases 2 pi k_t . a + phi_t.
    """

    def __init__(self, source: PeriodicFunction, frame: EmbeddingFrame):
        if source.dimension != frame.N:
            raise InputError(f"function dimension {source.dimension} != frame dimension {frame.N}")
        self.source = source
        self.frame = frame
        k = source.frequencies.astype(float)
        self.kappa = k @ frame.basis.T
        self.effective_phase = TWO_PI * (k @ frame.shift) + source.phases
        self.amplitudes = source.amplitudes
        self.constant = source.constant
        self._C = lipschitz_bound(source)

    @property
    def n(self) -> int:
        return self.frame.n

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.n,):
            raise InputError(f"points must have trailing dimension {self.n}")
        # phases reduced mod 2 pi before adding keeps large shifts accurate
        out = self.constant + np.cos(TWO_PI * (x @ self.kappa.T) + np.mod(self.effective_phase, TWO_PI)) @ self.amplitudes
        return float(out) if x.ndim == 1 else out

    __call__ = evaluate

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        arg = TWO_PI * (x @ self.kappa.T) + np.mod(self.effective_phase, TWO_PI)
        return -TWO_PI * (np.sin(arg) * self.amplitudes) @ self.kappa

    def lipschitz_bound(self) -> float:
        """Lipschitz constant inherited from F; restriction cannot increase it."""
        return self._C

    def hessian_bound(self) -> float:
        if not self.amplitudes.size:
            return 0.0
        return float(TWO_PI**2 * np.sum(self.amplitudes * np.sum(self.kappa**2, axis=1)))

    def period_scale(self) -> float:
        """1 / max |kappa|; the shortest wavelength present in the plane."""
        norms = np.linalg.norm(self.kappa, axis=1) if self.amplitudes.size else np.zeros(0)
        top = norms.max() if norms.size else 0.0
        return 1.0 / top if top > 1e-12 else 1.0

    def grid(self, axes, chunk_elems: int = 1 << 22) -> np.ndarray:
        """Values on the tensor grid of 1-d coordinate arrays.

        Output is indexed [i_{n-1}, ..., i_0] (last local axis first), so a
        2-d result is ``values[row=y, col=x]``. Each term is evaluated as a
        product of 1-d complex exponentials, chunked along the leading axis.
        """
        axes = [np.asarray(a, dtype=float) for a in axes]
        if len(axes) != self.n:
            raise InputError(f"need {self.n} coordinate axes")
        shape = tuple(a.size for a in reversed(axes))
        out = np.full(shape, self.constant)
        phase = np.mod(self.effective_phase, TWO_PI)
        factors = [np.exp(1j * TWO_PI * np.outer(self.kappa[:, d], axes[d])) for d in range(self.n)]
        row_elems = max(1, int(np.prod(shape[1:])))
        step = max(1, chunk_elems // row_elems)
        for t in range(self.amplitudes.size):
            inner = self.amplitudes[t] * np.exp(1j * phase[t]) * factors[0][t]
            if self.n == 1:
                out += inner.real
                continue
            for d in range(1, self.n - 1):
                inner = np.multiply.outer(factors[d][t], inner)
            lead = factors[-1][t]
            for s in range(0, lead.size, step):
                out[s:s + step] += np.multiply.outer(lead[s:s + step], inner).real
        return out

    def shifted(self, offset) -> "QuasiperiodicFunction":
        """Restriction to the parallel plane through a + offset."""
        return QuasiperiodicFunction(self.source, self.frame.with_shift(self.frame.shift + np.asarray(offset, float)))


def restrict(F: PeriodicFunction, frame: EmbeddingFrame) -> QuasiperiodicFunction:
    return QuasiperiodicFunction(F, frame)


def integer_shift(frame: EmbeddingFrame, m) -> EmbeddingFrame:
    m = np.asarray(m)
    if m.shape != (frame.N,):
        raise InputError(f"integer shift must have length {frame.N}")
    if not np.all(np.mod(m, 1) == 0):
        raise InputError("shift vector must be integral")
    return frame.with_shift(frame.shift + m.astype(float))


def transverse_distance(frame1: EmbeddingFrame, frame2: EmbeddingFrame) -> float:
    """Norm of a2 - a1 with its in-plane part removed."""
    if frame1.basis.shape != frame2.basis.shape or not np.allclose(frame1.basis, frame2.basis, rtol=0, atol=1e-12):
        raise InputError("frames must share the same basis")
    return float(np.linalg.norm(frame1.project_out(frame2.shift - frame1.shift)))


@dataclass
class DirectionClass:
    label: str
    witnesses_in_plane: list = field(default_factory=list)
    witnesses_orthogonal: list = field(default_factory=list)
    K: int = 0
    eps: float = 0.0
    advisory: bool = True

    @property
    def witnesses(self) -> list:
        return self.witnesses_in_plane + self.witnesses_orthogonal

    def to_dict(self) -> dict:
        return {"label": self.label, "K": self.K, "eps": self.eps,
                "in_plane": [list(map(int, k)) for k in self.witnesses_in_plane],
                "orthogonal": [list(map(int, k)) for k in self.witnesses_orthogonal]}


def _primitive_half_lattice(N: int, K: int, chunk: int = 1 << 18):
    """Primitive integer vectors with |k|_inf <= K, one per +/- pair, in chunks."""
    total = (2 * K + 1) ** N
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        k = np.empty((idx.size, N), dtype=np.int64)
        for d in range(N - 1, -1, -1):
            k[:, d] = idx % (2 * K + 1) - K
            idx //= 2 * K + 1
        first = np.argmax(k != 0, axis=1)
        lead = k[np.arange(k.shape[0]), first]
        g = np.gcd.reduce(np.abs(k), axis=1)
        keep = (lead > 0) & (g == 1)
        yield k[keep]


def classify_direction(frame: EmbeddingFrame, K: int = 10, eps: float = 1e-8,
                       budget: int = 5 * 10**7) -> DirectionClass:
    """Bounded integer-relation search over |k|_inf <= K. Advisory only.

    in-plane witness: |k - P k| < eps |k| (k lies in the direction);
    orthogonal witness: |k . u_i| < eps for all i (direction lies in the
    integer hyperplane k . z = const).
    """
    if K < 1 or eps <= 0:
        raise InputError("need K >= 1 and eps > 0")
    if (2 * K + 1) ** frame.N > budget:
        raise ResourceError(f"(2K+1)^N = {(2 * K + 1) ** frame.N} vectors exceed the budget")
    inplane, ortho = [], []
    U = frame.basis
    for k in _primitive_half_lattice(frame.N, K):
        kf = k.astype(float)
        proj = kf @ U.T
        resid = np.linalg.norm(kf - proj @ U, axis=1)
        norm = np.linalg.norm(kf, axis=1)
        inplane.extend(tuple(int(v) for v in row) for row in k[resid < eps * norm])
        ortho.extend(tuple(int(v) for v in row) for row in k[np.all(np.abs(proj) < eps, axis=1)])
    rank = np.linalg.matrix_rank(np.array(inplane, float)) if inplane else 0
    if rank >= 2:
        label = "rational-content"
    elif rank == 1:
        label = "partially-irrational"
    elif ortho:
        label = "completely-irrational"
    else:
        label = "possibly-non-special"
    return DirectionClass(label, inplane, ortho, K, eps)


def min_integer_shift_distance(frame: EmbeddingFrame, M: int = 40) -> tuple[float, tuple[int, ...]]:
    """Smallest transverse distance between the frame and a nonzero integer shift with |m|_inf <= M."""
    best, arg = math.inf, None
    perp = frame.transverse_basis()
    for m in _primitive_half_lattice(frame.N, M):
        if not m.size:
            continue
        d = np.linalg.norm(m.astype(float) @ perp.T, axis=1)
        i = int(np.argmin(d))
        if d[i] < best:
            best, arg = float(d[i]), tuple(int(v) for v in m[i])
    return best, arg


def transverse_offsets(frame: EmbeddingFrame, count: int, seed: int = 0) -> np.ndarray:
    """Shift offsets spread over the transverse image of the unit cell.

    Offset 0 (the frame's own plane) comes first; the rest are scrambled
    Halton points s in [0, 1)^N with their in-plane part removed. Every plane
    of the direction is an integer translate of a plane through such a point.
    When the plane has no transverse directions only the zero offset exists.
    """
    from scipy.stats import qmc

    if count < 1:
        raise InputError("need at least one shift sample")
    if frame.N == frame.n:
        return np.zeros((1, frame.N))
    out = [np.zeros(frame.N)]
    if count > 1:
        pts = qmc.Halton(d=frame.N, scramble=True, seed=np.random.default_rng(seed)).random(count - 1)
        out.extend(frame.project_out(p) for p in pts)
    return np.array(out)
