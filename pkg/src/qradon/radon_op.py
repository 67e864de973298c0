"""The discrete fractional Radon transform along a paraboloid.

J f(n, t) = sum_{m != 0} f(n - m, t - Q1(m)) Q2(m)^{-k lambda/2} acts on
finitely supported functions on Z^k x Z.  Two evaluation paths are
provided: an exact direct sum (the oracle) and a periodic spectral path
that multiplies DFTs with the truncated, periodized kernel.  The spectral
path is validated against direct cyclic convolution with the identical
kernel, which is an exact finite-Fourier identity rather than an
approximation claim about the infinite operator.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .quadform import QuadraticForm

Point = tuple[int, ...]  # (n_1, ..., n_k, t)


@dataclass(frozen=True)
class LatticeFunction:
    """Finitely supported function on Z^k x Z; zero values are not stored."""

    dim: int
    support: Mapping[Point, complex]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        cleaned = {}
        for key, val in self.support.items():
            key = tuple(int(c) for c in key)
            if len(key) != self.dim + 1:
                raise ValueError("support keys must have length dim + 1")
            val = complex(val)
            if val != 0:
                cleaned[key] = val
        object.__setattr__(self, "support", cleaned)

    @staticmethod
    def delta(dim: int, point: Sequence[int] | None = None) -> "LatticeFunction":
        pt = tuple(point) if point is not None else (0,) * (dim + 1)
        return LatticeFunction(dim, {pt: 1.0})

    def __call__(self, point: Sequence[int]) -> complex:
        return self.support.get(tuple(int(c) for c in point), 0.0 + 0.0j)

    def scaled(self, factor: complex) -> "LatticeFunction":
        return LatticeFunction(
            self.dim, {k: factor * v for k, v in self.support.items()}
        )

    def shifted(self, offset: Sequence[int]) -> "LatticeFunction":
        off = tuple(int(c) for c in offset)
        if len(off) != self.dim + 1:
            raise ValueError("offset must have length dim + 1")
        return LatticeFunction(
            self.dim,
            {
                tuple(a + b for a, b in zip(k, off)): v
                for k, v in self.support.items()
            },
        )

    def plus(self, other: "LatticeFunction") -> "LatticeFunction":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.support)
        for k, v in other.support.items():
            out[k] = out.get(k, 0.0) + v
        return LatticeFunction(self.dim, out)

    def norm(self, p: float) -> float:
        vals = np.abs(np.array(list(self.support.values()), dtype=complex))
        if vals.size == 0:
            return 0.0
        if p == math.inf:
            return float(vals.max())
        return float((vals**p).sum() ** (1.0 / p))


@dataclass(frozen=True)
class PeriodicGrid:
    """Complex values on (Z/N)^k x (Z/M); spatial axes first, time last."""

    spatial_n: int
    temporal_m: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.spatial_n < 1 or self.temporal_m < 1:
            raise ValueError("grid dims must be positive")
        values = np.asarray(self.values, dtype=complex)
        k = values.ndim - 1
        if k < 1 or values.shape != (self.spatial_n,) * k + (self.temporal_m,):
            raise ValueError("values shape must be (N,)*k + (M,)")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.ndim - 1


def _kernel_value(q_form: QuadraticForm, lam: complex, qm: int) -> complex:
    """Q(m)^{-k lambda/2}, principal branch on the positive integer base."""
    return cmath.exp(-q_form.dim * complex(lam) / 2.0 * math.log(qm))


def _window_points(window: Sequence[tuple[int, int]]) -> Iterable[Point]:
    """Lexicographic points of a closed box [(lo, hi)] per axis."""
    ranges = [range(lo, hi + 1) for lo, hi in window]
    import itertools

    return itertools.product(*ranges)


def apply_direct(
    q1: QuadraticForm,
    q2: QuadraticForm,
    lam: complex,
    f: LatticeFunction,
    window: Sequence[tuple[int, int]],
    threads: int = 1,
) -> LatticeFunction:
    """J f on every point of the closed output box `window`, exactly.

    m ranges exactly over differences n - n' with n' in the spatial
    support of f, so no truncation is involved; the inner sum runs in a
    fixed lexicographic m order for bit-stable results.
    """
    k = f.dim
    if q1.dim != k or q2.dim != k:
        raise ValueError("form dimension must match the function dimension")
    if len(window) != k + 1:
        raise ValueError("window must give k spatial ranges plus a t range")
    spatial = sorted({key[:-1] for key in f.support})
    t_lo, t_hi = window[-1]

    def eval_point(point: Point) -> complex:
        n, t = point[:-1], point[-1]
        total = 0.0 + 0.0j
        for n_prime in spatial:
            m = tuple(a - b for a, b in zip(n, n_prime))
            if all(c == 0 for c in m):
                continue
            q1m = q1(m)
            val = f.support.get(n_prime + (t - q1m,))
            if val is None:
                continue
            total += val * _kernel_value(q2, lam, q2(m))
        return total

    points = list(_window_points(window))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(eval_point, points, chunksize=64))
    else:
        results = [eval_point(p) for p in points]
    out = {p: v for p, v in zip(points, results) if v != 0}
    return LatticeFunction(k, out)


def periodized_kernel(
    q_form: QuadraticForm,
    lam: complex,
    spatial_n: int,
    temporal_m: int,
    radius: int,
) -> PeriodicGrid:
    """Truncated kernel Q(m)^{-k lambda/2} delta_{t = Q(m)} folded onto the grid."""
    if spatial_n & (spatial_n - 1) or temporal_m & (temporal_m - 1):
        raise ValueError("grid dims must be powers of two")
    if radius > spatial_n // 2:
        raise ValueError("kernel radius exceeds N/2")
    k = q_form.dim
    shape = (spatial_n,) * k + (temporal_m,)
    values = np.zeros(shape, dtype=complex)
    import itertools

    for m in itertools.product(range(-radius, radius + 1), repeat=k):
        if all(c == 0 for c in m):
            continue
        qm = q_form(m)
        pos = tuple(c % spatial_n for c in m) + (qm % temporal_m,)
        values[pos] += _kernel_value(q_form, lam, qm)
    return PeriodicGrid(spatial_n, temporal_m, values)


def apply_spectral_periodic(
    q_form: QuadraticForm,
    lam: complex,
    grid: PeriodicGrid,
    radius: int,
) -> PeriodicGrid:
    """Cyclic J on the periodic grid via DFT multiplication."""
    if grid.dim != q_form.dim:
        raise ValueError("form dimension must match the grid dimension")
    kernel = periodized_kernel(
        q_form, lam, grid.spatial_n, grid.temporal_m, radius
    )
    out = np.fft.ifftn(np.fft.fftn(kernel.values) * np.fft.fftn(grid.values))
    return PeriodicGrid(grid.spatial_n, grid.temporal_m, out)


def cyclic_convolve_direct(
    q_form: QuadraticForm,
    lam: complex,
    grid: PeriodicGrid,
    radius: int,
) -> PeriodicGrid:
    """The same cyclic operator by explicit rolls; oracle for the DFT path."""
    if grid.dim != q_form.dim:
        raise ValueError("form dimension must match the grid dimension")
    if radius > grid.spatial_n // 2:
        raise ValueError("kernel radius exceeds N/2")
    k = q_form.dim
    out = np.zeros_like(np.asarray(grid.values, dtype=complex))
    import itertools

    for m in itertools.product(range(-radius, radius + 1), repeat=k):
        if all(c == 0 for c in m):
            continue
        qm = q_form(m)
        shift = tuple(m) + (qm % grid.temporal_m,)
        out += _kernel_value(q_form, lam, qm) * np.roll(
            grid.values, shift, axis=tuple(range(k + 1))
        )
    return PeriodicGrid(grid.spatial_n, grid.temporal_m, out)


def norm_ratio(
    q1: QuadraticForm,
    q2: QuadraticForm,
    lam: complex,
    f: LatticeFunction,
    p: float,
    q: float,
    window: Sequence[tuple[int, int]],
    threads: int = 1,
) -> float:
    """||J f||_q on the window divided by ||f||_p (an operator-norm lower bound)."""
    denom = f.norm(p)
    if denom == 0.0:
        raise ValueError("f must be nonzero")
    image = apply_direct(q1, q2, lam, f, window, threads=threads)
    return image.norm(q) / denom
