"""Positive definite integral quadratic forms Q(x) = (1/2) x^T A x.

A is an integer symmetric matrix with even diagonal, so Q takes integer
values on the lattice.  The adjoint form uses A^{-1} stored exactly as an
integer adjugate over det A.  Eigenvalue bounds are certified: Gershgorin
intervals refined by bisection with a Cholesky positive-definiteness test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

_BISECT_ITERS = 64
_SAFETY = 1e-9  # relative slack applied to certified bounds


def _int_det(a: list[list[int]]) -> int:
    """Exact integer determinant by Laplace expansion (small matrices)."""
    k = len(a)
    if k == 1:
        return a[0][0]
    total = 0
    for j in range(k):
        if a[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1 :] for row in a[1:]]
        total += (-1) ** j * a[0][j] * _int_det(minor)
    return total


def _adjugate(a: list[list[int]]) -> list[list[int]]:
    """Exact integer adjugate, so that a . adj(a) = det(a) I."""
    k = len(a)
    if k == 1:
        return [[1]]
    adj = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            minor = [
                [a[r][c] for c in range(k) if c != j] for r in range(k) if r != i
            ]
            adj[j][i] = (-1) ** (i + j) * _int_det(minor)
    return adj


def _is_pd(mat: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(mat)
        return True
    except np.linalg.LinAlgError:
        return False


@dataclass(frozen=True)
class QuadraticForm:
    """Integer symmetric matrix A with even diagonal, positive definite."""

    matrix: tuple[tuple[int, ...], ...]
    dim: int = field(init=False)
    det: int = field(init=False)
    eig_min: float = field(init=False)
    eig_max: float = field(init=False)

    def __post_init__(self) -> None:
        rows = [list(map(int, row)) for row in self.matrix]
        k = len(rows)
        if k == 0 or any(len(row) != k for row in rows):
            raise ValueError("matrix must be square and non-empty")
        for i in range(k):
            if rows[i][i] % 2 != 0:
                raise ValueError("diagonal entries must be even")
            for j in range(k):
                if rows[i][j] != rows[j][i]:
                    raise ValueError("matrix must be symmetric")
        # Sylvester: all leading principal minors strictly positive
        for m in range(1, k + 1):
            if _int_det([row[:m] for row in rows[:m]]) <= 0:
                raise ValueError("matrix must be positive definite")
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in rows))
        object.__setattr__(self, "dim", k)
        object.__setattr__(self, "det", _int_det(rows))
        lo, hi = self._certified_eig_bounds(np.array(rows, dtype=float))
        object.__setattr__(self, "eig_min", lo)
        object.__setattr__(self, "eig_max", hi)

    @staticmethod
    def _certified_eig_bounds(a: np.ndarray) -> tuple[float, float]:
        k = a.shape[0]
        radii = np.sum(np.abs(a), axis=1) - np.abs(np.diag(a))
        gersh_lo = float(np.min(np.diag(a) - radii))
        gersh_hi = float(np.max(np.diag(a) + radii))
        eye = np.eye(k)
        # t < lambda_min  iff  A - tI is positive definite
        lo, hi = max(gersh_lo, 0.0), gersh_hi
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if _is_pd(a - mid * eye):
                lo = mid
            else:
                hi = mid
        eig_min = lo * (1.0 - _SAFETY)
        # t > lambda_max  iff  tI - A is positive definite
        lo, hi = 0.0, gersh_hi
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if _is_pd(mid * eye - a):
                hi = mid
            else:
                lo = mid
        eig_max = hi * (1.0 + _SAFETY)
        return eig_min, eig_max

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    def __call__(self, x: Sequence[int]) -> int:
        return evaluate(self, x)


@dataclass(frozen=True)
class AdjointForm:
    """Exact rational A^{-1}: integer numerator matrix over denominator det A."""

    dim: int
    numerator: tuple[tuple[int, ...], ...]
    denominator: int

    def evaluate_exact(self, x: Sequence[int]) -> Fraction:
        """Q*(x) = (1/2) x^T A^{-1} x as an exact rational."""
        k = self.dim
        if len(x) != k:
            raise ValueError("dimension mismatch")
        total = 0
        for i in range(k):
            for j in range(k):
                total += int(x[i]) * self.numerator[i][j] * int(x[j])
        return Fraction(total, 2 * self.denominator)

    def evaluate(self, x: Sequence[float]) -> float:
        """Q*(x) on real vectors, in floating point."""
        v = np.asarray(x, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError("dimension mismatch")
        num = np.array(self.numerator, dtype=float)
        return 0.5 * float(v @ num @ v) / self.denominator

    @property
    def array(self) -> np.ndarray:
        """A^{-1} as a float matrix."""
        return np.array(self.numerator, dtype=float) / self.denominator


def evaluate(q: QuadraticForm, x: Sequence[int]) -> int:
    """Q(x) = (1/2) x^T A x, exact in integer arithmetic."""
    k = q.dim
    if len(x) != k:
        raise ValueError("dimension mismatch")
    total = 0
    for i in range(k):
        for j in range(k):
            total += int(x[i]) * q.matrix[i][j] * int(x[j])
    assert total % 2 == 0
    return total // 2


def evaluate_batch(q: QuadraticForm, x: np.ndarray) -> np.ndarray:
    """Q on the rows of x (..., k), vectorized; int64 in, int64 out."""
    a = q.array
    return np.einsum("...i,ij,...j->...", x, a, x) // 2


def adjoint(q: QuadraticForm) -> AdjointForm:
    adj = _adjugate([list(row) for row in q.matrix])
    return AdjointForm(
        dim=q.dim,
        numerator=tuple(tuple(row) for row in adj),
        denominator=q.det,
    )


def comparability_constants(
    q: QuadraticForm, r: QuadraticForm
) -> tuple[float, float]:
    """(c1, c2) with c1 Q(x) <= R(x) <= c2 Q(x) for all real x.

    From Rayleigh quotients: R(x) >= (eig_min(R)/eig_max(Q)) Q(x) and
    symmetrically for the upper constant.  Certified but not tight.
    """
    if q.dim != r.dim:
        raise ValueError("dimension mismatch")
    return r.eig_min / q.eig_max, r.eig_max / q.eig_min
