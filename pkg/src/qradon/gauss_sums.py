"""Complete exponential sums S_Q(a,b;q) of a quadratic form.

S_Q(a,b;q) = sum over r in (Z/q)^k of e(-(Q(r) a + r.b)/q), with e(x) =
exp(2 pi i x).  Phases are reduced mod q in exact integer arithmetic and
looked up in a single root-of-unity table, so no floating-point phase
accumulates.  The all-b table for fixed (a,q) is the k-dimensional DFT of
r -> e(-Q(r)a/q), which is the same finite sum evaluated in batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .quadform import QuadraticForm, evaluate_batch


@dataclass(frozen=True)
class GaussSumQuery:
    form: QuadraticForm
    a: int
    q: int
    b: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError("q must be positive")
        if math.gcd(self.a, self.q) != 1:
            raise ValueError("a must be coprime to q")
        if len(self.b) != self.form.dim:
            raise ValueError("b has wrong dimension")
        # canonicalize to the residue convention 1 <= b_j <= q
        b = tuple(((bj - 1) % self.q) + 1 for bj in self.b)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", ((self.a - 1) % self.q) + 1)


def _root_table(q: int) -> np.ndarray:
    """exp(-2 pi i j / q) for j = 0..q-1."""
    j = np.arange(q)
    ang = -2.0 * np.pi * j / q
    return np.cos(ang) + 1j * np.sin(ang)


def _residue_grid(k: int, q: int) -> np.ndarray:
    """All residue vectors in [0,q)^k as an int64 array of shape (q^k, k)."""
    axes = np.meshgrid(*([np.arange(q, dtype=np.int64)] * k), indexing="ij")
    return np.stack([ax.ravel() for ax in axes], axis=-1)


def gauss_sum(query: GaussSumQuery) -> complex:
    """Direct O(q^k) evaluation of S_Q(a,b;q)."""
    q_form, a, q, b = query.form, query.a, query.q, query.b
    k = q_form.dim
    grid = _residue_grid(k, q)
    qvals = evaluate_batch(q_form, grid)
    phases = (qvals * a + grid @ np.array(b, dtype=np.int64)) % q
    counts = np.bincount(phases.astype(np.int64), minlength=q)
    return complex(counts @ _root_table(q))


def gauss_sum_all_b(form: QuadraticForm, a: int, q: int) -> np.ndarray:
    """S_Q(a,b;q) for every b in [0,q)^k, as an array of shape (q,)*k.

    The sum over r factors as a k-dim DFT of g[r] = e(-Q(r)a/q): the DFT
    supplies exactly the e(-r.b/q) twist for every b at once.
    """
    if math.gcd(a, q) != 1:
        raise ValueError("a must be coprime to q")
    k = form.dim
    grid = _residue_grid(k, q)
    qvals = evaluate_batch(form, grid)
    g = _root_table(q)[((qvals * a) % q).astype(np.int64)].reshape((q,) * k)
    return np.fft.fftn(g)


def gauss_bound(form: QuadraticForm, q: int) -> float:
    """|det A|^{k/2} q^{k/2}, the square-root cancellation bound on |S_Q|."""
    return float(abs(form.det) ** (form.dim / 2) * q ** (form.dim / 2))


def averaged_gauss_sum(
    form: QuadraticForm, q: int, l1: int, l2: tuple[int, ...]
) -> tuple[complex, complex]:
    """Average of S_Q(a,b;q) against e(-(l1 a + l2.b)/q).

    Returns (direct, closed_form).  Collapsing the b-average leaves
    q^k sum over coprime a of e(-(Q(-l2)+l1) a / q); the two evaluations
    must agree to rounding error.
    """
    if q < 1:
        raise ValueError("q must be positive")
    k = form.dim
    if len(l2) != k:
        raise ValueError("l2 has wrong dimension")
    roots = _root_table(q)
    coprime = [a for a in range(1, q + 1) if math.gcd(a, q) == 1]

    direct = 0j
    for a in coprime:
        table = gauss_sum_all_b(form, a, q)
        acc = 0j
        for b in product(range(q), repeat=k):
            twist = int(sum(l2_j * b_j for l2_j, b_j in zip(l2, b))) % q
            acc += table[b] * roots[twist]
        direct += acc * roots[(l1 * a) % q]

    m = int(evaluate_batch(form, np.array([[-v for v in l2]], dtype=np.int64))[0])
    closed = q**k * sum(complex(roots[((m + l1) * a) % q]) for a in coprime)
    return direct, closed
