"""Representation numbers r_Q(n) and cumulative counts A_Q(N).

r_Q(n) counts lattice points with Q(m) = n; A_Q(N) = sum_{n <= N} r_Q(n)
counts 1 <= Q(m) <= N.  Counts are exact integers from box enumeration
(vectorized along the innermost coordinate); forms that split into two
diagonal blocks are counted by convolving the block histograms, an exact
integer identity.  The asymptotic fit checks A(N) ~ c N^{k/2} with the
ball-volume constant for Q = |x|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadform import QuadraticForm


@dataclass(frozen=True)
class RepTable:
    form: QuadraticForm
    upto: int
    counts: np.ndarray  # counts[n] = r(n), n = 0..N; counts[0] excludes m=0
    cumulative: np.ndarray  # cumulative[n] = A(n) = sum_{1 <= i <= n} r(i)

    def __post_init__(self) -> None:
        if self.upto < 1:
            raise ValueError("upto must be >= 1")
        if len(self.counts) != self.upto + 1:
            raise ValueError("counts must have length upto + 1")


def _histogram_with_origin(q_form: QuadraticForm, n_max: int) -> np.ndarray:
    """hist[n] = #{m in Z^k : Q(m) = n} for 0 <= n <= n_max, m = 0 included."""
    k = q_form.dim
    a = q_form.array
    radius = math.isqrt(int(2.0 * n_max / q_form.eig_min)) + 1
    hist = np.zeros(n_max + 1, dtype=np.int64)
    inner = np.arange(-radius, radius + 1, dtype=np.int64)
    if k == 1:
        vals = (inner * inner * int(a[0, 0])) // 2
        keep = vals <= n_max
        hist += np.bincount(vals[keep], minlength=n_max + 1)[: n_max + 1]
        return hist
    if k == 2:
        a11, a12, a22 = int(a[0, 0]), int(a[0, 1]), int(a[1, 1])
        for m1 in range(-radius, radius + 1):
            vals = (a11 * m1 * m1 + 2 * a12 * m1 * inner + a22 * inner * inner) // 2
            keep = (vals >= 0) & (vals <= n_max)
            if keep.any():
                hist += np.bincount(vals[keep], minlength=n_max + 1)[: n_max + 1]
        return hist
    if k == 4:
        upper = np.asarray(a)[:2, 2:]
        if not np.all(upper == 0):
            raise ValueError("k = 4 supported only for 2+2 block-diagonal forms")
        top = QuadraticForm(tuple(tuple(int(x) for x in row) for row in a[:2, :2]))
        bot = QuadraticForm(tuple(tuple(int(x) for x in row) for row in a[2:, 2:]))
        h1 = _histogram_with_origin(top, n_max)
        h2 = _histogram_with_origin(bot, n_max)
        return np.convolve(h1, h2)[: n_max + 1]
    raise ValueError("rep_table supports k in {1, 2, 4}")


def rep_table(q_form: QuadraticForm, n_max: int) -> RepTable:
    """Exact representation counts r(1..N) and cumulative A(1..N)."""
    if n_max < 1:
        raise ValueError("N must be >= 1")
    hist = _histogram_with_origin(q_form, n_max)
    counts = hist.copy()
    counts[0] -= 1  # the origin is not a representation of any n >= 1
    cumulative = np.cumsum(counts)
    cumulative[0] = 0
    return RepTable(q_form, n_max, counts, cumulative)


def asymptotic_fit(table: RepTable) -> tuple[float, float, float]:
    """(constant, exponent, max_rel_err) from log A vs log N on dyadic N.

    Least squares of log A(N') against log N' over dyadic N' up to the
    table limit; max_rel_err is the largest relative deviation of A(N')
    from the fitted power law over those samples.
    """
    if table.upto < 1000:
        raise ValueError("need N >= 1000 for a stable fit")
    # dyadic samples anchored at the table limit: small N' would bias the
    # constant through the O(N^{(k-1)/2}) boundary term
    ns = [table.upto >> i for i in range(6, -1, -1)]
    a_vals = np.array([float(table.cumulative[n]) for n in ns])
    if np.any(a_vals <= 0):
        raise ValueError("degenerate fit: empty cumulative counts")
    logs_n = np.log(np.array(ns, dtype=float))
    exponent, intercept = np.polyfit(logs_n, np.log(a_vals), 1)
    constant = math.exp(intercept)
    model = constant * np.exp(exponent * logs_n)
    max_rel_err = float(np.max(np.abs(a_vals - model) / a_vals))
    return constant, float(exponent), max_rel_err


def error_term_constant(table: RepTable, constant: float) -> float:
    """Smallest C with |A(N') - c N'^{k/2}| <= C N'^{(k-1)/2} on dyadic N'."""
    k = table.form.dim
    ns = [table.upto >> i for i in range(6, -1, -1)]
    worst = 0.0
    for n in ns:
        dev = abs(float(table.cumulative[n]) - constant * n ** (k / 2.0))
        worst = max(worst, dev / n ** ((k - 1) / 2.0))
    return worst


def theta_partial_sum(table: RepTable, y: float) -> complex:
    """sum_{1 <= n <= N} r(n) e^{-2 pi n y}, the truncated theta series."""
    n = np.arange(1, table.upto + 1, dtype=float)
    return complex(np.sum(table.counts[1:] * np.exp(-2.0 * math.pi * n * y)))
