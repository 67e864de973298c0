"""Twisted theta sums of a positive definite form and their inversion law.

Theta(z, phi) = sum over m in Z^k of exp(-2 pi Q(m) z) exp(-2 pi i m.phi),
Re z > 0.  Two independent evaluations are provided: the direct lattice sum
and the transformation law that rewrites the sum near a rational point
(a/q, b/q) as Gauss sums against a Gaussian sum in the adjoint form.  Their
agreement is an exact identity and the strongest correctness check in the
package.

Truncation is certified: every evaluation returns the box radius used and
an explicit bound on the omitted terms.  Phases are computed mod 1 with a
26-bit split product so that huge integer multiples of theta lose no
precision, which matters when y is as small as 2^-20.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from ._kernels import exp_cis_sum, weighted_exp_cis_sum
from .gauss_sums import gauss_bound, gauss_sum_all_b
from .quadform import QuadraticForm, adjoint, evaluate_batch

TWO_PI = 2.0 * math.pi
_CHUNK = 1 << 21
_MAX_POINTS = 1 << 28
_MAX_SPLIT_INT = 1 << 27  # largest |n| for which the 26-bit split is exact


@dataclass(frozen=True)
class ThetaEval:
    value: complex
    trunc_radius: int
    tail_bound: float
    mode: str


@dataclass(frozen=True)
class ArcPoint:
    """A spectral point (theta, phi) with its rational approximation data."""

    y: float
    theta: float
    phi: tuple[float, ...]
    a: int
    q: int
    b: tuple[int, ...]

    @property
    def alpha(self) -> float:
        return _rat_diff(self.theta, self.a, self.q)

    @property
    def beta(self) -> tuple[float, ...]:
        return tuple(
            _rat_diff(p, bj, self.q) for p, bj in zip(self.phi, self.b)
        )


def _torus_diff(x: float, c: float) -> float:
    """x - c reduced mod 1 into (-1/2, 1/2], without wrap-around cancellation.

    Both x and c are first reduced to [0,1); the three branch cases then
    evaluate with at most one rounding each (Sterbenz subtractions), so the
    result keeps full relative accuracy even when the difference is tiny or
    wraps past 0 or 1.
    """
    t = x - math.floor(x)
    c = c - math.floor(c)
    rough = t - c
    if rough > 0.5:
        return (t - 1.0) - c
    if rough <= -0.5:
        return t + (1.0 - c)
    return rough


def _rat_diff(x: float, num: int, den: int) -> float:
    """x - num/den reduced mod 1, with the rational kept exact.

    Subtracting the rounded double num/den and then removing its rounding
    error keeps the full relative accuracy of the difference even when it
    is tiny, which the inversion prefactor (y + i alpha)^{k/2} needs.
    """
    num %= den
    c = num / den
    d = _torus_diff(x, c)
    return d - float(Fraction(num, den) - Fraction(c))


def _gauss_tail(c: float, g: float) -> float:
    """Upper bound on sum_{j>=0} exp(-c (g+j)^2) for c>0, g>0."""
    if c * g * g > 745.0:
        return 0.0
    return math.exp(-c * g * g) / max(1.0 - math.exp(-c * (2.0 * g + 1.0)), 1e-12)


def _one_dim_sum_bound(c: float, shift: float = 0.0) -> float:
    """Upper bound on sum_m exp(-c max(|m|-shift,0)^2)."""
    head = sum(
        math.exp(-c * max(abs(m) - shift, 0.0) ** 2) for m in range(-30, 31)
    )
    return head + 2.0 * _gauss_tail(c, 31 - shift)


def _box_tail_bound(c: float, r: int, k: int, shift: float = 0.0) -> float:
    """Bound the sum of prod_i exp(-c max(|m_i|-shift,0)^2) over |m|_inf > r."""
    s1 = _one_dim_sum_bound(c, shift)
    return k * s1 ** (k - 1) * 2.0 * _gauss_tail(c, r + 1 - shift)


def _frac_mul(n: np.ndarray, x: float) -> np.ndarray:
    """n*x mod 1 (in [0,1)), accurate to ~1e-16 absolute for integer n."""
    xr = x - math.floor(x)
    hi = math.ldexp(float(round(math.ldexp(xr, 26))), -26)
    lo = xr - hi
    nf = n.astype(np.float64)
    return np.mod(nf * hi, 1.0) + nf * lo


def _box_chunks(r: int, k: int) -> Iterator[np.ndarray]:
    """The box [-r,r]^k in row-major chunks, shape (points, k), fixed order."""
    rng = np.arange(-r, r + 1, dtype=np.int64)
    n = len(rng)
    if k == 1:
        yield rng[:, None]
        return
    block = max(1, _CHUNK // n ** (k - 1))
    for start in range(0, n, block):
        sub = rng[start : start + block]
        mesh = np.meshgrid(sub, *([rng] * (k - 1)), indexing="ij")
        yield np.stack([ax.ravel() for ax in mesh], axis=-1)


def direct_radius(q_form: QuadraticForm, y: float, eps: float) -> int:
    """Box radius from the Gaussian tail bound, then verified explicitly."""
    k = q_form.dim
    c = math.pi * q_form.eig_min * y
    r = math.ceil(math.sqrt(max(math.log(4.0 * k / eps), 1.0) / c)) + k
    while _box_tail_bound(c, r, k) >= eps / 2.0 and r < 10**7:
        r = max(r + 1, int(r * 1.2))
    return r


def theta_direct(
    q_form: QuadraticForm,
    y: float,
    theta: float,
    phi: Sequence[float],
    eps: float = 1e-12,
    max_points: int = _MAX_POINTS,
) -> ThetaEval:
    """Direct lattice sum, truncated with a certified Gaussian tail bound."""
    if y <= 0:
        raise ValueError("y must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    k = q_form.dim
    phi = tuple(float(p) for p in phi)
    if len(phi) != k:
        raise ValueError("phi has wrong dimension")
    r = direct_radius(q_form, y, eps)
    if (2 * r + 1) ** k > max_points:
        raise ValueError(f"truncation infeasible: radius {r} in dimension {k}")
    c = math.pi * q_form.eig_min * y
    tail = _box_tail_bound(c, r, k)
    # terms inside the box but beyond this decay contribute < eps/4 in total
    cut = k * math.log(2.0 * r + 1.0) + math.log(4.0 / eps)
    if cut / (TWO_PI * y) >= _MAX_SPLIT_INT / 2:
        raise ValueError("truncation infeasible: form values too large")
    mat = q_form.matrix
    if k == 1 and _kernels.theta_sum_k1 is not None:
        value = _kernels.theta_sum_k1(mat[0][0], y, theta, phi[0], cut, r)
        return ThetaEval(value, r, tail + eps / 4.0, "direct")
    if k == 2 and _kernels.theta_sum_k2 is not None:
        value = _kernels.theta_sum_k2(
            mat[0][0], mat[0][1], mat[1][1], y, theta, phi[0], phi[1], cut, r
        )
        return ThetaEval(value, r, tail + eps / 4.0, "direct")
    parts_re: list[float] = []
    parts_im: list[float] = []
    for grid in _box_chunks(r, k):
        qv = evaluate_batch(q_form, grid)
        if int(qv.max(initial=0)) >= _MAX_SPLIT_INT:
            raise ValueError("truncation infeasible: form values too large")
        decay = TWO_PI * y * qv
        mask = decay <= cut
        if not mask.any():
            continue
        qv = qv[mask]
        grid = grid[mask]
        rev = _frac_mul(qv, theta)
        for i in range(k):
            rev = rev + _frac_mul(grid[:, i], phi[i])
        part = exp_cis_sum(
            np.ascontiguousarray(decay[mask]),
            np.ascontiguousarray(-TWO_PI * rev),
        )
        parts_re.append(part.real)
        parts_im.append(part.imag)
    value = complex(math.fsum(parts_re), math.fsum(parts_im))
    return ThetaEval(value, r, tail + eps / 4.0, "direct")


def _inversion_prefactor(
    q_form: QuadraticForm, y: float, alpha: float, q: int
) -> complex:
    return 1.0 / (
        q**q_form.dim * math.sqrt(q_form.det) * complex(y, alpha) ** (q_form.dim / 2)
    )


def _inversion_sum(
    q_form: QuadraticForm,
    y: float,
    alpha: float,
    beta: tuple[float, ...],
    a: int,
    b: tuple[int, ...],
    q: int,
    eps: float,
    include_m0: bool,
    max_points: int,
) -> ThetaEval:
    """pref * sum_m S_Q(a, b-m; q) exp(-2 pi Q*(m/q + beta)/(y + i alpha))."""
    k = q_form.dim
    adj = adjoint(q_form)
    ainv = adj.array
    denom = y * y + alpha * alpha
    u = y / denom  # Re 1/(y + i alpha)
    vph = alpha / denom
    pref = _inversion_prefactor(q_form, y, alpha, q)
    smax = gauss_bound(q_form, q)
    scale = abs(pref) * smax
    # e^{-2 pi Q*(v) u} <= prod_i e^{-c2 max(|m_i|-3/4,0)^2} with v = m/q+beta
    c2 = math.pi * u / (q_form.eig_max * q * q)
    target = eps / max(scale, 1e-300)
    r = math.ceil(q * math.sqrt(max(math.log(4.0 * k / target), 1.0) * q_form.eig_max / (math.pi * u))) + k
    while _box_tail_bound(c2, r, k, shift=0.75) >= target / 2.0 and r < 10**7:
        r = max(r + 1, int(r * 1.2))
    if (2 * r + 1) ** k > max_points:
        raise ValueError(f"truncation infeasible: radius {r} in dimension {k}")
    tail = scale * _box_tail_bound(c2, r, k, shift=0.75)
    cut = k * math.log(2.0 * r + 1.0) + math.log(4.0 / target)
    stable = gauss_sum_all_b(q_form, a, q)
    parts_re: list[float] = []
    parts_im: list[float] = []
    for grid in _box_chunks(r, k):
        if not include_m0:
            grid = grid[np.any(grid != 0, axis=1)]
            if grid.size == 0:
                continue
        v = grid / q + np.array(beta)
        qstar = 0.5 * np.einsum("pi,ij,pj->p", v, ainv, v)
        decay = TWO_PI * u * qstar
        mask = decay <= cut
        if not mask.any():
            continue
        grid = grid[mask]
        decay = decay[mask]
        phase = TWO_PI * vph * qstar[mask]
        idx = tuple(
            ((np.array(b[i]) - grid[:, i]) % q).astype(np.int64) for i in range(k)
        )
        weights = stable[idx]
        part = weighted_exp_cis_sum(
            np.ascontiguousarray(weights.real),
            np.ascontiguousarray(weights.imag),
            np.ascontiguousarray(decay),
            np.ascontiguousarray(phase),
        )
        parts_re.append(part.real)
        parts_im.append(part.imag)
    total = complex(math.fsum(parts_re), math.fsum(parts_im))
    value = pref * total
    return ThetaEval(value, r, tail + eps / 4.0, "inversion")


def theta_via_inversion(
    q_form: QuadraticForm,
    y: float,
    theta: float,
    phi: Sequence[float],
    a: int,
    b: Sequence[int],
    q: int,
    eps: float = 1e-12,
    max_points: int = _MAX_POINTS,
) -> ThetaEval:
    """Evaluate Theta via the transformation law at the rational (a/q, b/q)."""
    if y <= 0:
        raise ValueError("y must be positive")
    if math.gcd(a, q) != 1:
        raise ValueError("a must be coprime to q")
    k = q_form.dim
    phi = tuple(float(p) for p in phi)
    b = tuple(int(bj) for bj in b)
    if len(phi) != k or len(b) != k:
        raise ValueError("phi or b has wrong dimension")
    alpha = _rat_diff(theta, a, q)
    beta = tuple(_rat_diff(p, bj, q) for p, bj in zip(phi, b))
    return _inversion_sum(
        q_form, y, alpha, beta, a, b, q, eps, include_m0=True, max_points=max_points
    )


def approx_main_term(
    q_form: QuadraticForm,
    y: float,
    alpha: float,
    beta: Sequence[float],
    a: int,
    b: Sequence[int],
    q: int,
) -> complex:
    """The m=0 term of the inversion sum: the approximate-identity main term."""
    if math.gcd(a, q) != 1:
        raise ValueError("a must be coprime to q")
    k = q_form.dim
    b = tuple(int(bj) for bj in b)
    beta = tuple(float(x) for x in beta)
    s_ab = complex(gauss_sum_all_b(q_form, a, q)[tuple(bj % q for bj in b)])
    adj = adjoint(q_form)
    qstar = adj.evaluate(np.array(beta))
    z = complex(y, alpha)
    return (
        s_ab
        / (q**k * math.sqrt(q_form.det))
        * np.exp(-TWO_PI * qstar / z)
        / z ** (k / 2)
    )


def level_of(y: float) -> int:
    """The dyadic level j with 2^{-j} <= y <= 2^{-j+1}."""
    j = max(1, math.ceil(-math.log2(y)))
    while 2.0**-j > y:
        j += 1
    while 2.0 ** (-j + 1) < y:
        j -= 1
    return j


def remainder_E(
    q_form: QuadraticForm,
    y: float,
    theta: float,
    phi: Sequence[float],
    a: int,
    b: Sequence[int],
    q: int,
    eps: float = 1e-12,
    check_hypotheses: bool = True,
    max_points: int = _MAX_POINTS,
) -> complex:
    """The m != 0 part of the inversion sum (remainder past the main term)."""
    k = q_form.dim
    phi = tuple(float(p) for p in phi)
    b = tuple(int(bj) for bj in b)
    alpha = _rat_diff(theta, a, q)
    beta = tuple(_rat_diff(p, bj, q) for p, bj in zip(phi, b))
    if check_hypotheses:
        j = level_of(y)
        slack = 1e-9
        if q > 2.0 ** (j / 2) * (1 + slack):
            raise ValueError("arc hypothesis violated: q too large for level")
        if abs(alpha) > 1.0 / (q * 2.0 ** (j / 2)) * (1 + slack):
            raise ValueError("arc hypothesis violated: alpha too large")
        if any(abs(be) > 3.0 / (4.0 * q) * (1 + slack) for be in beta):
            raise ValueError("arc hypothesis violated: beta too large")
    ev = _inversion_sum(
        q_form, y, alpha, beta, a, b, q, eps, include_m0=False, max_points=max_points
    )
    return ev.value


def remainder_bound_factor(
    q_form: QuadraticForm, y: float, alpha: float, q: int
) -> float:
    """y^{-k/4} q^{k/2} (y^2+alpha^2)^{k/4}, the certified remainder envelope."""
    k = q_form.dim
    return y ** (-k / 4) * q ** (k / 2) * (y * y + alpha * alpha) ** (k / 4)


def gaussian_fourier_check(
    q_form: QuadraticForm,
    y: float,
    theta: float,
    eta: Sequence[int],
    grid_n: int,
) -> tuple[complex, complex]:
    """Compare quadrature and closed form of the adjoint-Gaussian transform.

    lhs = integral over R^k of exp(-2 pi Q*(phi)/(y+i theta)) e(-phi.eta),
    rhs = |det A|^{1/2} (y+i theta)^{k/2} exp(-2 pi Q(eta)(y+i theta)).
    """
    if y <= 0:
        raise ValueError("y must be positive")
    k = q_form.dim
    if k > 2:
        raise ValueError("only k <= 2 supported")
    if grid_n < 2 or grid_n & (grid_n - 1):
        raise ValueError("grid_n must be a power of two")
    eta = np.array([int(e) for e in eta], dtype=np.int64)
    z = complex(y, theta)
    denom = y * y + theta * theta
    # decay exponent >= pi |phi|^2 y / (eig_max denom); push it past 1e-18
    big = math.log(1e18)
    length = math.sqrt(big * q_form.eig_max * denom / (math.pi * y)) + 1.0
    ax = np.linspace(-length, length, grid_n + 1)
    ainv = adjoint(q_form).array
    if k == 1:
        qstar = 0.5 * ainv[0, 0] * ax * ax
        integrand = np.exp(-TWO_PI * qstar / z) * np.exp(-2j * np.pi * ax * eta[0])
        lhs = complex(np.trapezoid(integrand, ax))
    else:
        x1, x2 = np.meshgrid(ax, ax, indexing="ij")
        qstar = 0.5 * (
            ainv[0, 0] * x1 * x1 + 2 * ainv[0, 1] * x1 * x2 + ainv[1, 1] * x2 * x2
        )
        integrand = np.exp(-TWO_PI * qstar / z) * np.exp(
            -2j * np.pi * (x1 * eta[0] + x2 * eta[1])
        )
        lhs = complex(np.trapezoid(np.trapezoid(integrand, ax, axis=1), ax))
    q_eta = int(evaluate_batch(q_form, eta[None, :])[0])
    rhs = math.sqrt(q_form.det) * z ** (k / 2) * np.exp(-TWO_PI * q_eta * z)
    return lhs, complex(rhs)
