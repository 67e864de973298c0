"""Rational approximation and the major/minor arc dissection of the torus.

Level j splits [0,1) x [0,1)^k by Dirichlet approximation with N = 2^(j//2):
points whose denominator is at most 2^(j//2 - 10) (and whose phi coordinates
sit within 1/(2q) of a rational b/q) lie on a major arc, everything else is
minor.  Major arcs carry a further dyadic shell index r measuring
|theta - a/q| against 2^-j.  Interval disjointness checks run in exact
rational arithmetic so a verdict is a certificate, not a float comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .theta import _rat_diff

Interval = tuple[Fraction, Fraction, tuple]


@dataclass(frozen=True)
class RationalApprox:
    a: int
    q: int
    alpha: float


@dataclass(frozen=True)
class ArcLabel:
    j: int
    kind: str  # "major" or "minor"
    s: Optional[int] = None
    r: Optional[int] = None
    a: Optional[int] = None
    q: Optional[int] = None
    b: Optional[tuple[int, ...]] = None


def dirichlet_approx(theta: float, n: int) -> RationalApprox:
    """Best continued-fraction approximant a/q with q <= n, |theta-a/q|<=1/(qn).

    Works on the torus representative of theta in [0,1); the fraction 0/1 is
    reported as (1,1).  Among the convergents with denominator at most n the
    one with largest denominator is returned.
    """
    if n < 1:
        raise ValueError("n must be positive")
    x = Fraction(float(theta) - math.floor(float(theta)))
    p, q = x.numerator, x.denominator
    h_prev, h = 1, p // q
    k_prev, k = 0, 1
    best_h, best_k = h, k
    p, q = q, p - (p // q) * q
    while q > 0 and k <= n:
        a_i = p // q
        p, q = q, p - a_i * q
        h_prev, h = h, a_i * h + h_prev
        k_prev, k = k, a_i * k + k_prev
        if k <= n:
            best_h, best_k = h, k
    a, den = best_h % best_k, best_k
    if a == 0:
        a, den = 1, 1
    return RationalApprox(a, den, _rat_diff(theta, a, den))


def nearest_b(phi: Sequence[float], q: int) -> tuple[int, ...]:
    """Nearest residues b with |phi_i - b_i/q| <= 1/(2q), canonical in [1,q]."""
    out = []
    for p in phi:
        b = round((p - math.floor(p)) * q)
        out.append((b - 1) % q + 1)
    return tuple(out)


def classify(theta: float, phi: Sequence[float], j: int) -> ArcLabel:
    """Arc membership of (theta, phi) at dyadic level j."""
    if j < 1:
        raise ValueError("j must be >= 1")
    half = j // 2
    if half < 10:
        return ArcLabel(j=j, kind="minor")
    approx = dirichlet_approx(theta, 2**half)
    if approx.q > 2 ** (half - 10):
        return ArcLabel(j=j, kind="minor")
    s = approx.q.bit_length() - 1
    b = nearest_b(phi, approx.q)
    return ArcLabel(j=j, kind="major", s=s, a=approx.a, q=approx.q, b=b)


def shell_index(j: int, alpha: float) -> int:
    """The dyadic shell r: r=0 if |alpha|<=2^-j, else 2^(r-1) 2^-j < |alpha| <= 2^r 2^-j."""
    aa = abs(alpha)
    if aa <= 2.0**-j:
        return 0
    r = 1
    while aa > 2.0 ** (r - j):
        r += 1
    return r


def double_label(arc: ArcLabel, theta: float) -> ArcLabel:
    """Attach the shell index r to a major arc label."""
    if arc.kind != "major":
        raise ValueError("double decomposition applies to major arcs only")
    alpha = _rat_diff(theta, arc.a, arc.q)
    bound = 2.0**-arc.s * 2.0 ** -(arc.j // 2)
    if abs(alpha) > bound * (1 + 1e-12):
        raise ValueError("theta lies outside the major arc")
    r = shell_index(arc.j, alpha)
    r = min(r, arc.j // 2 - arc.s)  # boundary alpha rounds into the outer shell
    return ArcLabel(j=arc.j, kind="major", s=arc.s, r=r, a=arc.a, q=arc.q, b=arc.b)


def rho(s: int, alpha: float) -> Optional[float]:
    """2^-J for the largest J >= 2s+20 with 2^-J >= 2^(2s) alpha^2.

    Returns 0.0 at alpha=0 and None when no admissible J exists (vacuous).
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if alpha == 0.0:
        return 0.0
    target = 4.0**s * alpha * alpha
    j = math.floor(-math.log2(target))
    while 2.0**-j < target:
        j -= 1
    while 2.0 ** -(j + 1) >= target:
        j += 1
    if j < 2 * s + 20:
        return None
    return 2.0**-j


def r_of_alpha(alpha: float) -> float:
    """2^-J for the largest J with |alpha| <= 2^-J; satisfies |a| <= r < 2|a|."""
    if alpha == 0.0:
        return 0.0
    aa = abs(alpha)
    if aa > 0.5:
        raise ValueError("alpha must lie in [-1/2, 1/2]")
    j = math.floor(-math.log2(aa))
    while aa > 2.0**-j:
        j -= 1
    while aa <= 2.0 ** -(j + 1):
        j += 1
    return 2.0**-j


def _smooth_step(t: float) -> float:
    """C-infinity step: 0 for t<=0, 1 for t>=1, h(t)+h(1-t)=1."""
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    f = math.exp(-1.0 / t)
    g = math.exp(-1.0 / (1.0 - t))
    return f / (f + g)


def psi_q_1d(x: float, q: int) -> float:
    """Smooth even bump: 1 on [-1/(4q),1/(4q)], 0 outside [-3/(4q),3/(4q)];
    the q translates x -> psi(x - b/q) sum to 1 exactly on the torus."""
    if q == 1:
        # the single translate must cover the whole torus by itself
        return 1.0
    d = abs(x - round(x))
    return 1.0 - _smooth_step((d - 0.25 / q) * 2.0 * q)


def psi_q(phi: Sequence[float], q: int) -> float:
    """Product of the 1-d bumps over the coordinates of phi."""
    if q < 1:
        raise ValueError("q must be positive")
    out = 1.0
    for x in phi:
        out *= psi_q_1d(float(x), q)
    return out


def _sweep_overlaps(
    intervals: list[Interval], distinct
) -> Optional[tuple[tuple, tuple]]:
    """First overlapping pair of closed intervals whose tags satisfy `distinct`."""
    intervals = sorted(intervals, key=lambda iv: (iv[0], iv[1]))
    active: list[Interval] = []
    for left, right, tag in intervals:
        active = [iv for iv in active if iv[1] >= left]
        for a_left, a_right, a_tag in active:
            if distinct(tag, a_tag):
                return tag, a_tag
        active.append((left, right, tag))
    return None


def verify_disjointness(
    mode: str,
    j: Optional[int] = None,
    s: Optional[int] = None,
    j_list: Optional[Sequence[int]] = None,
    widen: int = 1,
) -> tuple[bool, Optional[tuple[tuple, tuple]]]:
    """Exact-rational overlap check on major-arc theta intervals.

    fixed_j: at level j, arcs with different s must not overlap.
    fixed_s: at denominator class s, arcs of distinct reduced fractions must
    not overlap across levels j >= 2s+20.
    `widen` scales the half-widths (an integer factor; >1 is the negative
    control that must produce a violation).  Returns (ok, certificate).
    """
    intervals: list[Interval] = []
    if mode == "fixed_j":
        if j is None:
            raise ValueError("fixed_j mode needs j")
        half = j // 2
        if half < 10:
            return True, None
        for q in range(1, 2 ** (half - 10) + 1):
            sq = q.bit_length() - 1
            hw = Fraction(widen, 2 ** (sq + half))
            for a in range(1, q + 1):
                if math.gcd(a, q) != 1:
                    continue
                c = Fraction(a, q)
                intervals.append((c - hw, c + hw, (sq, a, q, j)))
        cert = _sweep_overlaps(intervals, lambda t1, t2: t1[0] != t2[0])
    elif mode == "fixed_s":
        if s is None:
            raise ValueError("fixed_s mode needs s")
        if j_list is None:
            j_list = [2 * s + 20, 2 * s + 22, 2 * s + 25]
        if any(jj < 2 * s + 20 for jj in j_list):
            raise ValueError("fixed_s mode needs j >= 2s+20")
        for q in range(2**s, 2 ** (s + 1)):
            for a in range(1, q + 1):
                if math.gcd(a, q) != 1:
                    continue
                c = Fraction(a, q)
                for jj in j_list:
                    hw = Fraction(widen, 2 ** (s + jj // 2))
                    intervals.append((c - hw, c + hw, (s, a, q, jj)))
        cert = _sweep_overlaps(intervals, lambda t1, t2: t1[1:3] != t2[1:3])
    else:
        raise ValueError("mode must be fixed_j or fixed_s")
    return cert is None, cert
