# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for lattice phase sums.

Each function consumes flat float64 arrays and reduces them in index order
with Kahan-compensated accumulators, so results are deterministic for a
given input array regardless of how callers parallelize around them.
"""

from libc.math cimport exp, cos, sin, sqrt, floor, ceil, fmod

cdef double TWO_PI = 6.283185307179586476925287
cdef long long _ANCHOR = 8

cdef inline double _split_hi(double x):
    # nearest multiple of 2^-26; products with integers < 2^27 stay exact
    return round(x * 67108864.0) / 67108864.0


def theta_sum_k1(long long a11, double y, double theta, double phi1,
                 double cut, long long r):
    """Sum of e^{-2 pi Q(m) y} e^{-2 pi i (Q(m) theta + m phi1)} over |m| <= r,
    Q(m) = a11 m^2 / 2, restricted to 2 pi Q(m) y <= cut."""
    cdef double th = theta - floor(theta)
    cdef double th_hi = _split_hi(th), th_lo = th - th_hi
    cdef double p1 = phi1 - floor(phi1)
    cdef double p1_hi = _split_hi(p1), p1_lo = p1 - p1_hi
    cdef double twopiy = TWO_PI * y
    cdef double sr = 0.0, si = 0.0, cr = 0.0, ci = 0.0
    cdef double d, w, ang, rev, yv, t, qd, md
    cdef long long m, q2
    for m in range(-r, r + 1):
        q2 = a11 * m * m
        d = twopiy * <double> (q2 >> 1)
        if d > cut:
            continue
        qd = <double> (q2 >> 1)
        md = <double> m
        rev = fmod(qd * th_hi, 1.0) + qd * th_lo \
            + fmod(md * p1_hi, 1.0) + md * p1_lo
        w = exp(-d)
        ang = -TWO_PI * rev
        yv = w * cos(ang) - cr
        t = sr + yv
        cr = (t - sr) - yv
        sr = t
        yv = w * sin(ang) - ci
        t = si + yv
        ci = (t - si) - yv
        si = t
    return complex(sr, si)


def theta_sum_k2(long long a11, long long a12, long long a22,
                 double y, double theta, double phi1, double phi2,
                 double cut, long long r):
    """Same sum for k=2 with Q(m) = (a11 m1^2 + 2 a12 m1 m2 + a22 m2^2)/2,
    sweeping each row only over the m2 interval where 2 pi Q y <= cut."""
    cdef double th = theta - floor(theta)
    cdef double th_hi = _split_hi(th), th_lo = th - th_hi
    cdef double p1 = phi1 - floor(phi1)
    cdef double p1_hi = _split_hi(p1), p1_lo = p1 - p1_hi
    cdef double p2 = phi2 - floor(phi2)
    cdef double p2_hi = _split_hi(p2), p2_lo = p2 - p2_hi
    cdef double twopiy = TWO_PI * y
    cdef double bb = cut / twopiy  # Q(m) <= bb
    cdef double det4 = <double> (a11 * a22 - a12 * a12)
    cdef double sr = 0.0, si = 0.0, cr = 0.0, ci = 0.0
    cdef double d, w, ang, rev, yv, t, qd, md, disc, sq, row_rev
    cdef double hd, hrev, hcr, hci, tr, ti, gr, gi
    cdef long long m1, m2, lo2, hi2, q2, dq, stop
    for m1 in range(-r, r + 1):
        # a22 m2^2 + 2 a12 m1 m2 + a11 m1^2 - 2 bb <= 0
        disc = 8.0 * a22 * bb - 4.0 * det4 * m1 * m1
        if disc < 0.0:
            continue
        sq = sqrt(disc)
        lo2 = <long long> ceil((-2.0 * a12 * m1 - sq) / (2.0 * a22) - 1e-9)
        hi2 = <long long> floor((-2.0 * a12 * m1 + sq) / (2.0 * a22) + 1e-9)
        if lo2 < -r:
            lo2 = -r
        if hi2 > r:
            hi2 = r
        md = <double> m1
        row_rev = fmod(md * p1_hi, 1.0) + md * p1_lo
        # term(m2+1)/term(m2) = exp(-(y+i theta) 2 pi dq - 2 pi i phi2) with
        # dq = Q(m1,m2+1)-Q(m1,m2) integer; that ratio itself advances by the
        # constant factor hc = exp(-2 pi (y+i theta) a22).  Anchored every
        # _ANCHOR steps with exact split-product phases to contain drift.
        hd = twopiy * <double> a22
        hrev = fmod((<double> a22) * th_hi, 1.0) + (<double> a22) * th_lo
        w = exp(-hd)
        ang = -TWO_PI * hrev
        hcr = w * cos(ang)
        hci = w * sin(ang)
        m2 = lo2
        while m2 <= hi2:
            # exact anchor term at m2
            q2 = a11 * m1 * m1 + 2 * a12 * m1 * m2 + a22 * m2 * m2
            qd = <double> (q2 >> 1)
            d = twopiy * qd
            md = <double> m2
            rev = fmod(qd * th_hi, 1.0) + qd * th_lo + row_rev \
                + fmod(md * p2_hi, 1.0) + md * p2_lo
            w = exp(-d)
            ang = -TWO_PI * rev
            tr = w * cos(ang)
            ti = w * sin(ang)
            # exact ratio to the next term
            dq = a12 * m1 + (a22 >> 1) * (2 * m2 + 1)
            qd = <double> dq
            d = twopiy * qd
            rev = fmod(qd * th_hi, 1.0) + qd * th_lo + p2_hi + p2_lo
            w = exp(-d)
            ang = -TWO_PI * rev
            gr = w * cos(ang)
            gi = w * sin(ang)
            stop = m2 + _ANCHOR
            if stop > hi2 + 1:
                stop = hi2 + 1
            while True:
                yv = tr - cr
                t = sr + yv
                cr = (t - sr) - yv
                sr = t
                yv = ti - ci
                t = si + yv
                ci = (t - si) - yv
                si = t
                m2 = m2 + 1
                if m2 >= stop:
                    break
                w = tr * gr - ti * gi
                ti = tr * gi + ti * gr
                tr = w
                w = gr * hcr - gi * hci
                gi = gr * hci + gi * hcr
                gr = w
    return complex(sr, si)


def exp_cis_sum(double[::1] decay, double[::1] phase):
    """Sum of exp(-decay[i]) * (cos(phase[i]) + i sin(phase[i]))."""
    cdef Py_ssize_t i, n = decay.shape[0]
    cdef double sr = 0.0, si = 0.0, cr = 0.0, ci = 0.0
    cdef double w, y, t
    for i in range(n):
        w = exp(-decay[i])
        y = w * cos(phase[i]) - cr
        t = sr + y
        cr = (t - sr) - y
        sr = t
        y = w * sin(phase[i]) - ci
        t = si + y
        ci = (t - si) - y
        si = t
    return complex(sr, si)


def weighted_exp_cis_sum(double[::1] wre, double[::1] wim,
                         double[::1] decay, double[::1] phase):
    """Sum of (wre[i] + i wim[i]) * exp(-decay[i]) * cis(phase[i])."""
    cdef Py_ssize_t i, n = decay.shape[0]
    cdef double sr = 0.0, si = 0.0, cr = 0.0, ci = 0.0
    cdef double w, c, s, tr, ti, y, t
    for i in range(n):
        w = exp(-decay[i])
        c = w * cos(phase[i])
        s = w * sin(phase[i])
        tr = wre[i] * c - wim[i] * s
        ti = wre[i] * s + wim[i] * c
        y = tr - cr
        t = sr + y
        cr = (t - sr) - y
        sr = t
        y = ti - ci
        t = si + y
        ci = (t - si) - y
        si = t
    return complex(sr, si)
