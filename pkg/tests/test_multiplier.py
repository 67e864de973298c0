import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammainc

from qradon.multiplier import (
    B_lambda_s,
    E_multiplier_j,
    analytic_factor,
    dft_coefficients,
    e_j_fourier_coeff,
    fit_log2_slope,
    fourier_coeff_closed_form,
    gamma_constant,
    m_lambda_direct,
    minor_nu_j,
    nu_j_grid_values,
    nu_lambda,
    nu_lambda_j,
    nu_rs,
    nu_rs_fourier_coeff,
)
from qradon.quadform import QuadraticForm

X2 = QuadraticForm(((2,),))


def test_gamma_constant_examples():
    assert gamma_constant(2, 1.0) == pytest.approx(2 * math.pi, abs=1e-10)
    assert gamma_constant(1, 1.0) == pytest.approx(math.sqrt(2), abs=1e-10)
    with pytest.raises(ValueError):
        gamma_constant(2, 0.0)


def test_gamma_constant_kernel_identity():
    # c * integral_0^inf e^{-2 pi Q(m) y} y^{k lam/2 - 1} dy = Q(m)^{-k lam/2}
    lam, m = 0.7, 2
    c = gamma_constant(1, lam)
    val, _ = quad(
        lambda y: math.exp(-2 * math.pi * m * m * y) * y ** (lam / 2 - 1),
        0,
        20,
    )
    assert c * val == pytest.approx((m * m) ** (-lam / 2), abs=1e-9)


def test_analytic_factor_zeros():
    assert analytic_factor(1, -2.0) == pytest.approx(0.0, abs=1e-14)
    assert analytic_factor(2, -1.0) == pytest.approx(0.0, abs=1e-14)
    assert analytic_factor(2, 1.0) == pytest.approx(3.0, abs=1e-12)
    assert analytic_factor(2, 1.0, with_one_minus_lambda=True) == pytest.approx(
        0.0, abs=1e-14
    )


def test_m_direct_zeta_value():
    out = m_lambda_direct(X2, 2.0, 0.0, (0.0,), 10000)
    assert out.certified
    assert abs(out.value - math.pi**2 / 3) < 2e-4


def test_m_direct_conjugation():
    a = m_lambda_direct(X2, 1.5, 0.3, (0.2,), 200).value
    b = m_lambda_direct(X2, 1.5, -0.3, (-0.2,), 200).value
    assert b == pytest.approx(a.conjugate(), abs=1e-12)


def test_nu_additivity():
    lam = 1.5
    theta, phi = 0.3, (0.1,)
    total = nu_lambda(X2, lam, theta, phi, tol=1e-9)
    # same dyadic truncation as nu_lambda's default j_max
    partial = sum(
        nu_lambda_j(X2, lam, j, theta, phi, tol=1e-11).value
        for j in range(1, 41)
    )
    assert abs(total.value - partial) < 1e-7


def test_nu_termwise_incomplete_gamma():
    # Re lam > 1 so both the lattice sum and the y -> 0 endpoint converge
    lam = 2.2
    total = nu_lambda(X2, lam, 0.0, (0.0,), tol=1e-10)
    # sum_m integral_0^1 e^{-2 pi m^2 y} y^{lam/2-1} dy, term-wise
    s = lam / 2
    m = np.arange(1, 30001, dtype=float)
    a = 2 * math.pi * m * m
    acc = 1.0 / s + 2.0 * float(
        np.sum(math.gamma(s) * gammainc(s, a) / a**s)
    )
    assert total.value == pytest.approx(acc, abs=1e-5)


def test_fourier_coeff_closed_form():
    lam, j = 0.8, 4
    val = fourier_coeff_closed_form(X2, lam, j, 0, (0,))
    exact = (2 / lam) * 2.0 ** (-j * lam / 2) * (2 ** (lam / 2) - 1)
    assert val == pytest.approx(exact, abs=1e-12)
    assert fourier_coeff_closed_form(X2, lam, j, 1, (1,)) == 0.0
    assert fourier_coeff_closed_form(X2, lam, j, -1, (1,)) != 0.0


def test_grid_dft_matches_closed_form():
    lam, j = 0.6, 8
    values = nu_j_grid_values(X2, lam, j, 4096, 64)
    coeffs = dft_coefficients(values, 5, 2)
    for (l1, l2), est in coeffs.items():
        closed = fourier_coeff_closed_form(X2, lam, j, l1, l2)
        if l1 == -X2(l2):
            assert abs(est - closed) < 1e-3
        else:
            assert abs(est) < 1e-6


def test_dft_nyquist_guard():
    values = np.zeros((8, 8), dtype=complex)
    with pytest.raises(ValueError):
        dft_coefficients(values, 4, 1)


def test_major_arc_decomposition_pointwise():
    # nu_{lam, j} = (main-term integral) + E piece on a major arc
    lam, j = 1.0, 26
    theta = 1 / 3 + 2.0**-20
    phi = (2 / 3 + 1e-4,)
    nu_val = nu_lambda_j(X2, lam, j, theta, phi, tol=1e-11).value
    e_val = E_multiplier_j(X2, lam, j, theta, phi, tol=1e-11).value
    from qradon.theta import approx_main_term

    xs, ws = np.polynomial.legendre.leggauss(40)
    lo, hi = 2.0**-j, 2.0 ** (-j + 1)
    ys = 0.5 * (hi - lo) * xs + 0.5 * (hi + lo)
    main = sum(
        w * approx_main_term(X2, y, theta - 1 / 3, (phi[0] - 2 / 3,), 1, (2,), 3)
        * y ** (lam / 2 - 1)
        for y, w in zip(ys, ws)
    ) * 0.5 * (hi - lo)
    assert nu_val == pytest.approx(main + e_val, abs=1e-9 * abs(nu_val))


def test_e_piece_off_arc_is_zero():
    out = E_multiplier_j(X2, 1.0, 26, 0.3719, (0.5312,), tol=1e-9)
    assert out.value == 0.0
    assert E_multiplier_j(X2, 1.0, 18, 0.5, (0.5,)).value == 0.0


def test_minor_piece_support():
    assert minor_nu_j(X2, 1.0, 26, 1 / 3 + 2.0**-20, (2 / 3,)).value == 0.0
    val = minor_nu_j(X2, 1.0, 26, 0.3719, (0.5312,))
    assert val.value != 0.0


def test_B_s_off_arc_vanishes():
    out = B_lambda_s(X2, 1.0, 3, 0.3719, (0.5312,), tol=1e-9)
    assert out.value == 0.0


def test_nu_rs_active_j_unique():
    rng = np.random.default_rng(9)
    for _ in range(25):
        s = int(rng.integers(0, 3))
        q = int(rng.integers(2**s, 2 ** (s + 1)))
        coprime = [a for a in range(1, q + 1) if math.gcd(a, q) == 1]
        a = int(coprime[rng.integers(0, len(coprime))])
        r = int(rng.integers(1, 5))
        j = int(2 * s + 20 + 2 * r + 2 * rng.integers(0, 3))
        alpha = 0.75 * 2.0 ** (r - j)
        out = nu_rs(X2, 1.0, r, s, a / q + alpha, (1 / q if q > 1 else 0.1,))
        assert out.quadrature_error < 1e-6


def test_nu_rs_fourier_coeff_error_estimate():
    lam = complex(-2.0, 0.6)
    val, err = nu_rs_fourier_coeff(X2, lam, 2, 0, 0, 0)
    assert err < 1e-5 * max(abs(val), 1e-3)
    assert abs(val) > 0


def test_e_j_fourier_coeff_error_estimate():
    lam = complex(-2.0, 0.6)
    val, err = e_j_fourier_coeff(X2, lam, 24, 0, 0)
    assert err < 1e-5 * max(abs(val), 1e-3)


def test_fit_log2_slope():
    idx = [3, 4, 5, 6]
    vals = [2.0 ** (-0.5 * i) for i in idx]
    slope, _ = fit_log2_slope(idx, vals)
    assert slope == pytest.approx(-0.5, abs=1e-12)
