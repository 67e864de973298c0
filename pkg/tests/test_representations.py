import math

import numpy as np
import pytest

from qradon.quadform import QuadraticForm
from qradon.representations import (
    asymptotic_fit,
    error_term_constant,
    rep_table,
    theta_partial_sum,
)
from qradon.theta import theta_direct

X2 = QuadraticForm(((2,),))
DIAG2 = QuadraticForm(((2, 0), (0, 2)))
HEX = QuadraticForm(((2, 1), (1, 2)))
DIAG4 = QuadraticForm(tuple(
    tuple(2 if i == j else 0 for j in range(4)) for i in range(4)
))


def test_k2_classic_counts():
    table = rep_table(DIAG2, 100)
    assert table.counts[1] == 4
    assert table.counts[5] == 8
    assert table.cumulative[100] == 316
    assert table.cumulative[0] == 0


def test_k1_counts_are_square_indicators():
    table = rep_table(X2, 50)
    for n in range(1, 51):
        expected = 2 if math.isqrt(n) ** 2 == n else 0
        assert table.counts[n] == expected


def test_counts_even():
    for form, n in ((X2, 200), (DIAG2, 200), (HEX, 200)):
        table = rep_table(form, n)
        assert np.all(table.counts[1:] % 2 == 0)


def test_k4_block_convolution_matches_brute():
    table = rep_table(DIAG4, 20)
    for n in range(1, 21):
        brute = sum(
            1
            for a in range(-5, 6)
            for b in range(-5, 6)
            for c in range(-5, 6)
            for d in range(-5, 6)
            if a * a + b * b + c * c + d * d == n
        )
        assert table.counts[n] == brute


def test_k4_requires_block_diagonal():
    bad = [[2, 0, 1, 0], [0, 2, 0, 0], [1, 0, 2, 0], [0, 0, 0, 2]]
    with pytest.raises(ValueError):
        rep_table(QuadraticForm(tuple(tuple(r) for r in bad)), 10)


def test_asymptotic_fit_k2():
    table = rep_table(DIAG2, 30000)
    constant, exponent, max_rel = asymptotic_fit(table)
    assert 0.98 <= exponent <= 1.02
    assert 0.98 <= constant / math.pi <= 1.02
    assert max_rel < 0.05
    assert error_term_constant(table, constant) < 10.0


def test_asymptotic_fit_general_form_linear_growth():
    table = rep_table(HEX, 20000)
    _, exponent, _ = asymptotic_fit(table)
    assert 0.97 <= exponent <= 1.03


def test_theta_tie_in():
    y = 0.05
    table = rep_table(DIAG2, 2000)
    partial = theta_partial_sum(table, y)
    full = theta_direct(DIAG2, y, 0.0, (0.0, 0.0)).value
    assert partial == pytest.approx(full - 1.0, abs=1e-10)


def test_validation():
    with pytest.raises(ValueError):
        rep_table(X2, 0)
    with pytest.raises(ValueError):
        asymptotic_fit(rep_table(X2, 500))
