import cmath
import math

import numpy as np
import pytest

from qradon.gauss_sums import (
    GaussSumQuery,
    averaged_gauss_sum,
    gauss_bound,
    gauss_sum,
    gauss_sum_all_b,
)
from qradon.quadform import QuadraticForm

X2 = QuadraticForm(((2,),))
DIAG2 = QuadraticForm(((2, 0), (0, 2)))


def brute(form, a, q, b):
    k = form.dim
    total = 0j
    for pt in np.ndindex(*(q,) * k):
        r = tuple(c + 1 for c in pt)
        phase = form(r) * a + sum(rj * bj for rj, bj in zip(r, b))
        total += cmath.exp(-2j * math.pi * phase / q)
    return total


def test_q_one_is_one():
    assert gauss_sum(GaussSumQuery(X2, 1, 1, (1,))) == pytest.approx(1.0)


def test_k1_q3_value():
    val = gauss_sum(GaussSumQuery(X2, 1, 3, (3,)))
    assert val == pytest.approx(-1j * math.sqrt(3), abs=1e-12)


def test_against_brute_force():
    for form in (X2, DIAG2):
        for q in (2, 3, 5, 7):
            for a in range(1, q + 1):
                if math.gcd(a, q) != 1:
                    continue
                b = tuple([max(1, q - 1)] * form.dim)
                query = GaussSumQuery(form, a, q, b)
                assert gauss_sum(query) == pytest.approx(
                    brute(form, a, q, b), abs=1e-9
                )


def test_all_b_table_matches_single():
    q = 5
    table = gauss_sum_all_b(X2, 2, q)
    for b in range(q):
        single = gauss_sum(GaussSumQuery(X2, 2, q, (b if b else q,)))
        assert table[b % q] == pytest.approx(single, abs=1e-10)


def test_cancellation_bound():
    for form in (X2, DIAG2):
        for q in range(1, 31):
            bound = gauss_bound(form, q)
            for a in range(1, q + 1):
                if math.gcd(a, q) != 1:
                    continue
                peak = np.abs(gauss_sum_all_b(form, a, q)).max()
                assert peak <= bound * (1 + 1e-12)


def test_conjugation_symmetry():
    for q in range(2, 13):
        for a in range(1, q):
            if math.gcd(a, q) != 1:
                continue
            for b in range(1, q + 1):
                lhs = gauss_sum(GaussSumQuery(X2, q - a, q, ((-b) % q or q,)))
                rhs = gauss_sum(GaussSumQuery(X2, a, q, (b,)))
                assert lhs == pytest.approx(rhs.conjugate(), abs=1e-10)


def test_averaged_examples():
    direct, closed = averaged_gauss_sum(X2, 1, 0, (0,))
    assert direct == pytest.approx(1.0) and closed == pytest.approx(1.0)
    direct, closed = averaged_gauss_sum(X2, 3, 0, (0,))
    assert direct == pytest.approx(6.0, abs=1e-9)
    assert closed == pytest.approx(6.0, abs=1e-12)


def test_averaged_closed_form_and_size_bound():
    for form in (X2, DIAG2):
        for q in range(1, 21 if form.dim == 1 else 11):
            for l1 in (0, 1, q - 1):
                l2 = tuple([min(2, q)] * form.dim)
                direct, closed = averaged_gauss_sum(form, q, l1, l2)
                scale = max(abs(closed), 1.0)
                assert abs(direct - closed) / scale < 1e-9
                assert abs(direct) <= q ** (form.dim + 1) * (1 + 1e-12)


def test_query_validation():
    with pytest.raises(ValueError):
        GaussSumQuery(X2, 2, 4, (1,))  # gcd != 1
    with pytest.raises(ValueError):
        GaussSumQuery(X2, 1, 3, (1, 2))  # wrong b dimension
    q = GaussSumQuery(X2, 5, 3, (7,))  # canonicalization
    assert q.a == 2 and q.b == (1,)
