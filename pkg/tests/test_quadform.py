import math
from fractions import Fraction

import numpy as np
import pytest

from qradon.quadform import (
    AdjointForm,
    QuadraticForm,
    adjoint,
    comparability_constants,
    evaluate,
    evaluate_batch,
)

X2 = QuadraticForm(((2,),))
HEX = QuadraticForm(((2, 1), (1, 2)))
DIAG2 = QuadraticForm(((2, 0), (0, 2)))


def test_evaluate_examples():
    assert X2((3,)) == 9
    assert HEX((1, 1)) == 3
    assert HEX((0, 0)) == 0
    assert evaluate(HEX, (1, 1)) == 3


def test_evaluate_batch_matches_scalar():
    pts = np.array([[1, 2], [-3, 1], [0, 0], [5, -5]])
    vals = evaluate_batch(HEX, pts)
    assert [HEX(tuple(p)) for p in pts] == list(vals)


def test_evaluate_is_even_and_positive():
    for x in range(-6, 7):
        for y in range(-6, 7):
            v = HEX((x, y))
            assert v == HEX((-x, -y))
            assert v >= 0
            assert (v == 0) == (x == 0 and y == 0)


def test_eigenvalue_bounds_envelope():
    for form in (X2, HEX, DIAG2):
        k = form.dim
        for pt in np.ndindex(*(9,) * k):
            x = tuple(c - 4 for c in pt)
            norm2 = sum(c * c for c in x)
            v = form(x)
            assert form.eig_min * norm2 / 2 <= v + 1e-9
            assert v <= form.eig_max * norm2 / 2 + 1e-9


def test_adjoint_scalar():
    adj = adjoint(X2)
    assert adj.evaluate_exact((1,)) == Fraction(1, 4)
    assert adj.evaluate((2.0,)) == pytest.approx(1.0)


def test_adjoint_hexagonal_exact():
    adj = adjoint(HEX)
    # Q*(x) = (x1^2 - x1 x2 + x2^2) / 3
    assert adj.evaluate_exact((1, 0)) == Fraction(1, 3)
    assert adj.evaluate_exact((1, 1)) == Fraction(1, 3)
    assert adj.evaluate_exact((1, -1)) == Fraction(1, 1)


def test_adjoint_inverse_identity():
    for form in (X2, HEX, DIAG2):
        adj = adjoint(form)
        prod = adj.array @ form.array
        assert np.allclose(prod, np.eye(form.dim), atol=1e-12)


def test_comparability_constants():
    c1, c2 = comparability_constants(HEX, HEX)
    assert c1 <= 1.0 <= c2
    c1, c2 = comparability_constants(QuadraticForm(((2,),)), QuadraticForm(((4,),)))
    assert c1 <= 2.0 <= c2
    # random-direction Rayleigh-quotient oracle
    c1, c2 = comparability_constants(DIAG2, HEX)
    rng = np.random.default_rng(7)
    for _ in range(10000):
        x = rng.standard_normal(2)
        qv = 0.5 * x @ DIAG2.array @ x
        rv = 0.5 * x @ HEX.array @ x
        assert c1 * qv <= rv * (1 + 1e-12)
        assert rv <= c2 * qv * (1 + 1e-12)


def test_constructor_rejects_invalid():
    with pytest.raises(ValueError):
        QuadraticForm(((3,),))  # odd diagonal
    with pytest.raises(ValueError):
        QuadraticForm(((2, 1), (0, 2)))  # not symmetric
    with pytest.raises(ValueError):
        QuadraticForm(((2, 5), (5, 2)))  # not positive definite
    with pytest.raises(ValueError):
        X2((1, 2))  # dimension mismatch


def test_det_and_dim():
    assert X2.det == 2
    assert HEX.det == 3
    assert HEX.dim == 2
