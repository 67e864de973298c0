import math

import pytest

from qradon.quadform import QuadraticForm
from qradon.sharpness import (
    SharpnessConfig,
    condition_i_probe,
    condition_ii_probe,
    theorem_region,
)

X2 = QuadraticForm(((2,),))
DIAG2 = QuadraticForm(((2, 0), (0, 2)))
T_LIST = tuple(2**i for i in range(6, 15))


def test_condition_ii_divergent():
    cfg = SharpnessConfig(DIAG2, 0.3, p=2.0, q=2.0, t_list=T_LIST)
    rep = condition_ii_probe(cfg)
    assert rep.regime == "divergent"
    assert rep.target == pytest.approx(0.4)
    assert abs(rep.fitted_exponent - rep.target) <= rep.window
    assert rep.passed


def test_condition_ii_convergent():
    cfg = SharpnessConfig(DIAG2, 0.6, p=2.0, q=2.0, t_list=T_LIST)
    rep = condition_ii_probe(cfg)
    assert rep.regime == "convergent"
    assert rep.passed
    tails = rep.details["cauchy_tails"]
    assert all(b <= a for a, b in zip(tails, tails[1:]))


def test_condition_ii_boundary():
    cfg = SharpnessConfig(DIAG2, 0.5, p=2.0, q=2.0, t_list=T_LIST)
    rep = condition_ii_probe(cfg)
    assert rep.regime == "boundary"
    assert abs(rep.fitted_exponent) <= 0.05
    assert rep.details["log_linear_rel_err"] < 0.1
    assert rep.passed


def test_condition_i_divergent_fit():
    cfg = SharpnessConfig(
        X2, 0.5, p=2.0, q=2.0, t_list=tuple(2**i for i in range(8, 13))
    )
    rep = condition_i_probe(cfg)
    assert rep.details["min_pointwise_ratio"] > 0.1
    assert rep.details["f_norm_tracking_ok"]
    assert abs(rep.fitted_exponent - rep.target) <= 0.07
    assert rep.passed


def test_condition_i_convergent_regime_is_flat():
    cfg = SharpnessConfig(
        X2, 0.5, p=2.0, q=4.0, t_list=tuple(2**i for i in range(8, 13))
    )
    rep = condition_i_probe(cfg)
    assert rep.target == 0.0
    assert abs(rep.fitted_exponent) <= 0.1


def test_theorem_region():
    # k=2, lam=3/4, p=2: condition (i) boundary at 1/q = 3/8
    r = theorem_region(2, 0.75, 2.0, 8.0 / 3.0)
    assert r.condition_i and r.condition_i_boundary and r.condition_ii
    assert r.region == "boundary"
    assert theorem_region(1, 0.5, 2.0, 4.0).crossover_lambda == pytest.approx(0.4)
    # lam = 1: condition (i) degenerates to 1/q <= 1/p
    r = theorem_region(2, 1.0, 2.0, 2.0)
    assert r.condition_i
    assert theorem_region(2, 0.5, 4.0, 1.5).region == "outside"
    with pytest.raises(ValueError):
        theorem_region(1, 0.5, 1.0, 2.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SharpnessConfig(X2, 1.5, p=2.0, q=2.0)
    with pytest.raises(ValueError):
        SharpnessConfig(X2, 0.5, p=2.0, q=2.0, t_list=(64, 32))
    with pytest.raises(ValueError):
        SharpnessConfig(X2, 0.5, p=2.0, q=2.0, epsilon=-1.0)
    cfg = SharpnessConfig(X2, 0.5, p=2.0, q=2.0)
    assert cfg.alpha == pytest.approx(3.0 / 4.0 + 0.05)
