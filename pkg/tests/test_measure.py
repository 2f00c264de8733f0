import math

import numpy as np
import pytest

from skewpp.errors import DivergentProduct, StateSpaceTooLarge, UnderdeterminedWeights
from skewpp.measure import (SliceDP, Weights, brute_force_Z, brute_force_corr, log_partition_function,
                            mean_volume, weight, x_from_q)
from skewpp.shapes import PlanePartition, validate_corners

SMALL = validate_corners((-1, 3), (-3, 2, 5))


def test_product_formula_matches_enumeration():
    w = Weights(q=0.3)
    Z, bound, n = brute_force_Z(SMALL, w, 12)
    assert n > 0
    assert abs(Z - math.exp(log_partition_function(x_from_q(w, SMALL)))) <= bound + 1e-12 * Z


def test_inhomogeneous_product_formula():
    qt = {t: 0.2 + 0.03 * (t + 2) for t in SMALL.t_range()}
    w = Weights(q_t=qt)
    Z, bound, _ = brute_force_Z(SMALL, w, 12)
    assert abs(Z - math.exp(log_partition_function(x_from_q(w, SMALL)))) <= bound + 1e-12 * Z


def test_constant_table_equals_homogeneous():
    c = SMALL
    a = log_partition_function(x_from_q(Weights(q=0.4), c))
    b = log_partition_function(x_from_q(Weights(q_t={t: 0.4 for t in c.t_range()}), c))
    assert abs(a - b) < 1e-12


def test_gauge_invariance():
    w = Weights(q=0.4)
    assert abs(log_partition_function(x_from_q(w, SMALL, 2.5))
               - log_partition_function(x_from_q(w, SMALL))) < 1e-12


def test_mean_volume_is_log_derivative():
    q, h = 0.5, 1e-6
    lz = lambda x: log_partition_function(x_from_q(Weights(q=x), SMALL))
    fd = q * (lz(q + h) - lz(q - h)) / (2 * h)
    assert abs(mean_volume(SMALL, q) - fd) < 1e-6


def test_weight_of_partition():
    p = PlanePartition.from_rows(SMALL, [[1], [2, 1]])
    assert weight(p, Weights(q=0.5)) == 0.5 ** 4
    assert weight(p, Weights(q_t={t: 0.5 for t in SMALL.t_range()})) == pytest.approx(0.5 ** 4)


def test_one_point_probability_bounds():
    w = Weights(q=0.3)
    dp = SliceDP(SMALL, w, 10)
    for t in SMALL.t_range():
        B = SMALL.B(t)
        for h in np.arange(-B - 3.5, -B + 3, 1.0):
            p = brute_force_corr([(t, h)], SMALL, w, 10, dp)
            assert -1e-12 <= p <= 1 + 1e-12
        # deep below the profile every tile is present
        assert brute_force_corr([(t, -B - 20.5)], SMALL, w, 10, dp) == pytest.approx(1.0)


def test_errors():
    with pytest.raises(UnderdeterminedWeights):
        Weights(q_t={0: 0.5}).at(1)
    with pytest.raises(DivergentProduct):
        log_partition_function(x_from_q(Weights(q=1.0), SMALL))
    with pytest.raises(StateSpaceTooLarge):
        SliceDP(validate_corners((0,), (-20, 20)), Weights(q=0.5), 30)
    with pytest.raises(ValueError):
        Weights.from_dict({"q": 1.5})
