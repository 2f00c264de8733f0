import math

import numpy as np
import pytest
from scipy import integrate

from skewpp.asykernels import (AiryParams, BulkParams, K_airy, K_pearcey, PearceyParams, airy_Ai,
                               airy_equal_time, airy_sq_tail, bulk_kernel, heat_kernel, incomplete_beta,
                               pearcey_equal_time, pearcey_kernel_pde_residuals, pearcey_P, rho_airy,
                               rho_pearcey, rho_pearcey_general, sine_equal_time, sine_kernel_det)
from skewpp.errors import OutOfSupportedRange


def test_sine_kernel_basics():
    th = 1.1
    p = BulkParams(np.exp(1j * th), 1, 0.3)
    assert sine_equal_time(0, p) == pytest.approx(th / math.pi)
    assert sine_kernel_det([0.0], th) == pytest.approx(th / math.pi)
    # repulsion: the two-point function is below the product of densities
    assert sine_kernel_det([0.0, 1.0], th) < (th / math.pi) ** 2
    for dh in range(-3, 4):
        assert bulk_kernel(dh, 0, p) == pytest.approx(sine_equal_time(dh, p), abs=1e-12)


@pytest.mark.parametrize("eps", [1, -1])
def test_incomplete_beta_closed_form_vs_quadrature(eps):
    p = BulkParams(1.3 * np.exp(0.9j), eps, 0.4)
    for k, l in ((0, 0), (1, 2), (2, -1), (3, 1)):
        for side in (1, -1):
            a = incomplete_beta(k, l, p, side, "exact")
            b = incomplete_beta(k, l, p, side, "quad")
            assert abs(a - b) < 1e-10


def test_airy_helpers():
    with pytest.raises(OutOfSupportedRange):
        airy_Ai(20.0)
    u = 0.7
    tail = integrate.quad(lambda v: airy_Ai(v) ** 2, u, 15)[0]
    assert abs(airy_sq_tail(u) - tail) < 1e-10
    assert integrate.quad(lambda a: heat_kernel(a, 0.5, 2.0), -30, 30)[0] == pytest.approx(1.0)


def test_airy_kernel_equal_time_and_diagonal():
    p = AiryParams(3.0, 1.5)
    for a1, a2 in ((0.2, -0.4), (-1.0, 0.8), (0.5, 0.5)):
        assert abs(K_airy((a1, 0.0), (a2, 0.0), p) - airy_equal_time(a1, a2, p.A)) < 1e-9
    for a, b in ((0.3, 0.4), (-0.7, -0.2)):
        assert abs(K_airy((a, b), (a, b), p) - rho_airy(a + p.D * b * b / 2, b, p)) < 1e-9
    assert airy_equal_time(0.3, -0.2, 3.0) == pytest.approx(airy_equal_time(-0.2, 0.3, 3.0))


def test_airy_determinants_are_probabilities():
    p = AiryParams(2.0, 1.0)
    pts = [(0.1, -0.3), (0.5, 0.2), (-0.4, 0.6)]
    M = np.array([[K_airy(a, b, p) for b in pts] for a in pts])
    for k in range(1, 4):
        assert np.linalg.det(M[:k, :k]) > 0


def test_pearcey_series_matches_quadrature():
    for s in (1, -1):
        for x, y in ((0.3, -0.8), (1.5, 1.2), (-1.1, 0.4)):
            assert abs(pearcey_P(s, x, y, "series") - pearcey_P(s, x, y, "quad")) < 1e-10


def test_pearcey_kernel_consistency():
    p = PearceyParams()
    for x1, x2, y in ((0.2, -0.5, 0.3), (1.0, 0.4, -0.6)):
        assert abs(K_pearcey((x1, y), (x2, y), p) - pearcey_equal_time(x1, x2, y)) < 1e-9
    assert abs(K_pearcey((0.4, 0.1), (0.4, 0.1), p) - rho_pearcey(0.4, 0.1)) < 1e-9
    assert rho_pearcey(0.0, 0.0) > 0
    for r in pearcey_kernel_pde_residuals(0.3, -0.2, -0.4, 0.5):
        assert abs(r) < 1e-6


def test_pearcey_scaling_and_reflection():
    q = PearceyParams(A=-3.0, C=0.7)
    for x, y in ((0.3, 0.2), (-0.6, -0.4)):
        assert abs(K_pearcey((x, y), (x, y), q) - rho_pearcey_general(x, y, q)) < 1e-9
    # determinants are unchanged by the transposition used for A < 0
    pts = [(0.2, 0.1), (-0.3, 0.5)]
    M = np.array([[K_pearcey(a, b, q) for b in pts] for a in pts])
    assert np.linalg.det(M) > 0
    with pytest.raises(ValueError):
        K_pearcey((0, 0), (0, 0), PearceyParams(A=0.0))
