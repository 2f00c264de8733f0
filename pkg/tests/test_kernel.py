import pytest

from skewpp.kernel import (KernelEvaluator, QuadratureSpec, corr_det, evaluator, recurrence_residual,
                           symmetry_residual)
from skewpp.measure import SliceDP, Weights, brute_force_corr, x_from_q
from skewpp.shapes import validate_corners

SMALL = validate_corners((-1, 3), (-3, 2, 5))
W = Weights(q=0.3)
CAP = 24


@pytest.fixture(scope="module")
def sp():
    return x_from_q(W, SMALL)


@pytest.fixture(scope="module")
def dp():
    return SliceDP(SMALL, W, CAP)


def _lattice_h(t, off):
    return _h(SMALL, t, off)


def test_one_point_against_enumeration(sp, dp):
    ev = evaluator(sp)
    for t in SMALL.t_range():
        for off in range(-3, 3):
            h = _lattice_h(t, off)
            ref = brute_force_corr([(t, h)], SMALL, W, CAP, dp)
            assert abs(ev.K((t, h), (t, h)) - ref) < 1e-10


def test_two_point_against_enumeration(sp, dp):
    U = [(0, _lattice_h(0, 0)), (2, _lattice_h(2, -1))]
    assert abs(corr_det(U, sp) - brute_force_corr(U, SMALL, W, CAP, dp)) < 1e-10


def test_difference_equation_and_symmetry(sp):
    for p1, p2 in (((1, _lattice_h(1, 0)), (0, _lattice_h(0, 1))),
                   ((3, _lattice_h(3, -1)), (3, _lattice_h(3, -1))),
                   ((0, _lattice_h(0, 2)), (2, _lattice_h(2, 0)))):
        assert recurrence_residual(p1, p2, sp) < 1e-10
        assert symmetry_residual(p1, p2, sp) < 1e-10


def test_extended_precision_agrees_with_fft():
    s = x_from_q(Weights(q=0.8), validate_corners((-3, 4), (-6, 1, 8)))
    ev = KernelEvaluator(s)
    c = s.corners
    for (t1, o1), (t2, o2) in (((0, 0), (0, 0)), ((2, -1), (-1, 2)), ((-3, 1), (4, -2)), ((5, 3), (5, -3))):
        j1 = int(round(_h(c, t1, o1) + c.B(t1) + 0.5))
        j2 = int(round(_h(c, t2, o2) + c.B(t2) + 0.5))
        fft = ev._K_fft(t1, j1, t2, j2)
        mp = ev._K_exact_arith(t1, j1, t2, j2)
        assert abs(fft - mp) <= 1e-9 * max(1.0, abs(mp))


def _h(c, t, off):
    return -c.B(t) - 0.5 + off


def test_input_validation(sp):
    ev = evaluator(sp)
    with pytest.raises(ValueError):
        ev.K((0, 0.0), (0, 0.0))
    p = (0, _lattice_h(0, 0))
    with pytest.raises(ValueError):
        ev.det([p, p])
    assert ev.det([]) == 1.0


def test_evaluator_cache_keyed_by_quadrature(sp):
    assert evaluator(sp) is evaluator(sp)
    assert evaluator(sp, QuadratureSpec(rtol=1e-8)) is not evaluator(sp)
