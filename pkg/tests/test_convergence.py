import math

import pytest
from hypothesis import given, settings, strategies as st

from skewpp.convergence import (Cell, ErrorTable, Geometry, ScalingChart, cusp_point, edge_point,
                                interpolated_density)
from skewpp.kernel import evaluator

TWO = Geometry((-2.0, 1.5, 3.0), (-0.5, 2.0))


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["bulk", "edge", "cusp"]), st.floats(-2, 2), st.floats(-2, 2),
       st.sampled_from([0.08, 0.04, 0.02]))
def test_chart_round_trip(regime, x, y, r):
    ch = ScalingChart(regime, 0.31, 0.77, r, 0.4)
    t, h = ch.to_lattice(x, y)
    assert float(h + t / 2 + 0.5).is_integer()
    x2, y2 = ch.to_chart(t, h)
    # rounding moves the point by at most half a site in each lattice direction
    assert abs(y2 - y) <= 0.5 * r ** (1 - ch.py) + 1e-9
    assert abs(x2 - x) <= (0.5 + 0.5 * abs(ch.B)) * r ** (1 - ch.px) + 1e-9
    assert ch.to_lattice(x2, y2) == (t, h)


def test_geometry_lattice_check():
    assert TWO.corners(0.02).u == (-100, 75, 150)
    with pytest.raises(ValueError):
        TWO.corners(0.03)


def test_interpolated_density_at_lattice_points():
    r = 0.1
    ev = evaluator(TWO.specialization(r))
    ch = ScalingChart("cusp", 0.1, 0.5, r, 0.3)
    t, h = ch.to_lattice(0.2, 0.0)
    x, y = ch.to_chart(t, h)
    val, used = interpolated_density(ev, ch, x, y)
    assert abs(val - ev.K((t, h), (t, h))) < 1e-9
    assert len(used) == 4


def test_error_table_monotone():
    cells = [Cell(0.08, (0, 0), 0, 0, 0.1), Cell(0.04, (0, 0), 0, 0, 0.05), Cell(0.02, (0, 0), 0, 0, 0.055)]
    t = ErrorTable("x", cells)
    assert t.monotone() and not t.monotone(slack=1.05)
    assert t.max_err() == 0.1 and t.max_err(0.02) == 0.055
    assert t.to_dict()["monotone"]


def test_edge_and_cusp_points():
    ep = edge_point(TWO, 0.5, "upper")
    assert ep.frozen in (0.0, 1.0)
    lo = edge_point(TWO, 0.5, "lower")
    assert lo.chi0 < ep.chi0
    cp = cusp_point(TWO)
    assert math.isfinite(cp.params.A) and cp.params.A != 0
