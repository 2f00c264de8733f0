import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewpp.errors import (CenteringViolation, InterlacingViolation, MonotonicityViolation,
                           OrderingViolation)
from skewpp.measure import Weights
from skewpp.sampler import sample_exact_batch
from skewpp.shapes import (CornerData, PlanePartition, assemble, interlaces, profile_B, render_svg,
                           slices_of, tile_index, tiles_of, validate_corners, volume)

L_SHAPE = validate_corners((-1, 3), (-3, 2, 5))


def test_validate_rejects_bad_corners():
    with pytest.raises(OrderingViolation):
        validate_corners((0,), (1, 2))
    with pytest.raises(CenteringViolation):
        validate_corners((-1, 2), (-3, 0, 5))
    with pytest.raises(ValueError):
        validate_corners((0,), (-1,))
    with pytest.raises(ValueError):
        validate_corners((0,), (-1, 1), r=0)


def test_box_dimensions_and_inner_shape():
    c = L_SHAPE
    assert (c.a, c.b) == (3, 5)
    assert c.mu == (3, 0, 0)
    assert c.n_squares == 12
    assert sum(len(s) for s in c.diagonals.values()) == c.n_squares
    assert list(c.t_range()) == list(range(-2, 5))
    assert not c.in_shape(1, 3) and c.in_shape(1, 4)


def test_profile_slopes():
    c = L_SHAPE
    ts = np.arange(-3, 5.5, 0.5)
    slopes = np.diff(profile_B(ts, c)) / 0.5
    assert set(np.round(slopes, 9)) <= {-0.5, 0.5}
    # slope changes sign exactly at the corners
    assert profile_B(-1, c) < profile_B(-2, c) and profile_B(-1, c) < profile_B(0, c)


def test_json_round_trip():
    c = validate_corners((-1, 3), (-3, 2, 5), 0.1)
    assert CornerData.from_dict(json.loads(c.to_json())) == c


def test_interlaces():
    assert interlaces((3, 1), (2,))
    assert interlaces((3, 1), (1, 1))
    assert not interlaces((3, 1), (4,))
    assert not interlaces((3, 1), (2, 2))


def test_monotonicity_is_enforced():
    p = PlanePartition.from_rows(L_SHAPE, [[2, 1], [3, 2, 1], [2]])
    assert volume(p) == 11
    with pytest.raises(MonotonicityViolation):
        PlanePartition.from_rows(L_SHAPE, [[1, 2]])
    with pytest.raises(MonotonicityViolation):
        p.with_increment(2, 4, 5)


def test_interlacing_violation_reported():
    p = PlanePartition.from_rows(L_SHAPE, [[1]])
    h = p.heights.copy()
    h[1, 0], h[2, 1] = 2, 1
    h[2, 0] = 3
    bad = PlanePartition(L_SHAPE, h)
    with pytest.raises(InterlacingViolation):
        slices_of(bad)


def _draws(seed, n=20):
    return sample_exact_batch(L_SHAPE, Weights(q=0.3), 14, n, seed).draws


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_slices_tiles_round_trip(seed):
    for p in _draws(seed, 5):
        s = slices_of(p)
        assert assemble(s) == p
        ts = tiles_of(p)
        assert len(ts) == L_SHAPE.n_squares
        for t, h in ts.points:
            j = tile_index(t, h, L_SHAPE)
            assert j in {lam - k for k, lam in enumerate(s.lam[t])}


def test_tile_index_parity():
    with pytest.raises(ValueError):
        tile_index(0, 0.0, L_SHAPE)


def test_empty_partition_tiles_and_svg():
    p = PlanePartition.empty(L_SHAPE)
    ts = tiles_of(p)
    assert ts.to_csv().startswith("t,h\n")
    for t, h in ts.points:
        assert h < -profile_B(t, L_SHAPE)
    svg = render_svg(tiles_of(_draws(3, 1)[0]), L_SHAPE)
    assert svg.startswith("<svg") and svg.count("<polygon") > L_SHAPE.n_squares
