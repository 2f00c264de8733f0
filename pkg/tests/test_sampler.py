import numpy as np
import pytest

from skewpp.errors import CapTooSmall, EmptyRun
from skewpp.measure import Weights
from skewpp.sampler import (SamplerConfig, batch_means, empirical_correlation, exact_law,
                            mcmc_transition_matrix, sample_exact_batch, sample_mcmc, tile_indicator)
from skewpp.shapes import PlanePartition, validate_corners, validate_plane_partition

TINY = validate_corners((0,), (-1, 2))


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(mode="gibbs")
    with pytest.raises(ValueError):
        SamplerConfig(sweeps=10, burn_in=10)
    with pytest.raises(ValueError):
        SamplerConfig(thinning=0)


def test_exact_sampler_is_seeded_and_valid():
    w = Weights(q=0.3)
    a = sample_exact_batch(TINY, w, 20, 50, 7)
    b = sample_exact_batch(TINY, w, 20, 50, 7)
    c = sample_exact_batch(TINY, w, 20, 50, 8)
    assert np.array_equal(a.heights, b.heights)
    assert not np.array_equal(a.heights, c.heights)
    for p in a.draws:
        validate_plane_partition(p)
        assert p.heights.max() <= 20


def test_cap_warning():
    with pytest.warns(CapTooSmall):
        sample_exact_batch(TINY, Weights(q=0.9), 2, 1, 0)


def test_exact_law_normalised():
    law = exact_law(TINY, Weights(q=0.3), 6)
    assert sum(law.values()) == pytest.approx(1.0)


def test_mcmc_detailed_balance():
    w = Weights(q=0.4)
    law = exact_law(TINY, w, 2)
    states = [PlanePartition(TINY, np.frombuffer(k, dtype=np.int64).reshape(TINY.a, TINY.b))
              for k in law]
    P = mcmc_transition_matrix(TINY, w, states)
    pi = np.array([law[s.heights.tobytes()] for s in states])
    assert np.allclose(P.sum(axis=1), 1.0)
    assert np.all(P >= -1e-15)
    flow = pi[:, None] * P
    assert np.max(np.abs(flow - flow.T)) < 1e-14


def test_mcmc_deterministic_and_valid():
    cfg = SamplerConfig(sweeps=2_000, burn_in=100, thinning=5, seed=3)
    a = sample_mcmc(TINY, Weights(q=0.5), cfg)
    b = sample_mcmc(TINY, Weights(q=0.5), cfg)
    assert np.array_equal(a.heights, b.heights)
    assert len(a) == (2_000 - 100) // 5
    assert 0 < a.acceptance <= 1
    validate_plane_partition(a.draws[-1])


def test_mcmc_volume_matches_exact():
    w = Weights(q=0.5)
    run = sample_mcmc(TINY, w, SamplerConfig(sweeps=200_000, burn_in=1_000, thinning=4, seed=1))
    law = exact_law(TINY, w, 40)
    exact = sum(p * np.where((h := np.frombuffer(k, dtype=np.int64)) > 0, h, 0).sum() for k, p in law.items())
    est, se = batch_means(run.volumes())
    assert abs(est - exact) < 4 * se


def test_tile_indicator_matches_tiles():
    run = sample_exact_batch(TINY, Weights(q=0.4), 20, 30, 2)
    for k in range(len(run)):
        pts = run.tiles(k).points
        for t, h in pts:
            assert tile_indicator(run, t, h)[k]


def test_estimators_errors():
    with pytest.raises(EmptyRun):
        batch_means(np.array([]))
    run = sample_exact_batch(TINY, Weights(q=0.4), 20, 40, 2)
    assert empirical_correlation(run, []) == (1.0, 0.0)
    m, se = batch_means(np.ones(100))
    assert m == 1.0 and se == 0.0
