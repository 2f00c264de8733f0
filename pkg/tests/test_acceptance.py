"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line that the
terminal summary prints (see conftest.py)."""
import math
import time

import numpy as np
import pytest

from skewpp.asykernels import (AiryParams, K_airy, K_pearcey, PearceyParams, _airy_s_integral,
                               airy_equal_time, heat_kernel, pearcey_equal_time, pearcey_P,
                               pearcey_pde_residual, rho_airy, rho_pearcey)
from skewpp.convergence import run_suite
from skewpp.kernel import corr_det, evaluator, recurrence_residual, symmetry_residual
from skewpp.limitshape import (ActionS, RationalF, boundary_point, chi_left, chi_right,
                               critical_points, cusps, discriminant_N1, expansion_coeffs,
                               free_energy_and_volume, frozen_boundary, log_derivative_fd,
                               n1_variables, relative_discriminant, singular_slope)
from skewpp.measure import (SliceDP, Weights, brute_force_corr, brute_force_Z, log_partition_function,
                            mean_volume, partition_function, x_from_q)
from skewpp.sampler import (SamplerConfig, empirical_correlation, empirical_law, exact_law,
                            sample_exact_batch, sample_mcmc, total_variation)
from skewpp.shapes import profile_B, validate_corners

TWO_CORNER = validate_corners((-10, 40), (-40, 30, 60), 0.05)
N2_SMALL = validate_corners((-1, 3), (-3, 2, 5))


def _on_lattice(t, h):
    return float(h + t / 2 + 0.5).is_integer()


def _random_points(c, rng, n, hspan=3):
    pts = []
    ts = list(c.t_range())
    while len(pts) < n:
        t = int(rng.choice(ts))
        h = float(rng.integers(-hspan, hspan + 1)) - profile_B(t, c)
        if not _on_lattice(t, h):
            h += 0.5
        pts.append((t, h))
    return pts


def _cap_for(c, q, rel=1e-11):
    return int(math.ceil(math.log(rel * (1 - q) / c.n_squares) / math.log(q)))


def test_c01_partition_function(criterion):
    t0 = time.perf_counter()
    geoms = [validate_corners((0,), (-a, b)) for a in (1, 2, 3) for b in (1, 2, 3)]
    geoms.append(validate_corners((-1, 1), (-2, 0, 2)))
    worst = 0.0
    for c in geoms:
        for q in (0.3, 0.5):
            w = Weights(q=q)
            Z = partition_function(x_from_q(w, c))
            Zb, bound, _ = brute_force_Z(c, w, _cap_for(c, q))
            assert bound < 1e-10 * Z
            worst = max(worst, abs(Z - Zb) / Z)
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and dt < 30
    criterion(1, ok, f"max relative error {worst:.2e} over {2 * len(geoms)} cases, {dt:.1f}s")
    assert ok


def test_c02_determinantal_correlations(criterion):
    t0 = time.perf_counter()
    c, w = validate_corners((0,), (-2, 2)), Weights(q=0.5)
    s = x_from_q(w, c)
    dp = SliceDP(c, w, _cap_for(c, 0.5))
    rng = np.random.default_rng(2)
    worst, n = 0.0, 0
    for size in (1, 2, 3):
        for _ in range(8):
            U = list(dict.fromkeys(_random_points(c, rng, size, hspan=2)))
            worst = max(worst, abs(corr_det(U, s) - brute_force_corr(U, c, w, dp.cap, dp)))
            n += 1
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and n >= 20 and dt < 120
    criterion(2, ok, f"max |det K - brute force| {worst:.2e} over {n} sets, {dt:.1f}s")
    assert ok


def test_c03_difference_equations(criterion):
    t0 = time.perf_counter()
    s = x_from_q(Weights(q=0.6), N2_SMALL)
    rng = np.random.default_rng(3)
    worst, kinds = 0.0, set()
    pairs = 0
    while pairs < 120:
        p1, p2 = _random_points(N2_SMALL, rng, 2)
        if p1[0] - 1 < N2_SMALL.t_min:
            continue
        kinds.add(N2_SMALL.eps(p1[0] - 0.5))
        worst = max(worst, recurrence_residual(p1, p2, s))
        pairs += 1
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and kinds == {-1, 1} and dt < 60
    criterion(3, ok, f"max residual {worst:.2e} over {pairs} pairs, both interval types, {dt:.1f}s")
    assert ok


def test_c04_reflection_symmetry(criterion):
    s = x_from_q(Weights(q=0.55), N2_SMALL)
    rng = np.random.default_rng(4)
    res = [symmetry_residual(*_random_points(N2_SMALL, rng, 2), s) for _ in range(60)]
    ok = max(res) < 1e-8
    criterion(4, ok, f"max residual {max(res):.2e} over {len(res)} pairs")
    assert ok


def test_c05_samplers(criterion):
    t0 = time.perf_counter()
    tvs = []
    for c in (validate_corners((0,), (-1, 1)), validate_corners((0,), (-1, 2))):
        w = Weights(q=0.3)
        run = sample_exact_batch(c, w, 25, 100_000, 11)
        tvs.append(total_variation(empirical_law(run), exact_law(c, w, 25)))
    c, w = validate_corners((0,), (-4, 4)), Weights(q=0.5)
    run = sample_mcmc(c, w, SamplerConfig(sweeps=1_000_000, burn_in=1_000, thinning=10, seed=5))
    s = x_from_q(w, c)
    ev = evaluator(s)
    zs = []
    for p in ((0, -0.5), (0, 0.5), (1, 0.0), (-2, -0.5), (2, 0.5), (0, 1.5), (-1, -1.0), (3, 0.0)):
        est, se = empirical_correlation(run, [p])
        zs.append(abs(est - ev.K(p, p)) / se)
    dt = time.perf_counter() - t0
    ok = max(tvs) < 5e-3 and max(zs) < 4 and dt < 300
    criterion(5, ok, f"TV {max(tvs):.2e}, MCMC max |z| {max(zs):.2f} over {len(zs)} points, {dt:.1f}s")
    assert ok


def test_c06_q_to_zero_indicator(criterion):
    s = x_from_q(Weights(q=1e-4), N2_SMALL)
    ev = evaluator(s)
    worst, n = 0.0, 0
    for t in (-2, -1, 0, 1, 2, 3, 4):
        B = profile_B(t, N2_SMALL)
        for off in (-2.5, -1.5, 1.5):
            h = -B + off
            if not _on_lattice(t, h):
                h += 0.5 if off < 0 else -0.5
            target = 1.0 if h < -B else 0.0
            worst = max(worst, abs(ev.K((t, h), (t, h)) - target))
            n += 1
    ok = worst < 1e-3 and n >= 20
    criterion(6, ok, f"max deviation {worst:.2e} at {n} points")
    assert ok


def test_c07_root_structure(criterion):
    bad_count = bad_disc = 0
    for c in (validate_corners((0,), (-40, 40), 0.05), TWO_CORNER):
        F = RationalF.from_corners(c)
        for tau in np.linspace(F.U[0] + 0.01, F.U[-1] - 0.01, 50):
            for chi in np.linspace(-3, 3, 50):
                cp = critical_points(chi, tau, F)
                ncplx = int(np.sum(np.abs(cp.roots.imag) > 1e-9 * np.maximum(1, np.abs(cp.roots))))
                if len(cp.roots) != F.N + 1 or ncplx > 2:
                    bad_count += 1
                if F.N == 1:
                    d = discriminant_N1(*n1_variables(chi, tau, F))
                    if (d < 0) != (cp.kind == "conjugate_pair"):
                        bad_disc += 1
    ok = bad_count == 0 and bad_disc == 0
    criterion(7, ok, f"{bad_count} root-count failures, {bad_disc} N=1 discriminant mismatches on 2x2500 points")
    assert ok


def test_c08_frozen_boundary(criterion):
    F = RationalF.from_corners(TWO_CORNER)
    cs = cusps(F)
    bc = frozen_boundary(F)
    one_cusp = len(cs) == 1 and abs(F.deriv(cs[0].z0, 2)) < 1e-10 \
        and math.exp(F.V[0]) < cs[0].z0 < math.exp(F.U[1])
    rng = np.random.default_rng(8)
    # samples up to |z| = 1e3; farther out the boundary sits on its asymptote and the
    # double root is ill-conditioned
    near = np.nonzero(np.abs(bc.z) <= 1e3)[0]
    idx = rng.choice(near, 200, replace=False)
    disc = max(relative_discriminant(bc.chi[k], bc.tau[k], F) for k in idx)
    zl, zr = math.exp(F.U[0]) * (1 + 1e-7), math.exp(F.U[-1]) * (1 - 1e-7)
    tang = max(abs(float(boundary_point(zl, F)[0]) - chi_left(F)),
               abs(float(boundary_point(zr, F)[0]) - chi_right(F)))
    slopes = [singular_slope(F, j) for j in (1, 2)]
    slope_ok = all(abs(abs(s) - 2.0) < 0.05 for s in slopes)
    ok = one_cusp and disc < 1e-8 and tang < 1e-6 and slope_ok
    criterion(8, ok, f"cusps {len(cs)}, max rel disc {disc:.1e}, tangency err {tang:.1e}, "
                     f"|slopes| {abs(slopes[0]):.4f} {abs(slopes[1]):.4f}")
    assert ok


def test_c09_expansion_coefficients(criterion):
    F = RationalF.from_corners(TWO_CORNER)
    bc = frozen_boundary(F)
    # D > 0 holds on the part of the boundary parametrised by z > 0;
    # finite differences need a margin from the zeros and poles of f, where A blows up
    marks = np.concatenate([F.U, F.V])
    dist = np.array([np.min(np.abs(np.log(abs(z)) - np.append(marks, t))) for z, t in zip(bc.z, bc.tau)])
    pos = np.nonzero((bc.z > 0) & (dist > 0.05) & (np.abs(bc.z) <= 1e3))[0]
    rng = np.random.default_rng(9)
    idx = rng.choice(pos, 20, replace=False)
    ident, dpos, afd = 0.0, True, 0.0
    for k in idx:
        z, chi, tau = bc.z[k], bc.chi[k], bc.tau[k]
        e = expansion_coeffs(z, tau, F)
        ident = max(ident, abs(e.C + e.D), abs(e.E - e.C))
        dpos &= e.D > 0
        S = ActionS(F, chi, tau)
        fd = log_derivative_fd(S, z, 3, h=1e-2 * min(1.0, dist[k]))
        afd = max(afd, abs(fd - e.A) / max(1.0, abs(e.A)))
    ok = ident < 1e-12 and dpos and afd < 1e-6
    criterion(9, ok, f"|C+D|,|E-C| {ident:.1e}, D>0 {dpos}, A vs FD {afd:.1e} at 20 samples")
    assert ok


def test_c10_free_energy_volume(criterion):
    t0 = time.perf_counter()
    F = RationalF.from_corners(TWO_CORNER)
    fe, vol = free_energy_and_volume(F)
    rs = np.array([0.1, 0.05, 0.02])
    E, Vv = [], []
    for r in rs:
        c = validate_corners(tuple(int(round(x / r)) for x in F.V), tuple(int(round(x / r)) for x in F.U), r)
        E.append(-r ** 2 * log_partition_function(x_from_q(Weights(q=math.exp(-r)), c)))
        Vv.append(r ** 3 * mean_volume(c, math.exp(-r)))
    M = np.vander(rs, 3, increasing=True)
    e0, v0 = np.linalg.solve(M, E)[0], np.linalg.solve(M, Vv)[0]
    err_f, err_v = abs(e0 - fe) / abs(fe), abs(v0 - vol) / abs(vol)
    dt = time.perf_counter() - t0
    ok = err_f < 0.01 and err_v < 0.01 and dt < 120
    criterion(10, ok, f"free energy rel err {err_f:.1e}, volume rel err {err_v:.1e}, {dt:.1f}s")
    assert ok


def test_c11_airy_layer(criterion):
    rng = np.random.default_rng(11)
    eq = diag = jump = 0.0
    for _ in range(20):
        A, D = rng.uniform(1, 10), rng.uniform(0.3, 3)
        a1, a2, b = rng.uniform(-3, 3, 3)
        p = AiryParams(A, D)
        eq = max(eq, abs(K_airy((a1, 0), (a2, 0), p) - airy_equal_time(a1, a2, A)))
        diag = max(diag, abs(K_airy((a1, b), (a1, b), p) - rho_airy(a1 + D * b * b / 2, b, p)))
        b1 = rng.uniform(-1, 0.8)
        b2 = b1 + rng.uniform(0.2, 1.0)
        full = _airy_s_integral(a1, b1, a2, b2, A, D, -np.inf, np.inf)
        jump = max(jump, abs(full - heat_kernel(a1 - a2, b1 - b2, D)))
    ok = max(eq, diag, jump) < 1e-6
    criterion(11, ok, f"equal-time {eq:.1e}, diagonal {diag:.1e}, discontinuity {jump:.1e} over 20 draws")
    assert ok


def test_c12_pearcey_layer(criterion):
    g = np.linspace(-2, 2, 9)
    ser = max(abs(pearcey_P(s, x, y, "series") - pearcey_P(s, x, y, "quad"))
              for s in (1, -1) for x in g for y in g)
    pde = max(abs(r) for s in (1, -1) for x, y in ((0.7, -0.4), (-1.1, 0.9), (0.2, 1.6))
              for r in pearcey_pde_residual(s, x, y, 1e-2))
    rng = np.random.default_rng(12)
    eq = diag = 0.0
    p = PearceyParams()
    for _ in range(8):
        x1, x2, y = rng.uniform(-2, 2, 3)
        eq = max(eq, abs(K_pearcey((x1, y), (x2, y), p) - pearcey_equal_time(x1, x2, y)))
        diag = max(diag, abs(K_pearcey((x1, y), (x1, y), p) - rho_pearcey(x1, y)))
    p0 = abs(pearcey_P(-1, 0.0, 0.0) - math.gamma(0.25) / (2 ** 1.5 * math.pi))
    ok = ser < 1e-8 and pde < 1e-5 and eq < 1e-6 and diag < 1e-6 and p0 < 1e-10
    criterion(12, ok, f"series/quad {ser:.1e}, PDE {pde:.1e}, equal-time {eq:.1e}, diagonal {diag:.1e}, "
                      f"P-(0,0) {p0:.1e}")
    assert ok


@pytest.mark.slow
def test_c13_convergence_suites(criterion):
    t0 = time.perf_counter()
    rep = run_suite("all")
    dt = time.perf_counter() - t0
    names = {t["name"]: t["monotone"] for t in rep["tables"]}
    pinned = rep["gaussian_side"]["matches_default"]
    ok = all(names.values()) and pinned and dt < 1200
    worst = ", ".join(f"{n}: {'ok' if m else 'NOT monotone'}" for n, m in names.items())
    criterion(13, ok, f"{worst}; Gaussian side pinned {rep['gaussian_side']['best']}, {dt:.0f}s")
    assert ok
