"""Samplers for the q^vol measure on skew plane partitions.

exact_capped: backward partition functions over capped slice states, then forward
categorical draws along the diagonals.  mcmc: single-cube add/remove moves with a
uniform proposal over the currently legal moves and the Hastings correction.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import CapTooSmall, EmptyRun
from .measure import SliceDP, Weights
from .shapes import OUTSIDE, CornerData, PlanePartition, TileSet, tiles_of, validate_plane_partition


@dataclass(frozen=True)
class SamplerConfig:
    mode: str = "mcmc"           # "exact_capped" or "mcmc"
    cap: int = 30
    sweeps: int = 10_000
    burn_in: int = 1_000
    thinning: int = 10
    seed: int = 0
    draws: int = 1               # exact mode: number of independent draws

    def __post_init__(self):
        if self.mode not in ("exact_capped", "mcmc"):
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if not self.sweeps > self.burn_in >= 0:
            raise ValueError("need sweeps > burn_in >= 0")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")


@dataclass
class SampleRun:
    """Draws stored as a stacked (n, a, b) height array; OUTSIDE marks the inner shape."""
    shape: CornerData
    heights: np.ndarray
    acceptance: float | None = None
    truncation: float | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.heights)

    @property
    def draws(self) -> list:
        return [PlanePartition(self.shape, h) for h in self.heights]

    def volumes(self) -> np.ndarray:
        h = np.where(self.heights > 0, self.heights, 0)
        return h.reshape(len(h), -1).sum(axis=1)

    def tiles(self, k: int = -1) -> TileSet:
        return tiles_of(PlanePartition(self.shape, self.heights[k]))


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator; a Generator passes through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(int(seed) & (2 ** 64 - 1)))


# ---------------------------------------------------------------- exact, capped

def _check_cap(c: CornerData, w: Weights, H: int):
    q = w.q_max(c)
    if q ** H * c.n_squares > 1e-6:
        warnings.warn(f"cap H={H} leaves q^H * squares = {q ** H * c.n_squares:.2e} > 1e-6",
                      CapTooSmall, stacklevel=3)


def _assemble(c: CornerData, dp: SliceDP, idx: dict) -> np.ndarray:
    """(n, a, b) heights from per-diagonal state indices."""
    n = len(next(iter(idx.values())))
    h = np.broadcast_to(PlanePartition.empty(c).heights, (n, c.a, c.b)).copy()
    for t, sq in c.diagonals.items():
        if not sq:
            continue
        vals = dp.states[t][idx[t]]
        ii = np.array([i - 1 for i, _ in sq])
        jj = np.array([j - 1 for _, j in sq])
        h[:, ii, jj] = vals
    return h


def _categorical(rng, probs: np.ndarray, size: int) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    return np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), len(cdf) - 1)


def sample_exact_batch(c: CornerData, w: Weights, H: int, n: int, rng=0,
                       dp: SliceDP | None = None) -> SampleRun:
    """n independent draws from the measure conditioned on max entry <= H."""
    _check_cap(c, w, H)
    rng = make_rng(rng)
    dp = dp or SliceDP(c, w, H)
    Z = dp.backward()
    ts = dp.ts
    idx = {ts[0]: _categorical(rng, Z[ts[0]], n)}
    for t in ts[1:]:
        prev = idx[t - 1]
        cur = np.empty(n, dtype=np.int64)
        T = dp.trans[t - 1]
        for x in np.unique(prev):
            sel = np.nonzero(prev == x)[0]
            row = T.getrow(int(x))
            probs = row.data * Z[t][row.indices]
            cur[sel] = row.indices[_categorical(rng, probs, len(sel))]
        idx[t] = cur
    h = _assemble(c, dp, idx)
    q = w.q_max(c)
    bound = c.n_squares * q ** (H + 1) / (1 - q) if q < 1 else math.inf
    return SampleRun(c, h, truncation=bound, meta={"mode": "exact_capped", "cap": H, "draws": n})


def sample_exact_capped(c: CornerData, w: Weights, H: int, rng=0) -> PlanePartition:
    return sample_exact_batch(c, w, H, 1, rng).draws[0]


# ---------------------------------------------------------------- mcmc

@numba.njit(cache=True)
def _legal(h, i, j, kind):
    """kind 0: add a cube at (i, j); kind 1: remove one.  0-based indices."""
    a, b = h.shape
    x = h[i, j]
    if x == OUTSIDE:
        return False
    if kind == 0:
        if i > 0 and h[i - 1, j] != OUTSIDE and h[i - 1, j] < x + 1:
            return False
        if j > 0 and h[i, j - 1] != OUTSIDE and h[i, j - 1] < x + 1:
            return False
        return True
    if x < 1:
        return False
    if i + 1 < a and h[i + 1, j] > x - 1:
        return False
    if j + 1 < b and h[i, j + 1] > x - 1:
        return False
    return True


@numba.njit(cache=True)
def _refresh(h, i, j, moves, pos, count):
    """Re-evaluate both moves at (i, j) and its four neighbours; returns the new count."""
    a, b = h.shape
    for di, dj in ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)):
        ii, jj = i + di, j + dj
        if ii < 0 or jj < 0 or ii >= a or jj >= b:
            continue
        for kind in (0, 1):
            m = 2 * (ii * b + jj) + kind
            ok = _legal(h, ii, jj, kind)
            if ok and pos[m] < 0:
                moves[count] = m
                pos[m] = count
                count += 1
            elif not ok and pos[m] >= 0:
                k = pos[m]
                last = moves[count - 1]
                moves[k] = last
                pos[last] = k
                pos[m] = -1
                count -= 1
    return count


@numba.njit(cache=True)
def _init_moves(h):
    a, b = h.shape
    moves = np.empty(2 * a * b, dtype=np.int64)
    pos = -np.ones(2 * a * b, dtype=np.int64)
    count = 0
    for i in range(a):
        for j in range(b):
            for kind in (0, 1):
                if _legal(h, i, j, kind):
                    m = 2 * (i * b + j) + kind
                    moves[count] = m
                    pos[m] = count
                    count += 1
    return moves, pos, count


@numba.njit(cache=True)
def _run_chain(h, logq, t_off, n_sweeps, burn_in, thinning, attempts, seed):
    """Metropolis-Hastings chain; logq[t - t_off] is log q_t.  Returns (samples, accepted)."""
    np.random.seed(seed)
    a, b = h.shape
    moves, pos, count = _init_moves(h)
    n_keep = (n_sweeps - burn_in) // thinning
    out = np.empty((n_keep, a, b), dtype=h.dtype)
    accepted = 0
    k = 0
    for s in range(n_sweeps):
        for _ in range(attempts):
            if count == 0:
                break
            m = moves[np.random.randint(count)]
            kind = m % 2
            cell = m // 2
            i, j = cell // b, cell % b
            d = 1 if kind == 0 else -1
            h[i, j] += d
            new_count = _refresh(h, i, j, moves, pos, count)
            lw = d * logq[j - i - t_off] + math.log(count) - math.log(new_count)
            if lw >= 0 or np.random.random() < math.exp(lw):
                count = new_count
                accepted += 1
            else:
                h[i, j] -= d
                count = _refresh(h, i, j, moves, pos, new_count)
        if s >= burn_in and (s - burn_in) % thinning == thinning - 1 and k < n_keep:
            out[k] = h
            k += 1
    return out[:k], accepted


def _log_q_table(c: CornerData, w: Weights) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.array([math.log(w.at(t)) if w.at(t) > 0 else -np.inf for t in c.t_range()])


def sample_mcmc(c: CornerData, w: Weights, cfg: SamplerConfig, rng=None,
                start: PlanePartition | None = None) -> SampleRun:
    """One chain; a sweep is n_squares attempted moves.  Keeps every `thinning`-th sweep after burn-in."""
    rng = make_rng(cfg.seed if rng is None else rng)
    h = (start or PlanePartition.empty(c)).heights.copy()
    logq = _log_q_table(c, w)
    seed = int(rng.integers(0, 2 ** 31 - 1))
    attempts = max(1, c.n_squares)
    t0 = time.perf_counter()
    out, acc = _run_chain(h, logq, c.t_min, int(cfg.sweeps), int(cfg.burn_in), int(cfg.thinning),
                          attempts, seed)
    wall = time.perf_counter() - t0
    rate = acc / (cfg.sweeps * attempts)
    validate_plane_partition(PlanePartition(c, out[-1] if len(out) else h))
    return SampleRun(c, out, acceptance=rate,
                     meta={"mode": "mcmc", "seed": cfg.seed, "sweeps": cfg.sweeps, "burn_in": cfg.burn_in,
                           "thinning": cfg.thinning, "acceptance_rate": rate, "wall_time": wall})


def mcmc_transition_matrix(c: CornerData, w: Weights, states: list) -> np.ndarray:
    """Exact one-step kernel of the chain restricted to `states` (moves leaving the list are dropped).

    Used to check detailed balance on small truncated chains."""
    logq = _log_q_table(c, w)
    key = {p.heights.tobytes(): k for k, p in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for k, p in enumerate(states):
        h = p.heights.copy()
        moves, pos, count = _init_moves(h)
        for m in moves[:count]:
            kind, cell = m % 2, m // 2
            i, j = cell // c.b, cell % c.b
            d = 1 if kind == 0 else -1
            h2 = h.copy()
            h2[i, j] += d
            k2 = key.get(h2.tobytes())
            if k2 is None:
                continue
            new_count = _init_moves(h2)[2]
            acc = min(1.0, math.exp(d * logq[j - i - c.t_min]) * count / new_count)
            P[k, k2] += acc / count
        P[k, k] = 1.0 - P[k].sum()
    return P


# ---------------------------------------------------------------- estimators

def tile_indicator(run: SampleRun, t: int, h: float) -> np.ndarray:
    """Boolean per draw: is (t, h) a horizontal-tile centre."""
    sq = run.shape.diagonals.get(t, [])
    if not sq:
        return np.zeros(len(run), dtype=bool)
    ii = np.array([i - 1 for i, _ in sq])
    jj = np.array([j - 1 for _, j in sq])
    off = np.array([(i + j - 1) / 2 for i, j in sq])
    vals = run.heights[:, ii, jj] - off[None, :]
    return np.any(np.abs(vals - h) < 1e-9, axis=1)


def batch_means(x: np.ndarray, n_batches: int = 20) -> tuple:
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n == 0:
        raise EmptyRun("no draws")
    nb = min(n_batches, n)
    m = n // nb
    means = x[: nb * m].reshape(nb, m).mean(axis=1)
    se = float(means.std(ddof=1) / math.sqrt(nb)) if nb > 1 else math.inf
    return float(x.mean()), se


def empirical_correlation(run: SampleRun, U, n_batches: int = 20) -> tuple:
    """(estimate, batch-means standard error) of P(U subset of sigma(pi))."""
    if len(run) == 0:
        raise EmptyRun("run has no draws")
    U = list(U)
    if not U:
        return 1.0, 0.0
    ind = np.ones(len(run), dtype=bool)
    for t, h in U:
        ind &= tile_indicator(run, int(t), float(h))
    return batch_means(ind, n_batches)


def empirical_law(run: SampleRun) -> dict:
    """Frequencies of distinct configurations."""
    flat = run.heights.reshape(len(run), -1)
    uniq, counts = np.unique(flat, axis=0, return_counts=True)
    return {u.tobytes(): n / len(run) for u, n in zip(uniq, counts)}


def exact_law(c: CornerData, w: Weights, H: int) -> dict:
    """Capped law over configurations, enumerated through the slice DP (small shapes only)."""
    dp = SliceDP(c, w, H)
    Z = dp.backward()
    ts = dp.ts
    paths = [({ts[0]: k}, math.log(Z[ts[0]][k])) for k in np.nonzero(Z[ts[0]])[0]]
    lognorm = math.log(Z[ts[0]].sum())
    for t in ts[1:]:
        new = []
        for idx, lp in paths:
            x = idx[t - 1]
            row = dp.trans[t - 1].getrow(int(x))
            probs = row.data * Z[t][row.indices]
            tot = probs.sum()
            for y, p in zip(row.indices, probs):
                if p > 0:
                    d = dict(idx)
                    d[t] = int(y)
                    new.append((d, lp + math.log(p / tot)))
        paths = new
    out = {}
    for idx, lp in paths:
        h = _assemble(c, dp, {t: np.array([k]) for t, k in idx.items()})[0]
        out[h.tobytes()] = math.exp(lp - lognorm)
    return out


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
