"""The measure prod_t q_t^{|lam(t)|}: specializations, the product formula for Z
and brute-force oracles over capped slice sequences."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DivergentProduct, StateSpaceTooLarge, UnderdeterminedWeights
from .shapes import CornerData, PlanePartition, profile_B, slices_of

STATE_LIMIT = 2_000_000
PAIR_LIMIT = 60_000_000


@dataclass(frozen=True)
class Weights:
    """Either a single q (homogeneous) or a table q_t over integer t in (u_0, u_N)."""
    q: float | None = None
    q_t: dict = field(default_factory=dict)

    @property
    def homogeneous(self) -> bool:
        return self.q is not None

    def at(self, t: int) -> float:
        if self.q is not None:
            return self.q
        try:
            return self.q_t[int(t)]
        except KeyError:
            raise UnderdeterminedWeights(f"q_t missing at t={t}") from None

    def q_max(self, c: CornerData) -> float:
        return max(self.at(t) for t in c.t_range())

    @classmethod
    def from_dict(cls, d: dict) -> "Weights":
        if "q" in d:
            q = float(d["q"])
            if not 0 <= q < 1:
                raise ValueError("q must lie in [0, 1)")
            return cls(q=q)
        return cls(q_t={int(k): float(v) for k, v in d["q_t"].items()})


@dataclass(frozen=True, eq=False)
class Specialization:
    """x^+_m, x^-_m on m = u_0+1/2 .. u_N-1/2 (arrays aligned with `m`)."""
    corners: CornerData
    m: np.ndarray
    eps: np.ndarray
    xp: np.ndarray
    xm: np.ndarray
    gauge: float = 1.0

    @property
    def D_plus(self) -> np.ndarray:
        return self.m[self.eps > 0]

    @property
    def D_minus(self) -> np.ndarray:
        return self.m[self.eps < 0]

    def x_plus(self, m: float) -> float:
        return float(self.xp[self._idx(m)])

    def x_minus(self, m: float) -> float:
        return float(self.xm[self._idx(m)])

    def _idx(self, m):
        return int(round(m - self.m[0]))

    def reflected(self) -> "Specialization":
        """Geometry t -> -t with x~^{+-}_m = x^{-+}_{-m}."""
        c = self.corners
        rc = CornerData(tuple(-x for x in reversed(c.v)), tuple(-x for x in reversed(c.u)), c.r)
        return Specialization(rc, -self.m[::-1], -self.eps[::-1], self.xm[::-1].copy(),
                              self.xp[::-1].copy(), self.gauge)


def epsilon_map(c: CornerData) -> dict:
    return {float(m): ("+" if e > 0 else "-") for m, e in zip(c.m_values(), c.eps(c.m_values()))}


def x_from_q(w: Weights, c: CornerData, a: float = 1.0) -> Specialization:
    m = c.m_values()
    eps = c.eps(m)
    n = len(m)
    xp = np.full(n, np.nan)
    xm = np.full(n, np.nan)
    if w.homogeneous:
        q = w.q
        with np.errstate(divide="ignore", over="ignore"):
            xp[eps > 0] = a * q ** m[eps > 0]
            xm[eps < 0] = q ** (-m[eps < 0]) / a
        return Specialization(c, m, eps, xp, xm, a)
    # walk the chain of relations left to right, starting from x^-_{u_0+1/2} = 1/a
    xm[0] = 1.0 / a
    for k in range(n - 1):
        qt = w.at(int(m[k] + 0.5))
        if eps[k] < 0 and eps[k + 1] < 0:
            xm[k + 1] = xm[k] / qt
        elif eps[k] < 0 < eps[k + 1]:
            xp[k + 1] = qt / xm[k]
        elif eps[k] > 0 and eps[k + 1] > 0:
            xp[k + 1] = xp[k] * qt
        else:
            xm[k + 1] = 1.0 / (qt * xp[k])
    return Specialization(c, m, eps, xp, xm, a)


def log_partition_function(s: Specialization) -> float:
    mm, mp = s.m[s.eps < 0], s.m[s.eps > 0]
    xm, xp = s.xm[s.eps < 0], s.xp[s.eps > 0]
    prod = xm[:, None] * xp[None, :]
    ok = mm[:, None] < mp[None, :]
    fac = 1.0 - prod[ok]
    if np.any(fac <= 0) or not np.all(np.isfinite(fac)):
        raise DivergentProduct("a factor 1 - x^- x^+ is not positive")
    return float(-np.sum(np.log1p(-prod[ok])))


def partition_function(s: Specialization) -> float:
    return math.exp(log_partition_function(s))


def mean_volume(c: CornerData, q: float) -> float:
    """q d/dq log Z for homogeneous weights: sum over pairs of d q^d / (1 - q^d)."""
    m = c.m_values()
    e = c.eps(m)
    d = m[e > 0][None, :] - m[e < 0][:, None]
    d = d[d > 0]
    qd = q ** d
    return float(np.sum(d * qd / (1 - qd)))


def weight(p: PlanePartition, w: Weights) -> float:
    if w.homogeneous:
        h = p.heights
        return w.q ** int(h[h > 0].sum())
    lam = slices_of(p).lam
    return math.prod(w.at(t) ** sum(x) for t, x in lam.items())


class SliceDP:
    """Capped slice states per diagonal and the sparse interlacing transfer matrices.

    states[t] is an (S_t, n_t) int array of weakly decreasing tuples with parts <= cap.
    trans[t] is a 0/1 CSR matrix from states[t] to states[t+1].
    """

    def __init__(self, c: CornerData, w: Weights, cap: int,
                 state_limit: int = STATE_LIMIT, pair_limit: int = PAIR_LIMIT):
        self.c, self.w, self.cap = c, w, cap
        ts = list(c.t_range())
        sizes = {t: math.comb(cap + len(c.diagonals[t]), len(c.diagonals[t])) for t in ts}
        if sum(sizes.values()) > state_limit:
            raise StateSpaceTooLarge(f"{sum(sizes.values())} capped states exceed limit {state_limit}")
        pairs = sum(sizes[t] * sizes[t + 1] for t in ts[:-1])
        if pairs > pair_limit:
            raise StateSpaceTooLarge(f"{pairs} state pairs exceed limit {pair_limit}")
        self.ts = ts
        self.states = {t: _decreasing_tuples(len(c.diagonals[t]), cap) for t in ts}
        self.logw = {t: self.states[t].sum(axis=1) * _safe_log(w.at(t)) for t in ts}
        self.trans = {t: self._transfer(t) for t in ts[:-1]}

    def _transfer(self, t):
        c = self.c
        sq_x = c.diagonals[t]
        sq_y = c.diagonals[t + 1]
        pos_x = {s: k for k, s in enumerate(sq_x)}
        cons = []
        for ky, (i, j) in enumerate(sq_y):
            if (i, j - 1) in pos_x:
                cons.append((ky, pos_x[(i, j - 1)], "le"))
            if (i + 1, j) in pos_x:
                cons.append((ky, pos_x[(i + 1, j)], "ge"))
        X, Y = self.states[t], self.states[t + 1]
        blocks = []
        step = max(1, 4_000_000 // max(1, len(Y)))
        for s in range(0, len(X), step):
            xb = X[s:s + step]
            ok = np.ones((len(xb), len(Y)), dtype=bool)
            for ky, kx, kind in cons:
                if kind == "le":
                    ok &= Y[None, :, ky] <= xb[:, None, kx]
                else:
                    ok &= Y[None, :, ky] >= xb[:, None, kx]
            blocks.append(sp.csr_matrix(ok, dtype=float))
        return sp.vstack(blocks).tocsr()

    def mask_for(self, t, points) -> np.ndarray:
        """States on diagonal t containing every tile (t, h) in `points`.

        Positions lam_k - k with k beyond the diagonal length (j <= -n) belong to
        zero parts outside the box and are present in every state."""
        S = self.states[t]
        ok = np.ones(len(S), dtype=bool)
        n = S.shape[1]
        k = np.arange(n)
        B = profile_B(t, self.c)
        for h in points:
            j = h + B + 0.5
            if j <= -n:
                continue
            ok &= np.any(S - k[None, :] == j, axis=1)
        return ok

    def total(self, restrict: dict | None = None) -> float:
        """Weighted sum over capped configurations; restrict maps t -> boolean state mask."""
        restrict = restrict or {}
        shift = 0.0
        v = None
        for t in self.ts:
            lw = self.logw[t]
            if v is None:
                v = np.exp(lw)
            else:
                v = (self.trans[t - 1].T @ v) * np.exp(lw)
            if t in restrict:
                v = v * restrict[t]
            s = v.sum()
            if s == 0:
                return 0.0
            v /= s
            shift += math.log(s)
        return math.exp(shift)

    def backward(self) -> dict:
        """Z_t(x) = w_t(x) * sum_{y ~ x} Z_{t+1}(y), normalized per diagonal (log offsets kept)."""
        Z = {}
        logs = {}
        nxt = None
        for t in reversed(self.ts):
            z = np.exp(self.logw[t])
            if nxt is not None:
                z = z * (self.trans[t] @ nxt)
            s = z.sum()
            Z[t] = z / s
            logs[t] = math.log(s)
            nxt = Z[t]
        return Z


def _safe_log(q):
    return -np.inf if q == 0 else math.log(q)


def _decreasing_tuples(n: int, cap: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    rows = [tuple(reversed(c)) for c in itertools.combinations_with_replacement(range(cap + 1), n)]
    return np.array(rows, dtype=np.int64)


def truncation_bound(c: CornerData, w: Weights, cap: int, Z: float) -> float:
    q = w.q_max(c)
    if q == 0:
        return 0.0
    return Z * c.n_squares * q ** (cap + 1) / (1 - q)


def brute_force_Z(c: CornerData, w: Weights, cap: int) -> tuple:
    """(Z_cap, truncation bound, number of states enumerated)."""
    dp = SliceDP(c, w, cap)
    Z = dp.total()
    n = sum(len(s) for s in dp.states.values())
    return Z, truncation_bound(c, w, cap, Z), n


def brute_force_corr(U, c: CornerData, w: Weights, cap: int, dp: SliceDP | None = None) -> float:
    """Probability that every tile in U is present, under the capped measure."""
    dp = dp or SliceDP(c, w, cap)
    U = list(U)
    if not U:
        return 1.0
    byt = {}
    for t, h in U:
        if t not in dp.states:
            return 0.0
        byt.setdefault(int(t), []).append(h)
    restrict = {t: dp.mask_for(t, hs).astype(float) for t, hs in byt.items()}
    return dp.total(restrict) / dp.total()
