"""Exact correlation kernel of the tile point process for finite q.

With F_t(z) = Phi_-(z,t)/Phi_+(z,t) and G_t(w) = Phi_+(w,t)/Phi_-(w,t), write
f_k, g_k for their Laurent coefficients (f in 0<|z|<R(t), g in |w|>R*(t)).
Then, with j = h + B(t) + 1/2,

    K = [t1 >= t2] [z^{j1-j2}] F_{t1} G_{t2} - sum_{n>=1} f_{j1-n} g_{n-j2},

where F_{t1} G_{t2} is a Laurent polynomial when t1 >= t2 and the sum is finite
(f_k = 0 for k < -d_-(t1), g_k = 0 for k > d_+(t2)).  This is the double contour
integral with the |z|>|w| / |z|<|w| circles expanded in Laurent series.  The
coefficients come from the trapezoid rule on circles (an FFT), with radii placed
at the minimizers of the Cauchy bound max|F z^{-k}|, and node doubling until
successive values agree.

When the Cauchy bound exceeds the result by more than double precision can
absorb (large boxes near a cusp), the same finite sums are evaluated from exact
coefficient formulas in extended precision: f_k = sum_i E_i H_{k+i} with E_i the
signed elementary symmetric polynomials of the x^- factors and H_n the complete
homogeneous ones of the x^+ factors, and symmetrically for g_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NoAdmissibleRadii, QuadratureNotConverged
from .measure import Specialization
from .shapes import profile_B

MAX_POINTS = 16
SING_MARGIN = 0.05


@dataclass(frozen=True)
class KernelPoint:
    t: int
    h: float

    def j(self, c) -> int:
        j = self.h + profile_B(self.t, c) + 0.5
        if abs(j - round(j)) > 1e-9:
            raise ValueError(f"point (t={self.t}, h={self.h}) is off the lattice: h + t/2 + 1/2 must be an integer")
        return int(round(j))


@dataclass(frozen=True)
class QuadratureSpec:
    M: int = 64
    rtol: float = 1e-12
    atol: float = 1e-13
    max_doublings: int = 7
    exact_fallback: bool = True


def _pt(p) -> KernelPoint:
    return p if isinstance(p, KernelPoint) else KernelPoint(int(p[0]), float(p[1]))


class KernelEvaluator:
    """Caches per-diagonal factor lists and FFT coefficient arrays for one specialization."""

    def __init__(self, s: Specialization, quad: QuadratureSpec = QuadratureSpec()):
        self.s = s
        self.quad = quad
        self.c = s.corners
        pos = np.isfinite(s.xp) & (s.eps > 0)
        neg = np.isfinite(s.xm) & (s.eps < 0)
        self.mp, self.xp = s.m[pos], s.xp[pos]
        self.mm, self.xm = s.m[neg], s.xm[neg]
        allx = np.concatenate([self.xm, 1.0 / self.xp])
        self.lo = float(allx.min()) * math.exp(-6.0)
        self.hi = float(allx.max()) * math.exp(6.0)
        self._cache = {}

    # factor sets
    def _plus(self, t):
        return self.xp[self.mp > t]

    def _minus(self, t):
        return self.xm[self.mm < t]

    def R(self, t) -> float:
        x = self._plus(t)
        return float(1.0 / x.max()) if len(x) else math.inf

    def Rstar(self, t) -> float:
        x = self._minus(t)
        return float(x.max()) if len(x) else 0.0

    def d_minus(self, t) -> int:
        return int(np.sum(self.mm < t))

    def d_plus(self, t) -> int:
        return int(np.sum(self.mp > t))

    def _logF(self, kind, t, z, t2=None):
        """log of F_t (kind 'f'), G_t (kind 'g') or F_t G_t2 (kind 'p') at complex z."""
        if kind == "p":
            mm = self.xm[(self.mm < t) & (self.mm > t2)]
            mp = self.xp[(self.mp > t2) & (self.mp < t)]
            return (np.log1p(-mm[None, :] / z[:, None]).sum(axis=1)
                    + np.log1p(-z[:, None] * mp[None, :]).sum(axis=1))
        lm = np.log1p(-self._minus(t)[None, :] / z[:, None]).sum(axis=1)
        lp = np.log1p(-z[:, None] * self._plus(t)[None, :]).sum(axis=1)
        return lm - lp if kind == "f" else lp - lm

    def _cost(self, kind, t, k, logrho, t2=None):
        """log of the Cauchy bound max_{|z|=rho} |F z^{-k}| (coarse angular grid)."""
        phi = np.linspace(0, 2 * np.pi, 96, endpoint=False)
        z = np.exp(logrho + 1j * phi)
        return float(np.max(self._logF(kind, t, z, t2).real)) - k * logrho

    def _minimize(self, fun, lo, hi):
        if not lo < hi:
            raise NoAdmissibleRadii(f"empty radius interval ({lo}, {hi})")
        res = minimize_scalar(fun, bounds=(math.log(lo), math.log(hi)),
                              method="bounded", options={"xatol": 1e-4})
        return float(res.x)

    def radii(self, t1, j1, t2, j2):
        """(log rho_z, log rho_w, log rho_p) for the f sum, the g sum and the polynomial term.

        The n=1 term dominates the error of the finite sum when rho_z <= rho_w, so
        each circle minimises the bound of its n=1 coefficient; if that breaks the
        ordering, a common circle minimising the joint bound is used."""
        # keep a log-distance from the nearest singularity so the trapezoid
        # aliasing error (rho_inner / rho_outer)^M dies out at moderate M
        R, Rs = self.R(t1), self.Rstar(t2)
        eta = SING_MARGIN
        if math.isfinite(R) and Rs > 0:
            eta = min(SING_MARGIN, 0.25 * max(math.log(R / Rs), 1e-5))
        zlo, zhi = self.lo, min(R * math.exp(-eta), self.hi)
        wlo, whi = max(Rs * math.exp(eta), self.lo), self.hi
        if zhi <= zlo:
            zlo = zhi * math.exp(-12)
        if whi <= wlo:
            whi = wlo * math.exp(12)
        kf, kg = j1 - 1, 1 - j2
        lz = self._minimize(lambda x: self._cost("f", t1, kf, x), zlo, zhi)
        lw = self._minimize(lambda x: self._cost("g", t2, kg, x), wlo, whi)
        if lz > lw:
            a, b = max(zlo, wlo), min(zhi, whi)
            if a >= b:
                raise NoAdmissibleRadii(f"no admissible circles for t1={t1}, t2={t2}")
            lz = lw = self._minimize(lambda x: self._cost("f", t1, kf, x) + self._cost("g", t2, kg, x), a, b)
        lp = 0.0
        if t1 >= t2:
            lp = self._minimize(lambda x: self._cost("p", t1, j1 - j2, x, t2), self.lo, self.hi)
        return lz, lw, lp

    def _coeffs(self, kind, t, logrho, M, t2=None):
        key = (kind, t, t2, round(logrho, 12), M)
        if key not in self._cache:
            z = np.exp(logrho + 2j * np.pi * np.arange(M) / M)
            lf = self._logF(kind, t, z, t2)
            shift = float(lf.real.max())
            c = np.fft.fft(np.exp(lf - shift)) / M
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[key] = (c, shift)
        return self._cache[key]

    def _value(self, t1, j1, t2, j2, radii, M):
        lz, lw, lp = radii
        n_max = min(j1 + self.d_minus(t1), j2 + self.d_plus(t2))
        total = 0.0 + 0.0j
        if n_max >= 1:
            cf, sf = self._coeffs("f", t1, lz, M)
            cg, sg = self._coeffs("g", t2, lw, M)
            n = np.arange(1, n_max + 1)
            logs = sf + sg - j1 * lz + j2 * lw + n * (lz - lw)
            terms = cf[(j1 - n) % M] * cg[(n - j2) % M] * np.exp(logs)
            total -= terms.sum()
        if t1 >= t2:
            k = j1 - j2
            dm = int(np.sum((self.mm < t1) & (self.mm > t2)))
            dp = int(np.sum((self.mp > t2) & (self.mp < t1)))
            if -dm <= k <= dp:
                cp, sp_ = self._coeffs("p", t1, lp, M, t2)
                total += cp[k % M] * math.exp(sp_ - k * lp)
        return total

    def _span(self, t1, j1, t2, j2):
        return max(abs(j1) + self.d_minus(t1), abs(j2) + self.d_plus(t2),
                   self.d_minus(t1) + self.d_plus(t1), self.d_minus(t2) + self.d_plus(t2)) + 2

    def K(self, p1, p2) -> float:
        p1, p2 = _pt(p1), _pt(p2)
        c = self.c
        j1, j2 = p1.j(c), p2.j(c)
        t1, t2 = p1.t, p2.t
        return self._K(t1, j1, t2, j2)

    @lru_cache(maxsize=65536)
    def _K(self, t1, j1, t2, j2):
        try:
            return self._K_fft(t1, j1, t2, j2)
        except QuadratureNotConverged:
            if not self.quad.exact_fallback:
                raise
            return self._K_exact_arith(t1, j1, t2, j2)

    # extended-precision path
    def _esym(self, xs, dps):
        """Coefficients of prod (1 - x u) in u, highest index last."""
        key = ("e", tuple(xs), dps)
        if key not in self._cache:
            with mpmath.workdps(dps):
                c = [mpmath.mpf(1)]
                for x in xs:
                    x = mpmath.mpf(float(x))
                    c = [c[0]] + [c[i] - x * c[i - 1] for i in range(1, len(c))] + [-x * c[-1]]
            self._cache[key] = c
        return self._cache[key]

    def _hsym(self, xs, n, dps):
        """Coefficients H_0..H_n of prod 1/(1 - x u)."""
        key = ("h", tuple(xs), n, dps)
        if key not in self._cache:
            with mpmath.workdps(dps):
                h = [mpmath.mpf(1)] + [mpmath.mpf(0)] * n
                for x in xs:
                    x = mpmath.mpf(float(x))
                    for k in range(1, n + 1):
                        h[k] = h[k] + x * h[k - 1]
            self._cache[key] = h
        return self._cache[key]

    def _value_mp(self, t1, j1, t2, j2, dps):
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            n_max = min(j1 + self.d_minus(t1), j2 + self.d_plus(t2))
            if n_max >= 1:
                a, b = self._minus(t1), self._plus(t1)
                E = self._esym(a, dps)
                H = self._hsym(b, max(0, j1 - 1 + len(a)), dps)
                a2, b2 = self._minus(t2), self._plus(t2)
                P = self._esym(b2, dps)
                Hm = self._hsym(a2, max(0, len(b2) + j2 - 1), dps)

                def f(k):
                    return mpmath.fsum(E[i] * H[k + i] for i in range(max(0, -k), len(E)))

                def g(k):
                    return mpmath.fsum(P[i] * Hm[i - k] for i in range(max(0, k), len(P)))
                total -= mpmath.fsum(f(j1 - n) * g(n - j2) for n in range(1, n_max + 1))
            if t1 >= t2:
                k = j1 - j2
                mm = self.xm[(self.mm < t1) & (self.mm > t2)]
                mp_ = self.xp[(self.mp > t2) & (self.mp < t1)]
                if -len(mm) <= k <= len(mp_):
                    Em, Ep = self._esym(mm, dps), self._esym(mp_, dps)
                    # [z^k] prod(1 - x^-/z) prod(1 - z x^+)
                    total += mpmath.fsum(Ep[k + i] * Em[i] for i in range(max(0, -k), len(Em))
                                         if k + i < len(Ep))
            return total

    def _K_exact_arith(self, t1, j1, t2, j2):
        q = self.quad
        dps = 40
        prev = self._value_mp(t1, j1, t2, j2, dps)
        for _ in range(4):
            dps += 30
            cur = self._value_mp(t1, j1, t2, j2, dps)
            if abs(cur - prev) <= q.atol + q.rtol * abs(cur):
                return float(cur)
            prev = cur
        raise QuadratureNotConverged(f"extended precision did not settle for ({t1},{j1}),({t2},{j2})")

    def _K_fft(self, t1, j1, t2, j2):
        radii = self.radii(t1, j1, t2, j2)
        q = self.quad
        M = max(q.M, 1 << int(math.ceil(math.log2(4 * self._span(t1, j1, t2, j2)))))
        prev = self._value(t1, j1, t2, j2, radii, M)
        for _ in range(q.max_doublings):
            M *= 2
            cur = self._value(t1, j1, t2, j2, radii, M)
            if abs(cur - prev) <= q.atol + q.rtol * abs(cur):
                if abs(cur.imag) > max(1e3 * (q.atol + q.rtol * abs(cur)), 1e-9):
                    raise QuadratureNotConverged(f"imaginary part {cur.imag:.3e} too large")
                return float(cur.real)
            change = abs(cur - prev)
            prev = cur
        raise QuadratureNotConverged(f"no convergence at M={M} for ({t1},{j1}),({t2},{j2}): "
                                     f"last change {change:.3e}")

    def matrix(self, U) -> np.ndarray:
        U = [_pt(p) for p in U]
        n = len(U)
        return np.array([[self.K(U[a], U[b]) for b in range(n)] for a in range(n)])

    def det(self, U) -> float:
        U = [_pt(p) for p in U]
        if len(U) > MAX_POINTS:
            raise ValueError(f"at most {MAX_POINTS} points per determinant")
        if len(set(U)) != len(U):
            raise ValueError("points must be distinct")
        if not U:
            return 1.0
        return float(np.linalg.det(self.matrix(U)))


_evaluators = {}


def evaluator(s: Specialization, q: QuadratureSpec = QuadratureSpec()) -> KernelEvaluator:
    key = (id(s), q)
    ev = _evaluators.get(key)
    if ev is None or ev.s is not s:
        if len(_evaluators) > 64:
            _evaluators.clear()
        ev = _evaluators[key] = KernelEvaluator(s, q)
    return ev


def K_exact(p1, p2, s: Specialization, q: QuadratureSpec = QuadratureSpec()) -> float:
    return evaluator(s, q).K(p1, p2)


def corr_det(U, s: Specialization, q: QuadratureSpec = QuadratureSpec()) -> float:
    return evaluator(s, q).det(U)


def recurrence_residual(p1, p2, s: Specialization, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Residual of the first-order difference equation in (t1, h1).

    For t1 - 1/2 in D+:  K(t1,h1) - K(t1-1,h1+1/2) + x+_{t1-1/2} K(t1-1,h1-1/2) = delta.
    For t1 - 1/2 in D-:  K(t1,h1) - K(t1-1,h1-1/2) + x-_{t1-1/2} K(t1-1,h1+1/2) = delta.
    """
    p1, p2 = _pt(p1), _pt(p2)
    ev = evaluator(s, q)
    m = p1.t - 0.5
    t0 = p1.t - 1
    if s.corners.eps(m) > 0:
        lhs = (ev.K(p1, p2) - ev.K((t0, p1.h + 0.5), p2)
               + s.x_plus(m) * ev.K((t0, p1.h - 0.5), p2))
    else:
        lhs = (ev.K(p1, p2) - ev.K((t0, p1.h - 0.5), p2)
               + s.x_minus(m) * ev.K((t0, p1.h + 0.5), p2))
    delta = 1.0 if (p1.t == p2.t and p1.h == p2.h) else 0.0
    return abs(lhs - delta)


def symmetry_residual(p1, p2, s: Specialization, q: QuadratureSpec = QuadratureSpec()) -> float:
    """|K_s((j1,t1),(j2,t2)) - K_s~((j2,-t2),(j1,-t1))| in particle coordinates."""
    p1, p2 = _pt(p1), _pt(p2)
    c = s.corners
    j1, j2 = p1.j(c), p2.j(c)
    sr = s.reflected()
    ev, evr = evaluator(s, q), evaluator(sr, q)
    return abs(ev._K(p1.t, j1, p2.t, j2) - evr._K(-p2.t, j2, -p1.t, j1))
