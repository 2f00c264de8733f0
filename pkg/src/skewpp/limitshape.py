"""Macroscopic (r -> 0) description for homogeneous q = exp(-r).

Everything is expressed in scaled coordinates tau = r t, chi = r h and the
scaled corners U_0 < V_1 < U_1 < ... < V_N < U_N.  The central object is the
rational function

    f(z) = e^{U_0} prod_i (z e^{-U_i} - 1) / prod_i (z e^{-V_i} - 1),

whose intersections with the line e^{chi - tau/2} z - e^{chi + tau/2} are the
critical points of the action S(z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import (DegenerateGeometry, NotACriticalPoint, QuadratureNotConverged,
                     RootFindingFailed)
from .shapes import CornerData

IMAG_TOL = 1e-9
DOUBLE_ROOT_TOL = 1e-8


# ---------------------------------------------------------------------------
# dilogarithm

_BERN = [1.0, -0.5, 1 / 6, 0.0, -1 / 30, 0.0, 1 / 42, 0.0, -1 / 30, 0.0, 5 / 66, 0.0,
         -691 / 2730, 0.0, 7 / 6, 0.0, -3617 / 510, 0.0, 43867 / 798, 0.0, -174611 / 330,
         0.0, 854513 / 138, 0.0, -236364091 / 2730, 0.0, 8553103 / 6, 0.0,
         -23749461029 / 870, 0.0, 8615841276005 / 14322]


def _li2_series(z):
    # Li2(z) = sum_n B_n u^{n+1}/(n+1)!, u = -log(1-z); converges fast for |z| <= 1/2-ish
    u = -np.log(1 - z)
    out = np.zeros_like(u)
    p = u.copy()
    fact = 1.0
    for n, b in enumerate(_BERN):
        fact *= n + 1
        if b != 0.0:
            out = out + b * p / fact
        p = p * u
    return out


def dilog(z):
    """Principal branch of Li2, vectorised.  On the cut (1, inf) the value is the
    limit from the upper half-plane."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    # adding +0j turns a negative-zero imaginary part into +0, so the cut takes the upper limit
    z = np.atleast_1d(z) + 0j
    out = np.empty_like(z)
    big = np.abs(z) > 1
    # inversion: Li2(z) = -Li2(1/z) - pi^2/6 - log(-z)^2/2
    if np.any(big):
        zb = z[big]
        out[big] = -_dilog_unit(1 / zb) - np.pi ** 2 / 6 - 0.5 * np.log(-zb) ** 2
    if np.any(~big):
        out[~big] = _dilog_unit(z[~big])
    return out[0] if scalar else out


def _dilog_unit(z):
    out = np.empty_like(z)
    refl = z.real > 0.5
    # reflection: Li2(z) = -Li2(1-z) + pi^2/6 - log(z) log(1-z)
    if np.any(refl):
        zr = z[refl]
        w = 1 - zr
        one = w == 0
        val = np.empty_like(zr)
        val[one] = np.pi ** 2 / 6
        ww = w[~one]
        val[~one] = -_li2_series(ww) + np.pi ** 2 / 6 - np.log(zr[~one]) * np.log(ww)
        out[refl] = val
    if np.any(~refl):
        out[~refl] = _li2_series(z[~refl])
    return out


# ---------------------------------------------------------------------------
# f(z)

class RationalF:
    """f(z) with simple zeros at e^{U_i} and simple poles at e^{V_i}.

    Stored in partial fractions f = alpha z + beta + sum_i c_i / (z - p_i),
    which gives all derivatives in closed form."""

    def __init__(self, U, V):
        self.U = np.asarray(U, dtype=float)
        self.V = np.asarray(V, dtype=float)
        if len(self.U) != len(self.V) + 1:
            raise ValueError("need N+1 outer and N inner corners")
        self.N = len(self.V)
        self.zeros = np.exp(self.U)
        self.poles = np.exp(self.V)
        # polynomial coefficients, highest power first
        self.P = math.exp(self.U[0]) * np.poly1d([1.0])
        for u in self.U:
            self.P = self.P * np.poly1d([math.exp(-u), -1.0])
        self.Q = np.poly1d([1.0])
        for v in self.V:
            self.Q = self.Q * np.poly1d([math.exp(-v), -1.0])
        self.alpha = math.exp(self.U[0] - self.U.sum() + self.V.sum())
        dQ = self.Q.deriv()
        self.c = np.array([self.P(p) / dQ(p) for p in self.poles])
        # beta from the large-z expansion; evaluate at a point well away from the poles
        zt = 10.0 * self.zeros.max() + 1.0
        self.beta = float(self.P(zt) / self.Q(zt) - self.alpha * zt - np.sum(self.c / (zt - self.poles)))

    @classmethod
    def from_corners(cls, c: CornerData) -> "RationalF":
        if c.r is None:
            raise ValueError("corner data needs a scale r")
        return cls(c.U, c.V)

    def deriv(self, z, k: int = 0):
        """k-th derivative of f at z (k = 0..4)."""
        z = np.asarray(z)
        d = z[..., None] - self.poles
        if k == 0:
            return self.alpha * z + self.beta + np.sum(self.c / d, axis=-1)
        s = np.sum(self.c / d ** (k + 1), axis=-1) * (-1) ** k * math.factorial(k)
        return s + (self.alpha if k == 1 else 0.0)

    def __call__(self, z):
        return self.deriv(z, 0)

    def B(self, tau):
        """Scaled profile: B(tau) = (1/2) sum |tau - V_i| - (1/2) sum_{0<i<N} |tau - U_i|."""
        tau = np.asarray(tau, dtype=float)
        out = 0.5 * sum(np.abs(tau - v) for v in self.V)
        for u in self.U[1:-1]:
            out = out - 0.5 * np.abs(tau - u)
        return out if out.ndim else float(out)

    def eps(self, tau) -> int:
        """+1 for tau in (V_i, U_i), -1 for tau in (U_i, V_{i+1})."""
        for v, u in zip(self.V, self.U[1:]):
            if v < tau < u:
                return 1
        return -1

    def cleared(self, chi: float, tau: float) -> np.poly1d:
        """(e^{chi-tau/2} z - e^{chi+tau/2}) Q(z) - P(z); its roots solve the critical-point equation."""
        line = np.poly1d([math.exp(chi - tau / 2), -math.exp(chi + tau / 2)])
        return line * self.Q - self.P


# ---------------------------------------------------------------------------
# critical points

@dataclass(frozen=True)
class ScaledPoint:
    tau: float
    chi: float


@dataclass
class CriticalPoints:
    roots: np.ndarray
    kind: str                 # "all_real" or "conjugate_pair"
    zc: complex | None = None

    @property
    def theta(self) -> float | None:
        return None if self.zc is None else float(np.angle(self.zc))


def _roots(poly: np.poly1d) -> np.ndarray:
    coeffs = poly.coeffs
    lead = coeffs[0]
    if lead == 0 or abs(lead) < 1e-14 * np.max(np.abs(coeffs)):
        raise DegenerateGeometry("leading coefficient of the cleared critical-point equation vanishes")
    r = np.roots(coeffs)
    # one Newton polish step per root
    dp = poly.deriv()
    with np.errstate(all="ignore"):
        step = poly(r) / dp(r)
    ok = np.isfinite(step) & (np.abs(step) < 1e-3 * np.maximum(1.0, np.abs(r)))
    r = np.where(ok, r - step, r)
    return r


def classify(roots) -> CriticalPoints:
    roots = np.asarray(roots)
    scale = np.maximum(1.0, np.abs(roots))
    cplx = np.abs(roots.imag) > IMAG_TOL * scale
    if not np.any(cplx):
        return CriticalPoints(np.sort(roots.real).astype(complex), "all_real")
    zc = roots[cplx]
    zc = zc[np.argmax(zc.imag)]
    return CriticalPoints(roots, "conjugate_pair", complex(zc))


def critical_points(chi: float, tau: float, F: RationalF) -> CriticalPoints:
    poly = F.cleared(chi, tau)
    r = _roots(poly)
    # a root sitting on a pole of f is an artefact of clearing denominators
    keep = np.ones(len(r), dtype=bool)
    for p in F.poles:
        keep &= np.abs(r - p) > 1e-12 * p
    return classify(r[keep])


def _bulk_theta(chi: np.ndarray, tau: float, F: RationalF) -> np.ndarray:
    """arg of the upper root for each chi (0 where all roots are real); batched companion eigenvalues."""
    chi = np.atleast_1d(np.asarray(chi, dtype=float))
    Qc = F.Q.coeffs
    Pc = F.P.coeffs
    n = F.N + 1
    a = np.exp(chi - tau / 2)
    b = np.exp(chi + tau / 2)
    # coefficients of (a z - b) Q - P for each chi
    co = np.zeros((len(chi), n + 1))
    co[:, :-1] += a[:, None] * Qc[None, :]
    co[:, 1:] -= b[:, None] * Qc[None, :]
    co -= Pc[None, :]
    lead = co[:, 0]
    if np.any(np.abs(lead) < 1e-14 * np.abs(co).max(axis=1)):
        raise DegenerateGeometry("leading coefficient vanishes")
    comp = np.zeros((len(chi), n, n))
    comp[:, 0, :] = -co[:, 1:] / lead[:, None]
    if n > 1:
        comp[:, np.arange(1, n), np.arange(n - 1)] = 1.0
    ev = np.linalg.eigvals(comp)
    scale = np.maximum(1.0, np.abs(ev))
    im = np.where(np.abs(ev.imag) > IMAG_TOL * scale, ev, 0)
    th = np.angle(im)
    return np.max(np.where(im.imag > 0, th, 0.0), axis=1)


def boundary_roots(tau: float, F: RationalF) -> list:
    """(z, chi) for every real double critical point on the vertical line at tau, sorted by chi.

    These are the real z with (z - e^tau) f'(z) = f(z), f'(z) > 0 and z f' - f > 0."""
    P, Q = F.P, F.Q
    num = P.deriv() * Q - P * Q.deriv()          # f' = num / Q^2
    poly = np.poly1d([1.0, -math.exp(tau)]) * num - P * Q
    co = np.trim_zeros(poly.coeffs / np.max(np.abs(poly.coeffs)), "f")
    # the z^{2N+1} terms cancel analytically; drop round-off residue
    while len(co) > 1 and abs(co[0]) < 1e-12:
        co = co[1:]
    out = []
    for z in np.roots(co):
        if abs(z.imag) > 1e-7 * max(1.0, abs(z)):
            continue
        z = z.real
        if np.min(np.abs(z - F.poles)) < 1e-12:
            continue
        fp = float(F.deriv(z, 1))
        g = z * fp - float(F(z))
        if fp > 0 and g > 0:
            out.append((z, tau / 2 + math.log(fp)))
    return sorted(out, key=lambda p: p[1])


def boundary_crossings(tau: float, F: RationalF) -> np.ndarray:
    """Sorted chi values where the vertical line at tau meets the frozen boundary."""
    return np.array([chi for _, chi in boundary_roots(tau, F)])


def density(chi, tau: float, F: RationalF, crossings=None):
    """Limit density of horizontal tiles at (tau, chi); vectorised over chi."""
    chi_a = np.atleast_1d(np.asarray(chi, dtype=float))
    th = _bulk_theta(chi_a, tau, F)
    rho = th / np.pi
    frozen = th == 0
    if np.any(frozen):
        cr = boundary_crossings(tau, F) if crossings is None else crossings
        rho[frozen] = [_frozen_value(x, tau, F, cr) for x in chi_a[frozen]]
    return rho if np.ndim(chi) else float(rho[0])


def _frozen_value(chi, tau, F, cr) -> float:
    if len(cr) == 0 or chi <= cr[0]:
        return 1.0
    if chi >= cr[-1]:
        return 0.0
    k = np.searchsorted(cr, chi)
    lo, hi = cr[k - 1], cr[k]
    for x in (lo - 1e-7 * max(1.0, abs(lo)), hi + 1e-7 * max(1.0, abs(hi))):
        th = _bulk_theta(np.array([x]), tau, F)[0]
        if th > 0:
            return float(round(th / np.pi))
    return 1.0 if chi - lo < hi - chi else 0.0


# ---------------------------------------------------------------------------
# limit shape

@dataclass
class Surface:
    tau: np.ndarray
    chi: np.ndarray
    rho: np.ndarray      # (len(tau), len(chi))
    z: np.ndarray
    x: np.ndarray
    y: np.ndarray


def base_height(tau, F: RationalF):
    """Bottom of the box in chi at scaled time tau; everything below it is filled."""
    return np.maximum(-np.asarray(tau) / 2 + F.U[0], np.asarray(tau) / 2 - F.U[-1])


def _hole_integral(a, b, tau, F, cr, n=48):
    """int_a^b (1 - rho) ds, with ds split at boundary crossings."""
    pts = [a] + [c for c in cr if a < c < b] + [b]
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        if _bulk_theta(np.array([mid]), tau, F)[0] == 0:
            total += (hi - lo) * (1 - _frozen_value(mid, tau, F, cr))
            continue
        # s = lo + (hi-lo)(1-cos phi)/2 absorbs square-root endpoint behaviour
        vals = []
        for m in (n, 2 * n):
            x, w = np.polynomial.legendre.leggauss(m)
            phi = np.pi * (x + 1) / 2
            s = lo + (hi - lo) * (1 - np.cos(phi)) / 2
            jac = (hi - lo) * np.sin(phi) / 2 * np.pi / 2
            vals.append(float(np.sum(w * jac * (1 - density(s, tau, F, cr)))))
        if abs(vals[1] - vals[0]) > 1e-8 * max(1.0, hi - lo):
            raise QuadratureNotConverged(f"hole integral at tau={tau}: {vals}")
        total += vals[1]
    return total


def limit_shape_surface(F: RationalF, tau_grid, chi_grid) -> Surface:
    tau_grid = np.asarray(tau_grid, dtype=float)
    chi_grid = np.sort(np.asarray(chi_grid, dtype=float))
    nt, nc = len(tau_grid), len(chi_grid)
    rho = np.empty((nt, nc))
    zz = np.empty((nt, nc))
    for i, tau in enumerate(tau_grid):
        cr = boundary_crossings(tau, F)
        rho[i] = density(chi_grid, tau, F, cr)
        base = float(base_height(tau, F))
        acc, prev = 0.0, base
        for k, chi in enumerate(chi_grid):
            if chi > prev:
                acc += _hole_integral(prev, chi, tau, F, cr)
                prev = chi
            zz[i, k] = acc if chi >= base else 0.0
    T = tau_grid[:, None]
    C = chi_grid[None, :]
    return Surface(tau_grid, chi_grid, rho, zz, zz - C - T / 2, zz - C + T / 2)


# ---------------------------------------------------------------------------
# frozen boundary and cusps

@dataclass
class Cusp:
    z0: float
    chi0: float
    tau0: float
    A: float              # z0^3 f'''(z0) / f(z0)
    c_tau: float          # delta tau ~ c_tau sigma^2
    c_chi3: float         # delta chi - ratio delta tau ~ c_chi3 sigma^3
    ratio: float          # slope of the cusp axis, equal to B at the cusp


@dataclass
class BoundaryCurve:
    z: np.ndarray
    chi: np.ndarray
    tau: np.ndarray
    branch: np.ndarray
    cusps: list = field(default_factory=list)


def boundary_point(z, F: RationalF):
    """(chi, tau) of the double critical point z, or (nan, nan) if z is not admissible."""
    z = np.asarray(z, dtype=float)
    fp = F.deriv(z, 1)
    g = z * fp - F(z)
    ok = (fp > 0) & (g > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        chi = np.where(ok, 0.5 * (np.log(np.where(ok, fp, 1)) + np.log(np.where(ok, g, 1))), np.nan)
        tau = np.where(ok, np.log(np.where(ok, g, 1)) - np.log(np.where(ok, fp, 1)), np.nan)
    return chi, tau


def default_z_grid(F: RationalF, n: int = 400) -> np.ndarray:
    """Samples of the real line refined toward the zeros and poles of f and toward 0."""
    marks = np.sort(np.concatenate([[0.0], F.zeros, F.poles]))
    pieces = []
    s = np.linspace(0, 1, n + 2)[1:-1]
    g = 0.5 * (1 - np.cos(np.pi * s))
    for lo, hi in zip(marks[:-1], marks[1:]):
        pieces.append(lo + (hi - lo) * g)
    top = marks[-1]
    pieces.append(top * np.exp(np.geomspace(1e-6, 12, n)))
    pieces.append(-np.geomspace(1e-6, 1e6, n)[::-1])
    return np.concatenate(pieces)


def frozen_boundary(F: RationalF, z_grid=None) -> BoundaryCurve:
    z = np.sort(np.asarray(default_z_grid(F) if z_grid is None else z_grid, dtype=float))
    chi, tau = boundary_point(z, F)
    ok = np.isfinite(chi) & (tau >= F.U[0]) & (tau <= F.U[-1])
    # branches are maximal runs of admissible samples not separated by 0, zeros or poles
    marks = np.concatenate([[0.0], F.zeros, F.poles])
    cell = np.searchsorted(np.sort(marks), z)
    branch = np.full(len(z), -1)
    bid = -1
    prev_ok, prev_cell = False, None
    for k in range(len(z)):
        if ok[k]:
            if not prev_ok or cell[k] != prev_cell:
                bid += 1
            branch[k] = bid
        prev_ok, prev_cell = ok[k], cell[k]
    keep = branch >= 0
    return BoundaryCurve(z[keep], chi[keep], tau[keep], branch[keep], cusps(F))


def _f2_poly(F: RationalF) -> np.poly1d:
    """Numerator of f'' = 2 sum c_i/(z-p_i)^3 after multiplying by prod (z-p_k)^3."""
    out = np.poly1d([0.0])
    for i, ci in enumerate(F.c):
        term = np.poly1d([ci])
        for k, pk in enumerate(F.poles):
            if k != i:
                term = term * np.poly1d([1.0, -pk]) ** 3
        out = out + term
    return out


def cusps(F: RationalF) -> list:
    if F.N < 2:
        return []
    poly = _f2_poly(F)
    out = []
    for r in np.roots(poly.coeffs):
        if abs(r.imag) > 1e-6 * max(1.0, abs(r)):
            continue
        z0 = float(r.real)
        if z0 <= 0:
            continue
        # polish on f'' itself, bracketed away from poles
        h = 1e-6 * max(1.0, abs(z0))
        try:
            z0 = optimize.brentq(lambda x: float(F.deriv(x, 2)), z0 - h, z0 + h, xtol=1e-15, rtol=4e-16)
        except ValueError:
            try:
                z0 = optimize.newton(lambda x: float(F.deriv(x, 2)), z0,
                                     fprime=lambda x: float(F.deriv(x, 3)), tol=1e-15)
            except RuntimeError as e:
                raise RootFindingFailed(str(e)) from None
        chi0, tau0 = boundary_point(z0, F)
        if not np.isfinite(chi0) or not F.U[0] < tau0 < F.U[-1]:
            continue
        out.append(cusp_at(z0, F))
    out.sort(key=lambda c: c.tau0)
    return out


def cusp_at(z0: float, F: RationalF) -> Cusp:
    chi0, tau0 = (float(x) for x in boundary_point(z0, F))
    f0, f3 = float(F(z0)), float(F.deriv(z0, 3))
    E = math.exp(-chi0 - tau0 / 2)
    et = math.exp(tau0)
    return Cusp(z0, chi0, tau0, A=z0 ** 3 * f3 / f0,
                c_tau=0.5 * E * (z0 - et) * f3,
                c_chi3=-(E / 3) * et * f3 / (z0 - et),
                ratio=(z0 + et) / (2 * (z0 - et)))


def cusp_reparametrization(cusp: Cusp, F: RationalF) -> float:
    """c in eps = sigma - c sigma^2, chosen so that delta tau has no sigma^3 term."""
    z0, et = cusp.z0, math.exp(cusp.tau0)
    f3, f4 = float(F.deriv(z0, 3)), float(F.deriv(z0, 4))
    return ((z0 - et) * f4 + 2 * f3) / (6 * (z0 - et) * f3)


# ---------------------------------------------------------------------------
# N = 1 discriminant

def discriminant_N1(X, T, alpha, beta):
    return ((X - X * T - alpha + beta) ** 2 - (X + X * T) * 2 * (1 - alpha) * (1 - beta)
            + (1 - alpha ** 2) * (1 - beta ** 2))


def n1_variables(chi, tau, F: RationalF):
    """(X, T, alpha, beta) for an N = 1 geometry (V_1 = 0)."""
    if F.N != 1:
        raise ValueError("N = 1 geometry required")
    return math.exp(chi + tau / 2), math.exp(-tau), math.exp(F.U[0]), math.exp(-F.U[1])


# ---------------------------------------------------------------------------
# action and expansion coefficients

class ActionS:
    """S(z; chi, tau) as a sum of dilogarithms, and z dS/dz as a sum of logarithms."""

    def __init__(self, F: RationalF, chi: float, tau: float):
        self.F, self.chi, self.tau = F, chi, tau
        U, V = F.U, F.V
        self.minus = [(U[i], min(V[i], tau)) for i in range(F.N) if U[i] < tau]
        self.plus = [(max(V[i], tau), U[i + 1]) for i in range(F.N) if U[i + 1] > tau]
        self.shift = chi + F.B(tau)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = -self.shift * np.log(z)
        for a, b in self.minus:
            out = out + dilog(np.exp(a) / z) - dilog(np.exp(b) / z)
        for a, b in self.plus:
            out = out - (dilog(z * np.exp(-b)) - dilog(z * np.exp(-a)))
        return out

    def zdS(self, z):
        z = np.asarray(z, dtype=complex)
        out = -self.shift + 0 * z
        for a, b in self.minus:
            out = out + np.log(1 - np.exp(a) / z) - np.log(1 - np.exp(b) / z)
        for a, b in self.plus:
            out = out + np.log(1 - z * np.exp(-b)) - np.log(1 - z * np.exp(-a))
        return out


@dataclass
class ExpansionCoeffs:
    A: float
    B: float
    C: float
    D: float
    E: float
    H: complex
    G: float
    A_triple: float
    chi0: float


def expansion_coeffs(z0: float, tau0: float, F: RationalF, tol: float = 1e-8) -> ExpansionCoeffs:
    fp = float(F.deriv(z0, 1))
    f0 = float(F(z0))
    g = z0 * fp - f0
    if fp <= 0 or g <= 0:
        raise NotACriticalPoint(f"z0={z0} is not a double critical point (f'={fp}, z f'-f={g})")
    chi0 = tau0 / 2 + math.log(fp)
    if abs(math.log(g) - (chi0 + tau0 / 2)) > tol * max(1.0, abs(chi0)):
        raise NotACriticalPoint(f"z0={z0} is not a double critical point at tau={tau0}")
    em, ep = math.exp(-tau0 / 2), math.exp(tau0 / 2)
    den = z0 * em - ep
    A = z0 ** 2 * float(F.deriv(z0, 2)) / f0
    B = (z0 * em + ep) / (2 * den)
    C = -z0 / den ** 2
    D = z0 / den ** 2
    E = -z0 / den ** 2
    et = math.exp(tau0)
    lz = np.log(complex(z0))
    if F.eps(tau0) < 0:
        H = -0.5 * lz + np.log(complex(z0 - et))
        G = -et / (z0 - et)
    else:
        H = -0.5 * lz + np.log(complex(et - z0)) - tau0
        G = -z0 / (et - z0)
    A3 = z0 ** 3 * float(F.deriv(z0, 3)) / f0
    return ExpansionCoeffs(A, B, C, D, E, complex(H), G, A3, chi0)


def log_derivative_fd(S: ActionS, z0: float, order: int, h: float = 1e-2) -> float:
    """(z d/dz)^order S at z0 by a fourth-order central difference in xi = log z."""
    xi = h * np.arange(-4, 5)
    vals = S(z0 * np.exp(xi)).real
    stencils = {
        1: [1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280],
        2: [-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560],
        3: [-7 / 240, 3 / 10, -169 / 120, 61 / 30, 0, -61 / 30, 169 / 120, -3 / 10, 7 / 240],
        4: [7 / 240, -2 / 5, 169 / 60, -122 / 15, 91 / 8, -122 / 15, 169 / 60, -2 / 5, 7 / 240],
    }
    return float(np.dot(stencils[order], vals) / h ** order)


# ---------------------------------------------------------------------------
# free energy and volume

def _overlap(a1, b1, a2, b2):
    """Length of {(mu, nu) in (a1,b1)x(a2,b2) : nu - mu = d} as a function of d, with its kinks."""
    kinks = sorted({a2 - b1, a2 - a1, b2 - b1, b2 - a1})

    def w(d):
        return np.maximum(0.0, np.minimum(b1, b2 - d) - np.maximum(a1, a2 - d))
    return w, kinks


def free_energy_and_volume(F: RationalF) -> tuple:
    """(lim r^2 (-log Z), lim r^3 <|pi|>) as r -> 0.

    The first is sum int int log(1 - e^{mu-nu}) dmu dnu (negative), the second
    sum int int (nu-mu)/(e^{nu-mu}-1), both over mu in a (-) interval left of
    nu in a (+) interval."""
    U, V = F.U, F.V
    fe = vol = 0.0
    for i in range(F.N):
        for j in range(i, F.N):
            w, kinks = _overlap(U[i], V[i], V[j], U[j + 1])
            lo, hi = max(kinks[0], 0.0), kinks[-1]
            pts = [k for k in kinks if lo < k < hi]
            f1 = integrate.quad(lambda d: w(d) * math.log(-math.expm1(-d)) if d > 0 else 0.0,
                                lo, hi, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-12)
            f2 = integrate.quad(lambda d: w(d) * (d / math.expm1(d) if d > 0 else 1.0),
                                lo, hi, points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-12)
            for val, err in (f1, f2):
                if err > 1e-8 * max(1.0, abs(val)):
                    raise QuadratureNotConverged(f"pair ({i},{j}): error estimate {err}")
            fe += f1[0]
            vol += f2[0]
    return fe, vol


# ---------------------------------------------------------------------------
# boundary asymptotics near the box ends and near tau = V_j

def chi_left(F: RationalF) -> float:
    U, V = F.U, F.V
    return U[0] / 2 + float(np.sum(np.log(-np.expm1(U[0] - U[1:])) - np.log(-np.expm1(U[0] - V))))


def chi_right(F: RationalF) -> float:
    U, V = F.U, F.V
    return -U[-1] / 2 + float(np.sum(np.log(-np.expm1(U[:-1] - U[-1])) - np.log(-np.expm1(V - U[-1]))))


def left_C(F: RationalF) -> float:
    """d log R / d log z at e^{U_0}, R = f / (e^{U_0} (z e^{-U_0} - 1))."""
    x = np.exp(F.U[0] - F.V)
    y = np.exp(F.U[0] - F.U[1:])
    return float(np.sum(x / (1 - x) - y / (1 - y)))


def left_window_roots(dchi, dtau, F: RationalF):
    """Leading-order delta z in z = e^{U_0}(1 + delta z) near (chi_L, U_0): C dz^2 - dchi dz + dtau = 0."""
    C = left_C(F)
    disc = complex(dchi ** 2 - 4 * C * dtau)
    s = np.sqrt(disc)
    return (dchi + s) / (2 * C), (dchi - s) / (2 * C)


def singular_branch(F: RationalF, j: int, n: int = 40, span=(1e-7, 1e-3)):
    """Samples (tau, chi) of the boundary branch through the pole e^{V_j} (j is 1-based).

    Returns (tau - V_j, chi) on the side of the pole where f' > 0."""
    p = F.poles[j - 1]
    d = np.geomspace(*span, n)
    for side in (1, -1):
        z = p * (1 + side * d)
        chi, tau = boundary_point(z, F)
        if np.all(np.isfinite(chi)):
            return tau - F.V[j - 1], chi
    return np.array([]), np.array([])


def singular_slope(F: RationalF, j: int) -> float:
    """Fitted d chi / d log|tau - V_j| along the singular branch."""
    dt, chi = singular_branch(F, j)
    if len(dt) == 0:
        raise RootFindingFailed(f"no admissible branch near V_{j}")
    return float(np.polyfit(np.log(np.abs(dt)), chi, 1)[0])


def boundary_asymptotics(F: RationalF) -> dict:
    out = {"chi_L": chi_left(F), "chi_R": chi_right(F), "C_L": left_C(F), "branches": {}}
    for j in range(1, F.N + 1):
        dt, chi = singular_branch(F, j)
        slope = float(np.polyfit(np.log(np.abs(dt)), chi, 1)[0]) if len(dt) else float("nan")
        out["branches"][j] = {"dtau": dt, "chi": chi, "slope": slope}
    return out


def relative_discriminant(chi: float, tau: float, F: RationalF) -> float:
    """|disc| of the cleared critical-point polynomial scaled by lead^{2n-2} max|root|^{n(n-1)}."""
    r = np.roots(F.cleared(chi, tau).coeffs)
    n = len(r)
    M = max(1.0, float(np.max(np.abs(r))))
    prod = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            prod *= abs(r[i] - r[j]) ** 2 / M ** 2
    return prod
