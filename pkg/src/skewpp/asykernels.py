"""Universal local kernels: discrete sine / incomplete beta (bulk), extended
Airy (edge) and extended Pearcey (cusp), with the special functions Ai and P+-."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import OutOfSupportedRange, QuadratureNotConverged, SeriesNotConverged

AIRY_RANGE = 15.0
SERIES_RANGE = 6.0
SERIES_AUTO = 2.0   # beyond this the alternating series loses digits to cancellation
SERIES_CAP = 400


# ---------------------------------------------------------------------------
# bulk

@dataclass(frozen=True)
class BulkParams:
    zc: complex
    eps: int
    tau: float

    @property
    def theta(self) -> float:
        return float(np.angle(self.zc))


def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _bulk_integrand(w, k, l, p: BulkParams):
    if p.eps > 0:
        base = 1 - math.exp(-p.tau) * w
    else:
        base = 1 - math.exp(p.tau) / w
    return base ** k * w ** (-l - 1)


def incomplete_beta(k: int, l: int, p: BulkParams, side: int = 1, method: str = "auto") -> float:
    """(1/2 pi i) int_gamma (1 - e^{-+tau} w^{+-1})^k w^{-l-1} dw, from conj(zc) to zc.

    side=+1 takes the arc through the positive real axis beyond every
    singularity, side=-1 the arc through the negative real axis.  For k >= 0
    the integrand is a Laurent polynomial and the primitive is used."""
    z, zb = complex(p.zc), complex(np.conj(p.zc))
    if method == "auto":
        method = "exact" if k >= 0 else "quad"
    if method == "exact":
        if k < 0:
            raise ValueError("closed form needs k >= 0")
        c = math.exp(-p.tau) if p.eps > 0 else math.exp(p.tau)
        total = 0j
        for n in range(k + 1):
            coef = math.comb(k, n) * (-c) ** n
            m = (n if p.eps > 0 else -n) - l - 1       # exponent of w
            if m == -1:
                dlog = 2j * np.angle(z)
                if side < 0:
                    dlog -= 2j * math.pi
                total += coef * dlog
            else:
                total += coef * (z ** (m + 1) - zb ** (m + 1)) / (m + 1)
        return float((total / (2j * math.pi)).real)
    # two straight segments through a real crossing point beyond the singularities
    R = 2.0 * max(abs(z), math.exp(p.tau), 1.0) + 1.0
    xr = R if side > 0 else -R
    x, wq = _gl(200)
    total = 0j
    for a, b in ((zb, xr), (xr, z)):
        s = 0.5 * (b - a) * x + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.sum(wq * _bulk_integrand(s, k, l, p))
    return float((total / (2j * math.pi)).real)


def bulk_kernel(dh: float, dt: int, p: BulkParams) -> float:
    """Limit of K((t1,h1),(t2,h2)) for fixed dt = t1 - t2, dh = h1 - h2."""
    l = dh + p.eps * dt / 2
    if abs(l - round(l)) > 1e-9:
        raise ValueError(f"dh + eps dt/2 = {l} is not an integer")
    return incomplete_beta(int(dt), int(round(l)), p, 1 if dt >= 0 else -1)


def sine_equal_time(dh: int, p: BulkParams) -> float:
    th = p.theta
    if dh == 0:
        return th / math.pi
    return abs(p.zc) ** (-dh) * math.sin(th * dh) / (math.pi * dh)


def sine_kernel_det(hs, theta: float) -> float:
    """det[sin(theta(h_a-h_b)) / (pi(h_a-h_b))]."""
    hs = np.asarray(hs, dtype=float)
    d = hs[:, None] - hs[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        M = np.where(d == 0, theta / math.pi, np.sin(theta * d) / (math.pi * d))
    return float(np.linalg.det(M))


# ---------------------------------------------------------------------------
# Airy

def airy_Ai(x, deriv: int = 0):
    """Ai(x) (deriv=0) or Ai'(x) (deriv=1) on |x| <= 15."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > AIRY_RANGE):
        raise OutOfSupportedRange(f"Airy argument outside [-{AIRY_RANGE}, {AIRY_RANGE}]")
    ai, aip, _, _ = special.airy(xa)
    out = ai if deriv == 0 else aip
    return out if out.ndim else float(out)


def airy_sq_tail(u):
    """int_u^inf Ai(v)^2 dv = Ai'(u)^2 - u Ai(u)^2."""
    ai, aip, _, _ = special.airy(np.asarray(u, dtype=float))
    return aip ** 2 - u * ai ** 2


@dataclass(frozen=True)
class AiryParams:
    A: float
    D: float
    C: float | None = None
    B: float = 0.0
    E: float = 0.0
    H: complex = 0.0
    G: float = 0.0
    gaussian_side: int = -1      # -1: heat-kernel term where A D (b1 - b2) < 0; +1: where it is > 0
    gaussian_sign: int = -1

    @property
    def lam(self) -> float:
        return float(np.cbrt(2.0 / self.A))

    @property
    def Cc(self) -> float:
        return -self.D if self.C is None else self.C


def heat_kernel(da: float, db: float, D: float) -> float:
    s = D * abs(db)
    return math.exp(-da * da / (2 * s)) / math.sqrt(2 * math.pi * s)


def _airy_rays(A: float, n_panel: int = 8, m: int = 24):
    """Nodes and weights (including dsigma) for the sigma and kappa ray contours, A > 0."""
    # the decay exp(-A rho^3/6) is below 1e-18 at R
    R = (6 * 42 / A) ** (1 / 3) + 2.0
    x, w = _gl(m)
    edges = np.linspace(0, 1, n_panel + 1) ** 1.5 * R
    rho, wr = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        rho.append(0.5 * (b - a) * x + 0.5 * (a + b))
        wr.append(0.5 * (b - a) * w)
    return np.concatenate(rho), np.concatenate(wr)


def _airy_double(a1, b1, a2, b2, A, D, delta=0.4):
    """(1/(2 pi i)^2) int_{C+} int_{C-} exp(A/6 (s^3-k^3) - D/2 (b1 s^2 - b2 k^2) - a1 s + a2 k) / (s - k), A > 0.

    C+: from inf e^{-i pi/3} through +delta to inf e^{i pi/3}; C-: from inf e^{-2i pi/3}
    through -delta to inf e^{2i pi/3}."""
    rho, wr = _airy_rays(A)
    e1, e2 = np.exp(1j * np.pi / 3), np.exp(2j * np.pi / 3)
    s = np.concatenate([delta + rho * e1, delta + rho * np.conj(e1)])
    ws = np.concatenate([wr * e1, -wr * np.conj(e1)])
    k = np.concatenate([-delta + rho * e2, -delta + rho * np.conj(e2)])
    wk = np.concatenate([wr * e2, -wr * np.conj(e2)])
    fs = ws * np.exp(A / 6 * s ** 3 - D / 2 * b1 * s ** 2 - a1 * s)
    fk = wk * np.exp(-A / 6 * k ** 3 + D / 2 * b2 * k ** 2 + a2 * k)
    val = fs @ (1.0 / (s[:, None] - k[None, :])) @ fk
    return -val / (4 * math.pi ** 2)


def K_airy(pt1, pt2, p: AiryParams, method: str = "rays") -> float:
    """Extended Airy kernel at (a1, b1), (a2, b2).

    method="rays": double ray quadrature; method="s": the single s-integral of
    products of shifted Airy functions (independent evaluation)."""
    (a1, b1), (a2, b2) = pt1, pt2
    A, D = p.A, p.D
    sgn = 1.0
    if A < 0:
        # sigma -> -sigma, kappa -> -kappa maps the kernel to that of |A| at -a
        A, a1, a2, sgn = -A, -a1, -a2, -1.0
    if method == "rays":
        val = _airy_double(a1, b1, a2, b2, A, D).real
    else:
        val = _airy_s_integral(a1, b1, a2, b2, A, D)
    val *= sgn
    # the residue at sigma = kappa is a Gaussian integral on one side of b1 = b2; which
    # side, and its sign, follow the orientation of the contours (signs of A and D)
    db = b1 - b2
    if db != 0 and np.sign(db * D * p.A) == p.gaussian_side:
        val += sgn * p.gaussian_sign * heat_kernel(a1 - a2, db, abs(D))
    return float(val)


def _airy_log_prefactor(a, b, A, D):
    return -D ** 3 * b ** 3 / (3 * A ** 2) - a * D * b / A


def _airy_phi(a, b, A, D, lam):
    """(1/2 pi i) int_{C+} exp(A s^3/6 - D b s^2/2 - a s) ds."""
    return lam * np.exp(_airy_log_prefactor(a, b, A, D)) * special.airy(lam * (a + D * D * b * b / (2 * A)))[0]


def _airy_psi(a, b, A, D, lam):
    """(1/2 pi i) int_{C-} exp(-A k^3/6 + D b k^2/2 + a k) dk."""
    return _airy_phi(a, -b, A, D, lam)


def _airy_product(u, a1, b1, a2, b2, A, D, lam):
    """Phi(a1+u, b1) Psi(a2+u, b2) with the exponential prefactors combined."""
    e = _airy_log_prefactor(a1 + u, b1, A, D) + _airy_log_prefactor(a2 + u, -b2, A, D)
    ai1 = special.airy(lam * (a1 + u + D * D * b1 * b1 / (2 * A)))[0]
    ai2 = special.airy(lam * (a2 + u + D * D * b2 * b2 / (2 * A)))[0]
    if ai1 == 0 or ai2 == 0:
        return 0.0
    return lam * lam * math.copysign(1.0, ai1 * ai2) * math.exp(e + math.log(abs(ai1)) + math.log(abs(ai2)))


def _airy_s_integral(a1, b1, a2, b2, A, D, lo=0.0, hi=np.inf):
    """int_lo^hi Phi(a1+u, b1) Psi(a2+u, b2) du."""
    lam = float(np.cbrt(2.0 / A))
    args = (a1, b1, a2, b2, A, D, lam)
    val = err = 0.0
    if lo == -np.inf:
        # the left tail oscillates and decays like exp(-D |b1 - b2| |u| / A); truncate
        # once the decay passes e^-40 and integrate in short chunks
        if b1 == b2:
            raise QuadratureNotConverged("full-line Airy s-integral needs b1 != b2")
        cut = min(0.0, hi)
        left = cut - 40.0 * A / (D * abs(b1 - b2)) - abs(a1) - abs(a2)
        edges = np.linspace(left, cut, int(np.ceil((cut - left) / 8.0)) + 1)
        for u0, u1 in zip(edges[:-1], edges[1:]):
            v, e = integrate.quad(_airy_product, u0, u1, args=args, epsabs=1e-14, epsrel=1e-11, limit=200)
            val, err = val + v, err + e
        lo = cut
    if hi > lo:
        v, e = integrate.quad(_airy_product, lo, hi, args=args, epsabs=1e-13, epsrel=1e-11, limit=400)
        val, err = val + v, err + e
    if err > 1e-8:
        raise QuadratureNotConverged(f"Airy s-integral error estimate {err}")
    return val


def airy_equal_time(a1, a2, A: float) -> float:
    """lam K_Ai(lam a1, lam a2), the equal-time (b1 = b2 = 0) kernel in closed form."""
    lam = float(np.cbrt(2.0 / A))
    X, Y = lam * a1, lam * a2
    if X == Y:
        return lam * float(airy_sq_tail(X))
    ai1, aip1, _, _ = special.airy(X)
    ai2, aip2, _, _ = special.airy(Y)
    return float((ai1 * aip2 - aip1 * ai2) / (a1 - a2))


def rho_airy(x, y, p: AiryParams):
    """Diagonal of the extended Airy kernel at (x - D y^2/2, y) for A > 0."""
    A = p.A
    if A <= 0:
        raise ValueError("rho_airy expects A > 0; use the complement for A < 0")
    lam = p.lam
    X = np.asarray(x) - p.D * np.asarray(y) ** 2 / 2 + p.Cc ** 2 * np.asarray(y) ** 2 / (2 * A)
    return lam * airy_sq_tail(lam * X)


# ---------------------------------------------------------------------------
# Pearcey

OMEGA = np.exp(1j * np.pi / 4)


def _pplus_series(x, y):
    """(2/pi) sum_{n+m even} (-1)^{(n+m)/2} 2^{n-1} Gamma((n+m+1)/2) x^{2n+1} y^m / ((2n+1)! m!)."""
    if x == 0:
        return 0.0
    terms = []
    lx, ly = math.log(abs(x)), (math.log(abs(y)) if y != 0 else None)
    for n in range(SERIES_CAP):
        row_max = -np.inf
        for m in range(n % 2, SERIES_CAP, 2):
            if m > 0 and ly is None:
                break
            lg = ((n - 1) * math.log(2) + math.lgamma((n + m + 1) / 2) - math.lgamma(2 * n + 2)
                  - math.lgamma(m + 1) + (2 * n + 1) * lx + (m * ly if m else 0.0))
            sign = (-1) ** ((n + m) // 2) * (1 if x > 0 else -1) * ((-1 if y < 0 else 1) ** m)
            terms.append(sign * math.exp(lg))
            row_max = max(row_max, lg)
            if m > 4 and lg < -40:
                break
        if n > 4 and -np.inf < row_max < -40:
            return 2 / math.pi * math.fsum(terms)
    raise SeriesNotConverged(f"P+ series at ({x}, {y})")


def _pminus_series(x, y):
    """(1/pi) sum (-1)^n 2^{n-3/2} Gamma((n+m)/2 + 1/4) x^{2n} y^m / ((2n)! m!)."""
    terms = []
    lx = math.log(abs(x)) if x != 0 else None
    ly = math.log(abs(y)) if y != 0 else None
    for n in range(SERIES_CAP):
        if n > 0 and lx is None:
            break
        row_max = -np.inf
        for m in range(SERIES_CAP):
            if m > 0 and ly is None:
                break
            lg = ((n - 1.5) * math.log(2) + math.lgamma((n + m) / 2 + 0.25) - math.lgamma(2 * n + 1)
                  - math.lgamma(m + 1) + (2 * n * lx if n else 0.0) + (m * ly if m else 0.0))
            sign = (-1) ** n * ((-1 if y < 0 else 1) ** m)
            terms.append(sign * math.exp(lg))
            row_max = max(row_max, lg)
            if m > 4 and lg < -40:
                break
        if n > 4 and row_max < -40:
            return math.fsum(terms) / math.pi
    if lx is None:
        return math.fsum(terms) / math.pi
    raise SeriesNotConverged(f"P- series at ({x}, {y})")


def _ray_nodes(R, n_panel=10, m=24):
    x, w = _gl(m)
    edges = np.linspace(0, R, n_panel + 1)
    rho = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    wr = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    return rho, wr


def _quartic_radius(x, y, extra=0.0):
    # smallest R with R^4/4 - |x| R - |y| R^2/2 > 45
    R = 1.0
    while R ** 4 / 4 - (abs(x) + extra) * R - abs(y) * R ** 2 / 2 < 45:
        R *= 1.1
    return R


def _pplus_contour(R, delta=0.0, n_panel=10):
    """Nodes and signed weights of the four-ray contour for P+:
    -int_{omega R+} + int_{omega^-1 R+} - int_{omega^-3 R+} + int_{omega^3 R+},
    with the right pair of rays based at +delta and the left pair at -delta."""
    rho, wr = _ray_nodes(R, n_panel)
    nodes, weights, part = [], [], []
    for d, base, sgn, side in ((OMEGA, delta, -1, 1), (np.conj(OMEGA), delta, 1, 1),
                               (OMEGA ** -3, -delta, -1, -1), (OMEGA ** 3, -delta, 1, -1)):
        nodes.append(base + rho * d)
        weights.append(sgn * wr * d)
        part.append(np.full(len(rho), side))
    return np.concatenate(nodes), np.concatenate(weights), np.concatenate(part)


def pearcey_P(side: int, x: float, y: float, mode: str = "auto", deriv: int = 0) -> float:
    """P+ (side=+1) or P- (side=-1) and their x-derivatives (quadrature mode for deriv > 0)."""
    if mode == "auto":
        mode = "series" if (deriv == 0 and abs(x) <= SERIES_AUTO and abs(y) <= SERIES_AUTO) else "quad"
    if mode == "series":
        if deriv:
            raise ValueError("series mode evaluates the function only")
        if abs(x) > SERIES_RANGE or abs(y) > SERIES_RANGE:
            raise OutOfSupportedRange("series mode needs |x|, |y| <= 6")
        return _pplus_series(x, y) if side > 0 else _pminus_series(x, y)
    R = _quartic_radius(x, y)
    if side > 0:
        s, w, _ = _pplus_contour(R)
        f = w * (-s) ** deriv * np.exp(s ** 4 / 4 + y * s ** 2 / 2 - x * s)
        return float((np.sum(f) / (2j * math.pi)).real)
    rho, wr = _ray_nodes(R)
    t = np.concatenate([-rho[::-1], rho])
    wt = np.concatenate([wr[::-1], wr])
    f = wt * (1j * t) ** deriv * np.exp(-t ** 4 / 4 + y * t ** 2 / 2 + 1j * x * t)
    return float((np.sum(f) / (2 * math.pi)).real)


def pearcey_derivs(x, y):
    """(P+, P+', P+'', P-, P-', P-'') at (x, y) by quadrature."""
    return tuple(pearcey_P(s, x, y, mode="quad", deriv=d) for s in (1, -1) for d in (0, 1, 2))


_FD = {
    1: ([1, -8, 0, 8, -1], 12.0),
    2: ([-1, 16, -30, 16, -1], 12.0),
    3: ([1, -8, 13, 0, -13, 8, -1], 8.0),
}


def _fd(fun, x0, h, order):
    c, den = _FD[order]
    k = (len(c) - 1) // 2
    return sum(ci * fun(x0 + (i - k) * h) for i, ci in enumerate(c) if ci) / (den * h ** order)


def pearcey_pde_residual(side: int, x: float, y: float, h: float = 1e-2, mode: str = "series") -> tuple:
    """Fourth-order finite-difference residuals of
    (d_x^3 +- x + y d_x) P+- = 0 and (+-d_y - d_x^2/2) P+- = 0."""
    def Px(u):
        return pearcey_P(side, u, y, mode=mode)

    def Py(v):
        return pearcey_P(side, x, v, mode=mode)
    p0 = Px(x)
    r1 = _fd(Px, x, h, 3) + side * x * p0 + y * _fd(Px, x, h, 1)
    r2 = side * _fd(Py, y, h, 1) - 0.5 * _fd(Px, x, h, 2)
    return float(r1), float(r2)


@dataclass(frozen=True)
class PearceyParams:
    A: float = 6.0
    C: float = 1.0
    D: float | None = None
    gaussian_side: int = -1      # -1: heat-kernel term where C (y1 - y2) < 0; +1: where it is > 0
    gaussian_sign: int = -1


def _pearcey_double(x1, y1, x2, y2, delta=0.5):
    """Normalised (A=6, C=1) double integral with C2 = i R and C1 the shifted four-ray star,
    traversed against the orientation that defines P+ so that the diagonal is nonnegative."""
    R = _quartic_radius(max(abs(x1), abs(x2)), max(abs(y1), abs(y2)), extra=delta)
    s, ws, _ = _pplus_contour(R, delta)
    rho, wr = _ray_nodes(R)
    t = np.concatenate([-rho[::-1], rho])
    wt = np.concatenate([wr[::-1], wr])
    k = 1j * t
    wk = 1j * wt
    fs = ws * np.exp(s ** 4 / 4 + y1 * s ** 2 / 2 - x1 * s)
    fk = wk * np.exp(-k ** 4 / 4 - y2 * k ** 2 / 2 + x2 * k)
    val = fs @ (1.0 / (s[:, None] - k[None, :])) @ fk
    return float((val / (4 * math.pi ** 2)).real)


def _pearcey_s_integral(x1, y1, x2, y2):
    """Same kernel via 1/(s-k) = +-int_0^inf e^{-+u(s-k)} du on the right / left halves of C1.

    Both integrands decay like exp(-c u^{4/3}); composite Gauss-Legendre on [0, U]."""
    U = 14.0 + max(abs(x1), abs(x2), abs(y1), abs(y2)) ** 1.5
    edges = np.linspace(0.0, U, 15)
    g, w = _gl(40)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        u = 0.5 * (b - a) * g + 0.5 * (a + b)
        wu = 0.5 * (b - a) * w
        for ui, wi in zip(u, wu):
            total += wi * (_pplus_half(x1 + ui, y1, 1) * pearcey_P(-1, x2 + ui, y2, mode="quad")
                           - _pplus_half(x1 - ui, y1, -1) * pearcey_P(-1, x2 - ui, y2, mode="quad"))
    return -total


def _pplus_half(x, y, which):
    R = _quartic_radius(x, y)
    s, w, part = _pplus_contour(R)
    m = part == which
    f = w[m] * np.exp(s[m] ** 4 / 4 + y * s[m] ** 2 / 2 - x * s[m])
    return float((np.sum(f) / (2j * math.pi)).real)


def K_pearcey(pt1, pt2, p: PearceyParams = PearceyParams(), method: str = "rays") -> float:
    """Extended Pearcey kernel; general (A, C) reduced to A=6, C=1 by
    K^{A,C}((x1,y1),(x2,y2)) = a K((a x1, C a^2 y1), (a x2, C a^2 y2)), a = (6/|A|)^{1/4}.

    A < 0 exchanges the roles of the two contours.  Up to a transposition, which
    leaves every determinant unchanged, that kernel is K^{|A|,-C} at (-x1, y1), (-x2, y2)."""
    (x1, y1), (x2, y2) = pt1, pt2
    if p.A == 0:
        raise ValueError("K_pearcey needs A != 0")
    C = p.C
    if p.A < 0:
        x1, x2, C = -x1, -x2, -C
    a = (6.0 / abs(p.A)) ** 0.25
    u1, v1, u2, v2 = a * x1, C * a * a * y1, a * x2, C * a * a * y2
    if method == "rays":
        val = a * _pearcey_double(u1, v1, u2, v2)
    else:
        val = a * _pearcey_s_integral(u1, v1, u2, v2)
    dy = y1 - y2
    if dy != 0 and np.sign(dy * p.C) == p.gaussian_side:
        val += p.gaussian_sign * heat_kernel(x1 - x2, dy, abs(C))
    return float(val)


def rho_pearcey_general(x, y, p: PearceyParams) -> float:
    """Diagonal of K^{A,C}: a rho(a x, C a^2 y) with the A < 0 reduction of K_pearcey."""
    C = -p.C if p.A < 0 else p.C
    a = (6.0 / abs(p.A)) ** 0.25
    return a * rho_pearcey(a * x, C * a * a * y)


def pearcey_equal_time(x1, x2, y) -> float:
    """Equal-time kernel (A=6, C=1) from P+- and their x-derivatives."""
    a0, a1, a2, b0, b1, b2 = _pd_pair(x1, x2, y)
    if x1 == x2:
        return rho_pearcey(x1, y)
    return -(a2 * b0 - a1 * b1 + a0 * b2 + y * a0 * b0) / (x1 - x2)


def _pd_pair(x1, x2, y):
    return (pearcey_P(1, x1, y, "quad", 0), pearcey_P(1, x1, y, "quad", 1), pearcey_P(1, x1, y, "quad", 2),
            pearcey_P(-1, x2, y, "quad", 0), pearcey_P(-1, x2, y, "quad", 1), pearcey_P(-1, x2, y, "quad", 2))


def rho_pearcey(x, y) -> float:
    """Density P+'' P-' - P+' P-'' + x P+ P- (A=6, C=1)."""
    a0, a1, a2, b0, b1, b2 = _pd_pair(x, x, y)
    return a2 * b1 - a1 * b2 + x * a0 * b0


def pearcey_kernel_pde_residuals(x1, y1, x2, y2, h: float = 1e-2) -> tuple:
    """FD residuals of (d_y1 - d_x1^2/2) K, (d_y2 + d_x2^2/2) K and (d_x1 + d_x2) K - P+(x1,y1) P-(x2,y2)."""
    def K(a, b, c, d):
        return _pearcey_double(a, b, c, d)
    r1 = _fd(lambda v: K(x1, v, x2, y2), y1, h, 1) - 0.5 * _fd(lambda u: K(u, y1, x2, y2), x1, h, 2)
    r2 = _fd(lambda v: K(x1, y1, x2, v), y2, h, 1) + 0.5 * _fd(lambda u: K(x1, y1, u, y2), x2, h, 2)
    r3 = (_fd(lambda u: K(x1 + u, y1, x2 + u, y2), 0.0, h, 1)
          - pearcey_P(1, x1, y1, "quad") * pearcey_P(-1, x2, y2, "quad"))
    return float(r1), float(r2), float(r3)
