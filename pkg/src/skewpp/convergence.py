"""Exact finite-q correlations against the bulk, edge and cusp kernels.

Only prefactor-free quantities are compared: one-point densities and determinants
of small point sets.  Each comparison is tabulated over the r-ladder, with the
asymptotic side evaluated at the chart coordinates of the rounded lattice point,
so lattice rounding does not enter the error.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .asykernels import AiryParams, K_airy, PearceyParams, K_pearcey
from .kernel import QuadratureSpec, evaluator
from .limitshape import (RationalF, boundary_roots, cusps, density,
                         expansion_coeffs)
from .measure import Weights, x_from_q
from .shapes import validate_corners

R_LADDER = (0.08, 0.04, 0.02)
SLACK = 1.2
# the compared errors are 1e-4 and up; entries the FFT cannot resolve at this level
# fall back to extended precision inside the evaluator
QUAD = QuadratureSpec(rtol=1e-6, atol=1e-7)

EXPONENTS = {"bulk": (1.0, 1.0), "edge": (2 / 3, 1 / 3), "cusp": (3 / 4, 1 / 2)}


@dataclass(frozen=True)
class Geometry:
    """Scaled corners; the lattice geometry at scale r has corners U/r, V/r."""
    U: tuple
    V: tuple

    @property
    def F(self) -> RationalF:
        return RationalF(self.U, self.V)

    def corners(self, r: float):
        u = [x / r for x in self.U]
        v = [x / r for x in self.V]
        if any(abs(x - round(x)) > 1e-9 for x in u + v):
            raise ValueError(f"corners are not on the lattice at r={r}")
        return validate_corners([round(x) for x in v], [round(x) for x in u], r)

    def specialization(self, r: float):
        return x_from_q(Weights(q=math.exp(-r)), self.corners(r))


@dataclass(frozen=True)
class ScalingChart:
    """chi = chi0 + r^px x + B r^py y, tau = tau0 + r^py y; bulk uses lattice offsets (px = py = 1)."""
    regime: str
    chi0: float
    tau0: float
    r: float
    B: float = 0.0

    @property
    def px(self):
        return EXPONENTS[self.regime][0]

    @property
    def py(self):
        return EXPONENTS[self.regime][1]

    def to_lattice(self, x: float, y: float) -> tuple:
        """Nearest lattice point (t, h) with h + t/2 + 1/2 integral."""
        r = self.r
        t = int(round((self.tau0 + r ** self.py * y) / r))
        y_t = (r * t - self.tau0) / r ** self.py
        chi = self.chi0 + r ** self.px * x + self.B * r ** self.py * y_t
        h = round(chi / r + t / 2 + 0.5) - t / 2 - 0.5
        return t, float(h)

    def to_chart(self, t: int, h: float) -> tuple:
        r = self.r
        y = (r * t - self.tau0) / r ** self.py
        x = (r * h - self.chi0 - self.B * r ** self.py * y) / r ** self.px
        return x, y


@dataclass
class Cell:
    r: float
    point: tuple
    exact: float
    asymptotic: float
    abs_err: float
    lattice: list = field(default_factory=list)


@dataclass
class ErrorTable:
    name: str
    cells: list
    info: dict = field(default_factory=dict)

    def by_point(self) -> dict:
        out = {}
        for c in self.cells:
            out.setdefault(c.point, []).append(c)
        return out

    def monotone(self, slack: float = SLACK) -> bool:
        for cells in self.by_point().values():
            errs = [c.abs_err for c in sorted(cells, key=lambda c: -c.r)]
            if any(b > slack * a for a, b in zip(errs[:-1], errs[1:])):
                return False
        return True

    def max_err(self, r: float | None = None) -> float:
        return max(c.abs_err for c in self.cells if r is None or c.r == r)

    def to_dict(self) -> dict:
        return {"name": self.name, "info": self.info, "monotone": self.monotone(),
                "cells": [asdict(c) for c in self.cells]}


def _kmat(ev, pts):
    return np.array([[ev.K(p, q) for q in pts] for p in pts])


# ---------------------------------------------------------------- bulk

def sine_prediction(pts, F: RationalF, r: float) -> np.ndarray:
    """Equal-time sine-kernel matrix at lattice points sharing one t (phases dropped)."""
    t = pts[0][0]
    rho = [density(r * h, r * t, F) for _, h in pts]
    M = np.diag(rho).astype(float)
    for a in range(len(pts)):
        for b in range(len(pts)):
            if a != b:
                d = pts[a][1] - pts[b][1]
                th = math.pi * 0.5 * (rho[a] + rho[b])
                M[a, b] = math.sin(th * d) / (math.pi * d)
    return M


def bulk_check(geom: Geometry, points, r_list=R_LADDER, window: int = 3, pair_gap: int = 1,
               frozen_points=()) -> list:
    """One-point density and equal-time pair determinant against theta/pi and the sine kernel.

    The exact density carries O(r) corrections that oscillate along h, so each
    cell reports the largest error over the 2*window+1 lattice points around the
    base point; this sup decreases with r even where a single site happens to
    sit on a node of the oscillation."""
    F = geom.F
    one, two, frz = [], [], []
    for r in r_list:
        ev = evaluator(geom.specialization(r), QUAD)
        for chi0, tau0 in points:
            ch = ScalingChart("bulk", chi0, tau0, r)
            t, h = ch.to_lattice(0, 0)
            e1, e2, ex1, as1, ex2, as2 = 0.0, 0.0, None, None, None, None
            for k in range(-window, window + 1):
                p = (t, h + k)
                K = ev.K(p, p)
                pred = density(r * p[1], r * t, F)
                if abs(K - pred) >= e1:
                    e1, ex1, as1 = abs(K - pred), K, pred
                pts = [p, (t, h + k + pair_gap)]
                d_ex = float(np.linalg.det(_kmat(ev, pts)))
                d_as = float(np.linalg.det(sine_prediction(pts, F, r)))
                if abs(d_ex - d_as) >= e2:
                    e2, ex2, as2 = abs(d_ex - d_as), d_ex, d_as
            one.append(Cell(r, (chi0, tau0), ex1, as1, e1, [t, h]))
            two.append(Cell(r, (chi0, tau0), ex2, as2, e2, [t, h]))
        for chi0, tau0 in frozen_points:
            ch = ScalingChart("bulk", chi0, tau0, r)
            p = ch.to_lattice(0, 0)
            K = ev.K(p, p)
            pred = density(r * p[1], r * p[0], F)
            frz.append(Cell(r, (chi0, tau0), K, pred, abs(K - pred), list(p)))
    out = [ErrorTable("bulk one-point", one), ErrorTable("bulk equal-time pair", two)]
    if frz:
        out.append(ErrorTable("bulk frozen", frz))
    return out


# ---------------------------------------------------------------- edge

@dataclass(frozen=True)
class EdgePoint:
    z: float
    chi0: float
    tau0: float
    params: AiryParams

    @property
    def frozen(self) -> float:
        """Density of the adjacent frozen region: 1 when A < 0, 0 when A > 0."""
        return 1.0 if self.params.A < 0 else 0.0


def edge_point(geom: Geometry, tau0: float, which: str = "upper", **kw) -> EdgePoint:
    """Boundary point on the vertical line at tau0 (lowest or highest crossing)."""
    roots = boundary_roots(tau0, geom.F)
    if not roots:
        raise ValueError(f"no frozen-boundary crossing at tau={tau0}")
    z, chi0 = roots[-1] if which == "upper" else roots[0]
    ec = expansion_coeffs(z, tau0, geom.F)
    p = AiryParams(ec.A, ec.D, ec.C, ec.B, ec.E, ec.H, ec.G, **kw)
    return EdgePoint(z, chi0, tau0, p)


def airy_prediction(pts_xy, ep: EdgePoint, r: float) -> np.ndarray:
    p = ep.params
    args = [(x - p.D * y * y / 2, y) for x, y in pts_xy]
    M = np.array([[K_airy(a, b, p) for b in args] for a in args]) * r ** (1 / 3)
    return M + ep.frozen * np.eye(len(args))


def edge_check(geom: Geometry, ep: EdgePoint, xs=(-0.5, 0.0, 0.5, 1.0), y: float = 0.0,
               r_list=R_LADDER) -> ErrorTable:
    cells = []
    for r in r_list:
        ev = evaluator(geom.specialization(r), QUAD)
        ch = ScalingChart("edge", ep.chi0, ep.tau0, r, ep.params.B)
        for x in xs:
            p = ch.to_lattice(x, y)
            K = ev.K(p, p)
            pred = float(airy_prediction([ch.to_chart(*p)], ep, r)[0, 0])
            cells.append(Cell(r, (x, y), K, pred, abs(K - pred), list(p)))
    return ErrorTable("edge one-point", cells, {"z": ep.z, "chi0": ep.chi0, "tau0": ep.tau0, "A": ep.params.A})


# ---------------------------------------------------------------- cusp

@dataclass(frozen=True)
class CuspPoint:
    z: float
    chi0: float
    tau0: float
    B: float
    params: PearceyParams


def cusp_point(geom: Geometry, k: int = 0, **kw) -> CuspPoint:
    cu = cusps(geom.F)[k]
    ec = expansion_coeffs(cu.z0, cu.tau0, geom.F)
    return CuspPoint(cu.z0, cu.chi0, cu.tau0, ec.B, PearceyParams(A=ec.A_triple, C=ec.C, D=ec.D, **kw))


def pearcey_prediction(pts_xy, cp: CuspPoint, r: float, params: PearceyParams | None = None) -> np.ndarray:
    p = params or cp.params
    return np.array([[K_pearcey(a, b, p) for b in pts_xy] for a in pts_xy]) * r ** 0.25


def interpolated_density(ev, ch: ScalingChart, x: float, y: float):
    """Exact one-point density at chart point (x, y), linear in h along each of the two
    bracketing time slices and then linear in t.  One site is r^(1 - px) in x, which at
    the cusp is too coarse for nearest-point rounding to compare different r fairly."""
    r = ch.r
    t_real = (ch.tau0 + r ** ch.py * y) / r
    t0 = math.floor(t_real)
    vals, used = [], []
    for t in (t0, t0 + 1):
        y_t = (r * t - ch.tau0) / r ** ch.py
        chi = ch.chi0 + r ** ch.px * x + ch.B * r ** ch.py * y_t
        m = chi / r + t / 2 + 0.5
        m0 = math.floor(m)
        h0 = m0 - t / 2 - 0.5
        w = m - m0
        vals.append((1 - w) * ev.K((t, h0), (t, h0)) + w * ev.K((t, h0 + 1), (t, h0 + 1)))
        used += [[t, h0], [t, h0 + 1]]
    w = t_real - t0
    return (1 - w) * vals[0] + w * vals[1], used


def cusp_check(geom: Geometry, cp: CuspPoint, xs=(-0.5, 0.0, 0.5), y: float = 0.0,
               r_list=R_LADDER) -> ErrorTable:
    cells = []
    for r in r_list:
        ev = evaluator(geom.specialization(r), QUAD)
        ch = ScalingChart("cusp", cp.chi0, cp.tau0, r, cp.B)
        for x in xs:
            K, used = interpolated_density(ev, ch, x, y)
            pred = float(pearcey_prediction([(x, y)], cp, r)[0, 0])
            cells.append(Cell(r, (x, y), float(K), pred, abs(K - pred), used))
    return ErrorTable("cusp one-point", cells, {"z": cp.z, "chi0": cp.chi0, "tau0": cp.tau0,
                                                 "A": cp.params.A, "C": cp.params.C})


GAUSSIAN_OPTIONS = ((-1, -1), (-1, 1), (1, -1), (1, 1), (0, 0))
GAUSSIAN_DEFAULT = (-1, -1)


def _pair_dets(ev, ch, pairs, predict, r):
    """Exact and predicted 2x2 determinants for (x1, y1), (x2, y2) chart pairs."""
    out = []
    for (x1, y1), (x2, y2) in pairs:
        p1, p2 = ch.to_lattice(x1, y1), ch.to_lattice(x2, y2)
        if p1[0] == p2[0]:
            continue
        ex = float(np.linalg.det(_kmat(ev, [p1, p2])))
        out.append((ex, [ch.to_chart(*p1), ch.to_chart(*p2)], [p1, p2]))
    return out


def pin_gaussian_side(geom: Geometry, base, regime: str, r: float = 0.02,
                      pairs=(((0.0, 0.0), (0.0, 0.6)), ((0.3, 0.0), (0.0, -0.6)),
                             ((0.0, 0.3), (0.2, -0.3)), ((-0.3, 0.4), (0.0, -0.2)))) -> dict:
    """Choose (side, sign) of the heat-kernel term that best matches exact unequal-time
    2x2 determinants; option (0, 0) means no Gaussian term at all."""
    ev = evaluator(geom.specialization(r), QUAD)
    if regime == "cusp":
        ch = ScalingChart("cusp", base.chi0, base.tau0, r, base.B)
    else:
        ch = ScalingChart("edge", base.chi0, base.tau0, r, base.params.B)
    data = _pair_dets(ev, ch, pairs, None, r)
    errors = {}
    for side, sign in GAUSSIAN_OPTIONS:
        if regime == "cusp":
            p = PearceyParams(base.params.A, base.params.C, base.params.D, gaussian_side=side,
                              gaussian_sign=sign)

            def pred(xy, p=p):
                return pearcey_prediction(xy, base, r, p)
        else:
            q = base.params
            p = AiryParams(q.A, q.D, q.C, q.B, q.E, q.H, q.G, gaussian_side=side, gaussian_sign=sign)
            ep = EdgePoint(base.z, base.chi0, base.tau0, p)

            def pred(xy, ep=ep):
                return airy_prediction(xy, ep, r)
        errors[(side, sign)] = max(abs(ex - float(np.linalg.det(pred(xy)))) for ex, xy, _ in data)
    best = min(errors, key=errors.get)
    return {"best": best, "errors": errors, "pairs": [d[2] for d in data],
            "exact": [d[0] for d in data]}


# ---------------------------------------------------------------- defaults

SYMMETRIC = Geometry((-2.0, 2.0), (0.0,))
TWO_CORNER = Geometry((-2.0, 1.52, 3.04), (-0.48, 2.0))
BULK_POINTS = ((0.0, 0.4), (-0.5, 0.0), (0.6, -0.8), (0.2, 0.9))
FROZEN_POINTS = ((-1.8, 0.4), (3.5, 0.4))


def run_suite(suite: str = "all", r_list=R_LADDER) -> dict:
    report = {"r_list": list(r_list), "tables": []}
    if suite in ("bulk", "all"):
        for t in bulk_check(SYMMETRIC, BULK_POINTS, r_list, frozen_points=FROZEN_POINTS):
            report["tables"].append(t.to_dict())
    if suite in ("edge", "all"):
        for which in ("upper", "lower"):
            ep = edge_point(SYMMETRIC, 0.4, which)
            table = edge_check(SYMMETRIC, ep, r_list=r_list)
            table.name = f"edge one-point ({which})"
            report["tables"].append(table.to_dict())
    if suite in ("cusp", "all"):
        cp = cusp_point(TWO_CORNER)
        pin = pin_gaussian_side(TWO_CORNER, cp, "cusp", r=min(r_list))
        cp = cusp_point(TWO_CORNER, gaussian_side=pin["best"][0], gaussian_sign=pin["best"][1])
        report["tables"].append(cusp_check(TWO_CORNER, cp, r_list=r_list).to_dict())
        report["gaussian_side"] = {"best": list(pin["best"]),
                                   "matches_default": tuple(pin["best"]) == GAUSSIAN_DEFAULT,
                                   "errors": {f"{k[0]},{k[1]}": v for k, v in pin["errors"].items()}}
    return report
