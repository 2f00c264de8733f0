"""Skew shapes in an a x b box, plane partitions on them, slices and tiles.

Geometry conventions
--------------------
Rows i = 1..a run top to bottom, columns j = 1..b left to right, and the
diagonal of a square is t = j - i.  The inner shape mu is cut from the top
left corner.  Its boundary is the lattice path from the bottom-left box
corner to the top-right one; the unit step centred at the half-integer m
is an up-step when u_k < m < v_{k+1} and a right-step when v_k < m < u_k.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (CenteringViolation, InterlacingViolation,
                     MonotonicityViolation, OrderingViolation)

OUTSIDE = -1


@dataclass(frozen=True)
class CornerData:
    """Inner corners v_1..v_N and outer corners u_0..u_N, optionally scaled by r."""
    v: tuple
    u: tuple
    r: float | None = None

    @property
    def N(self) -> int:
        return len(self.v)

    @property
    def discrete(self) -> bool:
        return all(isinstance(x, (int, np.integer)) for x in self.v + self.u)

    @property
    def U(self) -> np.ndarray:
        return self.r * np.asarray(self.u, dtype=float)

    @property
    def V(self) -> np.ndarray:
        return self.r * np.asarray(self.v, dtype=float)

    @property
    def a(self) -> int:
        return sum(self.v[i] - self.u[i] for i in range(self.N))

    @property
    def b(self) -> int:
        return sum(self.u[i + 1] - self.v[i] for i in range(self.N))

    @property
    def t_min(self) -> int:
        return self.u[0] + 1

    @property
    def t_max(self) -> int:
        return self.u[-1] - 1

    def t_range(self) -> range:
        return range(self.t_min, self.t_max + 1)

    def m_values(self) -> np.ndarray:
        """Half-integers u_0+1/2 .. u_N-1/2."""
        return np.arange(self.u[0], self.u[-1]) + 0.5

    def eps(self, m) -> np.ndarray:
        """+1 on (v_i, u_i), -1 on (u_i, v_{i+1})."""
        m = np.asarray(m, dtype=float)
        out = np.full(m.shape, -1, dtype=int)
        for vi, ui in zip(self.v, self.u[1:]):
            out[(m > vi) & (m < ui)] = 1
        return out if out.ndim else int(out)

    @cached_property
    def mu(self) -> tuple:
        """Row lengths of the inner shape (length a)."""
        x, y = 0, self.a
        rows = [0] * (self.a + 1)
        for e in self.eps(self.m_values()):
            if e < 0:
                rows[y] = x
                y -= 1
            else:
                x += 1
        return tuple(rows[1:])

    def in_shape(self, i: int, j: int) -> bool:
        return 1 <= i <= self.a and 1 <= j <= self.b and j > self.mu[i - 1]

    @cached_property
    def diagonals(self) -> dict:
        """t -> list of squares (i, j) on diagonal t, ordered by increasing i."""
        out = {t: [] for t in self.t_range()}
        for i in range(1, self.a + 1):
            for j in range(self.mu[i - 1] + 1, self.b + 1):
                out[j - i].append((i, j))
        return out

    @property
    def n_squares(self) -> int:
        return sum(self.b - m for m in self.mu)

    def B(self, t):
        return profile_B(t, self)

    def to_json(self) -> str:
        d = {"v": list(self.v), "u": list(self.u)}
        if self.r is not None:
            d["r"] = self.r
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CornerData":
        return validate_corners(d["v"], d["u"], d.get("r"))


def validate_corners(v: Sequence, u: Sequence, r: float | None = None) -> CornerData:
    v = tuple(int(x) if float(x).is_integer() else float(x) for x in v)
    u = tuple(int(x) if float(x).is_integer() else float(x) for x in u)
    if len(v) < 1:
        raise ValueError("need at least one inner corner")
    if len(u) != len(v) + 1:
        raise ValueError("need exactly one more outer corner than inner corners")
    seq = [u[0]]
    for vi, ui in zip(v, u[1:]):
        seq += [vi, ui]
    for k in range(1, len(seq)):
        if not seq[k] > seq[k - 1]:
            raise OrderingViolation(k)
    sv, su = sum(v), sum(u[1:-1])
    if sv != su:
        raise CenteringViolation(len(v), f"sum(v)={sv} differs from sum(u_1..u_N-1)={su}")
    if r is not None and not r > 0:
        raise ValueError("scale r must be positive")
    return CornerData(v, u, None if r is None else float(r))


def profile_B(t, c: CornerData):
    t = np.asarray(t, dtype=float)
    out = 0.5 * sum(np.abs(t - vi) for vi in c.v)
    if c.N > 1:
        out = out - 0.5 * sum(np.abs(t - ui) for ui in c.u[1:-1])
    return out if out.ndim else float(out)


def profile_L(t, c: CornerData):
    """Total length of (-) intervals to the left of t."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for ui, vn in zip(c.u[:-1], c.v):
        out = out + np.clip(t, ui, vn) - ui
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class PlanePartition:
    """Dense a x b height array; squares of the inner shape hold OUTSIDE."""
    shape: CornerData
    heights: np.ndarray = field(repr=False)

    def __post_init__(self):
        h = np.array(self.heights, dtype=np.int64)
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)

    @classmethod
    def empty(cls, c: CornerData) -> "PlanePartition":
        h = np.zeros((c.a, c.b), dtype=np.int64)
        for i, m in enumerate(c.mu):
            h[i, :m] = OUTSIDE
        return cls(c, h)

    @classmethod
    def from_rows(cls, c: CornerData, rows: Sequence[Sequence[int]]) -> "PlanePartition":
        """rows[i] lists the entries of row i+1 from column mu_i+1 on; missing tail = 0."""
        h = cls.empty(c).heights.copy()
        for i, row in enumerate(rows):
            m = c.mu[i]
            h[i, m:m + len(row)] = row
        p = cls(c, h)
        validate_plane_partition(p)
        return p

    def __getitem__(self, ij):
        i, j = ij
        return int(self.heights[i - 1, j - 1])

    def __eq__(self, other):
        return (isinstance(other, PlanePartition) and self.shape == other.shape
                and np.array_equal(self.heights, other.heights))

    def __hash__(self):
        return hash((self.shape, self.heights.tobytes()))

    def with_increment(self, i: int, j: int, d: int = 1) -> "PlanePartition":
        h = self.heights.copy()
        h[i - 1, j - 1] += d
        p = PlanePartition(self.shape, h)
        validate_plane_partition(p)
        return p


def validate_plane_partition(p: PlanePartition) -> None:
    c, h = p.shape, p.heights
    if h.shape != (c.a, c.b):
        raise MonotonicityViolation(f"array shape {h.shape} differs from box {(c.a, c.b)}")
    mask = np.ones_like(h, dtype=bool)
    for i, m in enumerate(c.mu):
        mask[i, :m] = False
    if np.any(h[~mask] != OUTSIDE):
        raise MonotonicityViolation("inner-shape squares must hold the sentinel")
    if np.any(h[mask] < 0):
        raise MonotonicityViolation("negative height")
    both = mask[:-1, :] & mask[1:, :]
    bad = both & (h[:-1, :] < h[1:, :])
    if bad.any():
        i, j = np.argwhere(bad)[0] + 1
        raise MonotonicityViolation(f"pi[{i},{j}] < pi[{i + 1},{j}]")
    both = mask[:, :-1] & mask[:, 1:]
    bad = both & (h[:, :-1] < h[:, 1:])
    if bad.any():
        i, j = np.argwhere(bad)[0] + 1
        raise MonotonicityViolation(f"pi[{i},{j}] < pi[{i},{j + 1}]")


def volume(p: PlanePartition) -> int:
    h = p.heights
    return int(h[h > 0].sum())


@dataclass(frozen=True)
class SliceSequence:
    """lam[t] holds (pi_{i,t+i}) over the squares of diagonal t, zeros kept."""
    shape: CornerData
    lam: dict

    @property
    def marks(self) -> list:
        """'<' where lam(t) precedes lam(t+1) (up-step), '>' otherwise."""
        return ["<" if e < 0 else ">" for e in self.shape.eps(np.arange(self.shape.t_min, self.shape.t_max) + 0.5)]

    def partitions(self) -> list:
        return [tuple(x for x in self.lam[t] if x > 0) for t in self.shape.t_range()]

    def __str__(self):
        parts = ["(" + ",".join(map(str, p)) + ")" for p in self.partitions()]
        out = parts[0]
        for mk, pt in zip(self.marks, parts[1:]):
            out += mk + pt
        return out


def interlaces(big: Sequence[int], small: Sequence[int]) -> bool:
    """big > small: big_1 >= small_1 >= big_2 >= small_2 >= ..."""
    n = max(len(big), len(small)) + 1
    x = list(big) + [0] * (n - len(big))
    y = list(small) + [0] * (n - len(small))
    return all(x[k] >= y[k] >= x[k + 1] for k in range(n - 1))


def slices_of(p: PlanePartition) -> SliceSequence:
    c = p.shape
    lam = {t: tuple(p[i, j] for i, j in sq) for t, sq in c.diagonals.items()}
    for t in range(c.t_min, c.t_max):
        e = c.eps(t + 0.5)
        x, y = lam[t], lam[t + 1]
        ok = interlaces(y, x) if e < 0 else interlaces(x, y)
        if not ok:
            raise InterlacingViolation(t)
    return SliceSequence(c, lam)


def assemble(s: SliceSequence) -> PlanePartition:
    c = s.shape
    h = PlanePartition.empty(c).heights.copy()
    for t, sq in c.diagonals.items():
        vals = s.lam[t]
        for k, (i, j) in enumerate(sq):
            h[i - 1, j - 1] = vals[k] if k < len(vals) else 0
    p = PlanePartition(c, h)
    validate_plane_partition(p)
    return p


@dataclass(frozen=True)
class TileSet:
    """Centres (t, h) of the horizontal rhombi; h + t/2 + 1/2 is an integer."""
    points: frozenset

    def __len__(self):
        return len(self.points)

    def __contains__(self, th):
        return th in self.points

    def sorted(self) -> list:
        return sorted(self.points)

    def to_csv(self) -> str:
        rows = ["t,h"] + [f"{t},{format_half(h)}" for t, h in self.sorted()]
        return "\n".join(rows) + "\n"


def format_half(h: float) -> str:
    return str(int(h)) if float(h).is_integer() else f"{h:.1f}"


def tiles_of(p: PlanePartition) -> TileSet:
    pts = set()
    c = p.shape
    for sq in c.diagonals.values():
        for i, j in sq:
            pts.add((j - i, p[i, j] - (i + j - 1) / 2))
    return TileSet(frozenset(pts))


def tile_index(t: int, h: float, c: CornerData) -> int:
    """Particle index j = h + B(t) + 1/2; tile (t,h) present iff j is in {lam_k - k : k = 0, 1, ...}."""
    j = h + profile_B(t, c) + 0.5
    if not float(j).is_integer():
        raise ValueError(f"(t,h)=({t},{h}) violates the lattice parity")
    return int(j)


def render_svg(ts: TileSet, c: CornerData, unit: float = 20.0) -> str:
    """Lozenge picture of the stepped surface: top faces from the tiles, side faces
    from height differences, and the inner-shape wall up to one level above the top."""
    heights = {}
    for t, sq in c.diagonals.items():
        hs = sorted((h for tt, h in ts.points if tt == t), reverse=True)
        for k, (i, j) in enumerate(sq):
            heights[(i, j)] = int(round(hs[k] + (i + j - 1) / 2))
    top = max(heights.values(), default=0) + 1

    def proj(x, y, z):
        # corner (x, y, z) of the cube grid -> (t, h)
        return (y - x, z - (x + y) / 2)

    def ht(i, j):
        if c.in_shape(i, j):
            return heights[(i, j)]
        if 1 <= i <= c.a and 1 <= j <= c.b:
            return top
        return 0

    polys = []
    for (i, j), z in heights.items():
        polys.append(("top", [proj(i - 1, j - 1, z), proj(i, j - 1, z), proj(i, j, z), proj(i - 1, j, z)]))
    for i in range(1, c.a + 1):
        for j in range(1, c.b + 1):
            z0 = ht(i, j)
            z1 = ht(i + 1, j) if i < c.a else 0
            for z in range(z1, z0):
                polys.append(("front", [proj(i, j - 1, z), proj(i, j, z), proj(i, j, z + 1), proj(i, j - 1, z + 1)]))
            z1 = ht(i, j + 1) if j < c.b else 0
            for z in range(z1, z0):
                polys.append(("side", [proj(i - 1, j, z), proj(i, j, z), proj(i, j, z + 1), proj(i - 1, j, z + 1)]))
    fill = {"top": "#e8d27a", "front": "#5d8cc0", "side": "#b04a4a"}
    xs = [p[0] for _, poly in polys for p in poly] or [0.0]
    ys = [p[1] for _, poly in polys for p in poly] or [0.0]
    x0, x1, y0, y1 = min(xs) - 1, max(xs) + 1, min(ys) - 1, max(ys) + 1
    w, hgt = (x1 - x0) * unit, (y1 - y0) * unit
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2f}" height="{hgt:.2f}" '
             f'viewBox="0 0 {w:.2f} {hgt:.2f}">']
    for kind, poly in sorted(polys, key=lambda kp: (kp[0], [(round(a, 3), round(b, 3)) for a, b in kp[1]])):
        pts = " ".join(f"{(a - x0) * unit:.2f},{(y1 - b) * unit:.2f}" for a, b in poly)
        lines.append(f'<polygon class="{kind}" points="{pts}" fill="{fill[kind]}" stroke="black" stroke-width="0.5"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def from_json_file(path) -> CornerData:
    with open(path) as fh:
        return CornerData.from_dict(json.load(fh))


def iter_squares(c: CornerData) -> Iterable:
    for sq in c.diagonals.values():
        yield from sq
