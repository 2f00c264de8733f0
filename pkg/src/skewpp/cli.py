"""Command-line entry point: `skewpp <command> [options]`.

Every output file starts with a comment line carrying the tool version and a hash
of the effective configuration.  Exit codes: 0 success, 1 `verify` found a
non-monotone table, 2 configuration error, 3 numerical failure (error class name
on stderr)."""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, SkewPPError
from .measure import Weights, x_from_q
from .shapes import CornerData, format_half

COMMANDS = ("sample", "kernel", "correlations", "limit-shape", "boundary", "sine", "airy", "pearcey",
            "verify")


@dataclass
class RunConfig:
    """Parsed JSON config: corners {v, u, r?} (nested under "corners" or top level),
    weights {q} or {q_t}, optional seed."""
    corners: CornerData | None = None
    weights: Weights | None = None
    seed: int | None = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | None) -> "RunConfig":
        if path is None:
            return cls()
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None
        cd = raw.get("corners", raw)
        corners = CornerData.from_dict(cd) if "v" in cd and "u" in cd else None
        weights = None
        wd = raw.get("weights", raw)
        if "q" in wd or "q_t" in wd:
            weights = Weights.from_dict(wd)
        return cls(corners, weights, raw.get("seed"), raw)

    def need_corners(self) -> CornerData:
        if self.corners is None:
            raise ConfigError("this command needs corner data (v, u) in --config")
        return self.corners

    def need_weights(self, q_override=None) -> Weights:
        if q_override is not None:
            if not 0 < q_override < 1:
                raise ConfigError("q must lie in (0, 1)")
            return Weights(q=q_override)
        if self.weights is None:
            raise ConfigError("this command needs weights (q or q_t) in --config or --q")
        return self.weights


def config_hash(cfg: RunConfig, args: argparse.Namespace) -> str:
    """sha256 over the config contents and every option that affects results."""
    skip = {"out", "svg", "meta", "config", "func", "threads"}
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    blob = json.dumps({"config": cfg.raw, "options": opts}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def header(cfg: RunConfig, args, prefix: str = "#") -> str:
    return f"{prefix} skewpp {__version__} command={args.command} config_hash={config_hash(cfg, args)}\n"


def write_csv(path, cfg, args, columns, rows):
    buf = io.StringIO()
    buf.write(header(cfg, args))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    _emit(path, buf.getvalue())


def write_json(path, cfg, args, obj):
    obj = {"_header": header(cfg, args, "").strip(), **obj}
    _emit(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _emit(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def read_points(path):
    """CSV with columns t,h and an optional set column; returns {set: [(t, h), ...]}."""
    if not os.path.exists(path):
        raise ConfigError(f"points file not found: {path}")
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows or "t" not in rows[0] or "h" not in rows[0]:
        raise ConfigError("points file needs columns t,h")
    out = {}
    for r in rows:
        out.setdefault(r.get("set", "0"), []).append((int(r["t"]), float(r["h"])))
    return out


def set_threads(n):
    n = n or os.environ.get("SKEWPP_THREADS")
    if not n:
        return
    n = int(n)
    if n < 1:
        raise ConfigError("--threads must be >= 1")
    import numba
    with warnings.catch_warnings():
        # numba probes threading layers on first use and warns about unusable ones
        warnings.simplefilter("ignore")
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _grid(text: str):
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise ConfigError(f"grid must look like 200x200, got {text!r}") from None


# ---------------------------------------------------------------- commands

def cmd_sample(args, cfg):
    from .sampler import SamplerConfig, sample_exact_batch, sample_mcmc, make_rng
    from .shapes import render_svg
    c = cfg.need_corners()
    w = cfg.need_weights(args.q)
    seed = args.seed if args.seed is not None else (cfg.seed or 0)
    try:
        sc = SamplerConfig(mode=args.mode, cap=args.cap, sweeps=int(args.sweeps), burn_in=int(args.burn_in),
                           thinning=int(args.thinning), seed=seed)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if sc.mode == "mcmc":
        run = sample_mcmc(c, w, sc)
        meta = dict(run.meta)
    else:
        run = sample_exact_batch(c, w, sc.cap, 1, make_rng(seed))
        meta = {"mode": "exact_capped", "seed": seed, "cap": sc.cap, "truncation": run.truncation}
    ts = run.tiles()
    buf = io.StringIO()
    buf.write(header(cfg, args))
    buf.write(ts.to_csv())
    _emit(args.out, buf.getvalue())
    if args.svg:
        _emit(args.svg, render_svg(ts, c).replace("<svg ", f"<!-- {header(cfg, args, '').strip()} -->\n<svg ", 1))
    if args.meta:
        meta["volume"] = int(run.volumes()[-1])
        # wall time is the only nondeterministic field and lives only in the metadata file
        write_json(args.meta, cfg, args, {"run": meta})
    return 0


def _specialization(args, cfg):
    c = cfg.need_corners()
    return x_from_q(cfg.need_weights(args.q), c)


def cmd_kernel(args, cfg):
    from .kernel import evaluator
    ev = evaluator(_specialization(args, cfg))
    pts = list(dict.fromkeys(p for ps in read_points(args.points).values() for p in ps))
    rows = [(t1, format_half(h1), t2, format_half(h2), ev.K((t1, h1), (t2, h2)))
            for t1, h1 in pts for t2, h2 in pts]
    write_csv(args.out, cfg, args, ["t1", "h1", "t2", "h2", "K"], rows)
    return 0


def cmd_correlations(args, cfg):
    from .kernel import evaluator
    ev = evaluator(_specialization(args, cfg))
    rows = [(name, len(U), ev.det(U)) for name, U in read_points(args.points).items()]
    write_csv(args.out, cfg, args, ["set", "size", "rho"], rows)
    return 0


def _scaled_F(cfg):
    from .limitshape import RationalF
    c = cfg.need_corners()
    if c.r is None:
        raise ConfigError("limit-shape commands need a scale r in the corner data")
    return RationalF.from_corners(c)


def cmd_limit_shape(args, cfg):
    from .limitshape import boundary_crossings, density, frozen_boundary
    F = _scaled_F(cfg)
    nt, nc = _grid(args.grid)
    tau = np.linspace(F.U[0], F.U[-1], nt + 2)[1:-1]
    if args.chi_range:
        lo, hi = args.chi_range
    else:
        bc = frozen_boundary(F)
        lo, hi = float(np.min(bc.chi)) - 0.5, float(np.max(np.minimum(bc.chi, 3 * (F.U[-1] - F.U[0])))) + 0.5
    chi = np.linspace(lo, hi, nc)
    rows = []
    for t in tau:
        rho = density(chi, t, F, boundary_crossings(t, F))
        rows.extend((t, x, r) for x, r in zip(chi, rho))
    write_csv(args.out, cfg, args, ["tau", "chi", "rho"], rows)
    return 0


def cmd_boundary(args, cfg):
    from .limitshape import frozen_boundary
    F = _scaled_F(cfg)
    bc = frozen_boundary(F)
    rows = [(z, x, t, b, 0) for z, x, t, b in zip(bc.z, bc.chi, bc.tau, bc.branch)]
    rows += [(cu.z0, cu.chi0, cu.tau0, -1, 1) for cu in bc.cusps]
    write_csv(args.out, cfg, args, ["z", "chi", "tau", "branch_id", "cusp"], rows)
    return 0


def _linspace(args):
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    return np.linspace(args.x0, args.x1, args.n)


def cmd_sine(args, cfg):
    from .asykernels import sine_kernel_det
    if not 0 <= args.theta <= math.pi:
        raise ConfigError("--theta must lie in [0, pi]")
    rows = [(dh, sine_kernel_det([0.0, float(dh)], args.theta) if dh else args.theta / math.pi)
            for dh in range(args.n)]
    # first column: lattice gap; second: equal-time pair correlation (density for gap 0)
    write_csv(args.out, cfg, args, ["dh", "rho"], rows)
    return 0


def cmd_airy(args, cfg):
    from .asykernels import AiryParams, rho_airy
    if args.A <= 0:
        raise ConfigError("--A must be positive")
    p = AiryParams(A=args.A, D=args.D)
    rows = [(x, args.y, float(rho_airy(x, args.y, p))) for x in _linspace(args)]
    write_csv(args.out, cfg, args, ["x", "y", "rho"], rows)
    return 0


def cmd_pearcey(args, cfg):
    from .asykernels import PearceyParams, rho_pearcey_general
    if args.A == 0:
        raise ConfigError("--A must be nonzero")
    p = PearceyParams(A=args.A, C=args.C)
    rows = [(x, args.y, rho_pearcey_general(x, args.y, p)) for x in _linspace(args)]
    write_csv(args.out, cfg, args, ["x", "y", "rho"], rows)
    return 0


def cmd_verify(args, cfg):
    from .convergence import R_LADDER, run_suite
    r_list = tuple(cfg.raw.get("r_list", R_LADDER))
    report = run_suite(args.suite, r_list)
    report["all_monotone"] = all(t["monotone"] for t in report["tables"])
    write_json(args.out, cfg, args, report)
    return 0 if report["all_monotone"] else 1


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="skewpp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"skewpp {__version__}")
    ap.add_argument("--threads", type=int, default=None, help="worker threads (fallback: SKEWPP_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, func, help_, config=True, out="-"):
        p = sub.add_parser(name, help=help_)
        if config:
            p.add_argument("--config", help="JSON config with corners and weights")
        p.add_argument("--out", default=out, help="output path ('-' for stdout)")
        p.set_defaults(func=func)
        return p

    p = cmd("sample", cmd_sample, "draw a random skew plane partition", out="tiles.csv")
    p.add_argument("--mode", choices=("mcmc", "exact_capped"), default="mcmc")
    p.add_argument("--q", type=float)
    p.add_argument("--sweeps", type=float, default=10_000)
    p.add_argument("--burn-in", type=float, default=1_000)
    p.add_argument("--thinning", type=float, default=10)
    p.add_argument("--cap", type=int, default=30)
    p.add_argument("--seed", type=int)
    p.add_argument("--svg")
    p.add_argument("--meta", help="write run metadata JSON here")

    for name, func, help_ in (("kernel", cmd_kernel, "exact kernel matrix at a point list"),
                              ("correlations", cmd_correlations, "correlation functions det K(U)")):
        p = cmd(name, func, help_)
        p.add_argument("--q", type=float)
        p.add_argument("--points", required=True, help="CSV with columns t,h[,set]")

    p = cmd("limit-shape", cmd_limit_shape, "limit density on a (tau, chi) grid", out="density.csv")
    p.add_argument("--grid", default="200x200", help="NTAUxNCHI")
    p.add_argument("--chi-range", type=float, nargs=2)
    cmd("boundary", cmd_boundary, "frozen boundary samples and cusps", out="boundary.csv")

    p = cmd("sine", cmd_sine, "discrete sine kernel correlations", config=False)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n", type=int, default=20)
    for name, func, help_ in (("airy", cmd_airy, "edge density"), ("pearcey", cmd_pearcey, "cusp density")):
        p = cmd(name, func, help_, config=False)
        p.add_argument("--x0", type=float, default=-3.0)
        p.add_argument("--x1", type=float, default=3.0)
        p.add_argument("--y", type=float, default=0.0)
        p.add_argument("--n", type=int, default=61)
        p.add_argument("--A", type=float, default=2.0 if name == "airy" else 6.0)
        if name == "airy":
            p.add_argument("--D", type=float, default=1.0)
        else:
            p.add_argument("--C", type=float, default=1.0)

    p = cmd("verify", cmd_verify, "convergence suites against the asymptotic kernels", out="report.json")
    p.add_argument("--suite", choices=("bulk", "edge", "cusp", "all"), default="all")
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        set_threads(args.threads)
        cfg = RunConfig.load(getattr(args, "config", None))
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args, cfg)
    except SkewPPError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except (ValueError, KeyError, TypeError) as e:
        # malformed inputs rejected by the domain constructors
        print(f"ConfigError: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except OSError as e:
        print(f"ConfigError: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())
