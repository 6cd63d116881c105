"""Command-line driver: ``scatter <subcommand> [options]``.

Subcommands: smatrix, verify, eigenfield, sshift, bem (farfield|capacity), hahn-fit.
Every JSON output embeds the run configuration under ``"config"``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bem2d, hahn, lowenergy, sshift
from .ball_scatter import Ball, eigenfunction_eval, scattering_block
from .errors import ConfigurationError, HodgeScatterError, UnsupportedError
from .harmonic_forms import ball_l2_basis, disc_resonance
from .harmonics import Mode, ModeSet
from .logcx import LogComplex

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------------------

def parse_grid(spec: str, points: int | None = None) -> np.ndarray:
    """``"min:max:geom:count"``, ``"min:max:lin:count"`` or ``"min:max"`` (+ ``points``, geometric)."""
    parts = spec.split(":")
    try:
        if len(parts) == 2:
            lo, hi = float(parts[0]), float(parts[1])
            kind, n = "geom", points
        elif len(parts) == 4:
            lo, hi, kind, n = float(parts[0]), float(parts[1]), parts[2], int(parts[3])
        else:
            raise ValueError
    except ValueError:
        raise CliError(f"invalid grid {spec!r}; expected min:max:geom|lin:count", EXIT_CONFIG)
    if n is None or n <= 0:
        raise CliError(f"empty grid {spec!r}", EXIT_CONFIG)
    if hi < lo:
        raise CliError(f"grid {spec!r}: max < min", EXIT_CONFIG)
    if kind == "geom":
        if lo <= 0:
            raise CliError("geometric grid needs min > 0", EXIT_CONFIG)
        return np.geomspace(lo, hi, n)
    if kind == "lin":
        return np.linspace(lo, hi, n)
    raise CliError(f"unknown grid kind {kind!r}", EXIT_CONFIG)


def resolve_threads(requested: int | None) -> int:
    if requested:
        return max(1, int(requested))
    env = os.environ.get("HODGE_SCATTER_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError(f"HODGE_SCATTER_THREADS={env!r} is not an integer", EXIT_CONFIG)
    return os.cpu_count() or 1


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return json.loads(json.dumps(cfg, default=str))


def _out_dir(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex) or isinstance(o, np.complexfloating):
        return [float(np.real(o)), float(np.imag(o))]
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _geometry(args) -> Ball:
    if getattr(args, "shape", "ball") not in ("ball", "disc"):
        raise CliError(f"unknown shape {args.shape!r}", EXIT_CONFIG)
    try:
        geom = Ball(args.d, args.p, args.radius, args.bc)
        if geom.scalar_bc is None and (geom.d, geom.p) not in ((2, 1), (3, 1), (3, 2)):
            raise UnsupportedError("")
    except (UnsupportedError, ConfigurationError, ValueError) as exc:
        raise CliError(f"unsupported basis: d={args.d}, p={args.p} ({exc})".replace(" ()", ""), EXIT_CONFIG)
    return geom


def _parse_mode(text: str, d: int, p: int) -> Mode:
    try:
        l, idx = (int(v) for v in text.split(","))
    except ValueError:
        raise CliError(f"invalid mode {text!r}; expected 'l,idx'", EXIT_CONFIG)
    sl = ModeSet(d, p, l).slice(l)
    if not 0 <= idx < sl.stop - sl.start:
        raise CliError(f"mode index {idx} out of range for degree {l}", EXIT_CONFIG)
    return Mode(d, p, l, idx)


# --------------------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------------------

def cmd_smatrix(args) -> int:
    geom = _geometry(args)
    if not args.grid:
        raise CliError("smatrix needs --grid", EXIT_CONFIG)
    grid = parse_grid(args.grid)
    rays = [0.0] + ([args.arg_ray] if args.arg_ray is not None else [])
    jobs = [(ray, k, float(m)) for ray in rays for k, m in enumerate(grid)]
    out = _out_dir(args)

    def work(job):
        ray, k, m = job
        lam = LogComplex(m, ray)
        try:
            return job, scattering_block(geom, lam, args.lmax)
        except HodgeScatterError as exc:
            if isinstance(exc, UnsupportedError):
                raise CliError(f"unsupported basis: {exc}", EXIT_CONFIG)
            raise CliError(f"ball_scatter failed at lambda={m:.6g}*exp(i*{ray:g}): {exc}", EXIT_NUMERIC)

    with ThreadPoolExecutor(max_workers=resolve_threads(args.threads)) as ex:
        results = list(ex.map(work, jobs))
    cfg = _config(args)
    index = []
    for (ray, k, m), blk in results:
        name = f"block_{k:04d}.json" if ray == 0.0 else f"block_ray_{k:04d}.json"
        obj = blk.to_json()
        obj["config"] = cfg
        obj["unitarity_defect"] = blk.unitarity_defect() if ray == 0.0 and geom.p in (0, geom.d) else None
        _write_json(out / name, obj)
        index.append({"file": name, "lambda": {"modulus": m, "arg": ray}})
    _write_json(out / "index.json", {"config": cfg, "blocks": index})
    print(f"wrote {len(index)} blocks to {out}")
    return 0


def _verify_rows(geom: Ball, grid, tol: float) -> list:
    d, p, R = geom.d, geom.p, geom.R
    rows = []

    def row(name, rep=None, **extra):
        r = {"name": name}
        if rep is not None:
            r.update(delta_rel=rep["delta_rel"], status="PASS" if rep["pass"] else "FAIL",
                     fitted=rep["fitted"], predicted=rep["predicted"])
            if "beta_fitted" in rep:
                r["beta_fitted"] = rep["beta_fitted"]
        r.update(extra)
        rows.append(r)

    lams = [LogComplex(float(m)) for m in grid]
    if d == 2:
        res = disc_resonance(R)
        if p == 0 or p == 1:
            m = Mode(2, p, p, 0)
            gsc = Ball(2, p, R, "dirichlet")
            pred = lowenergy.predict_amplitude(2, p, m, m, res=res, R=R)
            rep = lowenergy.verify(pred, lowenergy.sample_amplitude(gsc, m, m, lams), tol=tol)
            row("resonance coefficient", rep, beta_predicted=res.beta,
                beta_delta=abs(rep.get("beta_fitted", math.nan) - res.beta))
        else:
            m = Mode(2, p, 0, 0)
            pred = lowenergy.predict_amplitude(2, p, m, m, R=R, res=res)
            rep = lowenergy.verify(pred, lowenergy.sample_amplitude(geom, m, m, lams), tol=tol)
            row("amplitude bound l=0", rep)
        return rows
    data = ball_l2_basis(d, p, R)
    if data.basis and data.bc == "relative":
        row("tr P^(1)", None, value=data.trace_P(1), expected=R,
            status="PASS" if abs(data.trace_P(1) - R) <= tol * R else "FAIL")
    for l in range(0, 3):
        ms = ModeSet(d, p, l)
        cands = ms.modes[ms.slice(l)]
        # prefer a mode that couples to the harmonic forms (non-trivial leading term)
        m = max(cands, key=lambda c: float(np.linalg.norm(data.a_vector(c))) if data.basis else 0.0)
        pred = lowenergy.predict_amplitude(d, p, m, m, data=data, R=R)
        rep = lowenergy.verify(pred, lowenergy.sample_amplitude(geom, m, m, lams), tol=tol)
        row(f"amplitude order l={l}", rep)
    if data.basis and data.bc == "relative" and d == 3:
        m = Mode(3, p, 1, 2)
        pred = lowenergy.predict_eigenfunction(3, p, m, data=data, R=R)
        rep = lowenergy.verify(pred, lowenergy.sample_shell_coefficient(geom, m, lams, data=data), tol=tol)
        row("eigenfunction pairing <E, u_1>", rep)
    return rows


def cmd_verify(args) -> int:
    geom = _geometry(args)
    grid = parse_grid(args.grid)
    if grid.max() >= 1:
        raise CliError("verify grid must lie in (0, 1)", EXIT_CONFIG)
    try:
        rows = _verify_rows(geom, grid, args.tol)
    except UnsupportedError as exc:
        raise CliError(f"unsupported basis: {exc}", EXIT_CONFIG)
    except HodgeScatterError as exc:
        raise CliError(f"lowenergy failed on grid [{grid.min():.3g}, {grid.max():.3g}]: {exc}", EXIT_NUMERIC)
    out = _out_dir(args)
    _write_json(out / "report.json", {"config": _config(args), "rows": rows})
    for r in rows:
        detail = f"delta={r['delta_rel']:.3g}" if "delta_rel" in r else f"value={r.get('value')}"
        print(f"{r.get('status', '----'):4s}  {r['name']}  {detail}")
    return 0


def cmd_eigenfield(args) -> int:
    geom = _geometry(args)
    phi = _parse_mode(args.mode, geom.d, geom.p)
    radii = parse_grid(args.grid)
    if radii.min() < geom.R:
        raise CliError("eigenfield radii must be >= radius", EXIT_CONFIG)
    direction = np.array([float(v) for v in args.direction.split(",")]) if args.direction else np.eye(geom.d)[0]
    if direction.shape != (geom.d,) or not np.linalg.norm(direction) > 0:
        raise CliError("direction must have d nonzero-norm components", EXIT_CONFIG)
    direction = direction / np.linalg.norm(direction)
    X = radii[:, None] * direction[None, :]
    lam = LogComplex(args.lam, args.arg)
    try:
        E = eigenfunction_eval(phi, lam, X, geom, lmax=args.lmax)
    except HodgeScatterError as exc:
        raise CliError(f"ball_scatter failed at lambda={args.lam:.6g}: {exc}", EXIT_NUMERIC)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i}" for i in range(geom.d)] + [f"{c}{k}" for k in range(E.shape[1]) for c in ("re", "im")])
    for x, e in zip(X, E):
        w.writerow([f"{v:.17g}" for v in x] + [f"{f:.17g}" for z in e for f in (z.real, z.imag)])
    out = _out_dir(args)
    (out / "eigenfield.csv").write_text(buf.getvalue())
    _write_json(out / "eigenfield.json", {"config": _config(args), "points": len(X)})
    print(f"wrote {len(X)} points to {out / 'eigenfield.csv'}")
    return 0


def cmd_sshift(args) -> int:
    geom = _geometry(args)
    mus = parse_grid(args.mu, args.points)
    try:
        samples = sshift.xi_curve(geom, mus)
        report = sshift.fit_low_energy(geom, mus[(mus >= 1e-8) & (mus <= 1e-2)]) if args.fit else None
    except UnsupportedError as exc:
        raise CliError(f"unsupported basis: {exc}", EXIT_CONFIG)
    except HodgeScatterError as exc:
        raise CliError(f"sshift failed on mu in [{mus.min():.3g}, {mus.max():.3g}]: {exc}", EXIT_NUMERIC)
    out = _out_dir(args)
    (out / "xi.csv").write_text(sshift.to_csv(samples))
    if report is not None:
        _write_json(out / "fit.json", {"config": _config(args), **report})
    print(f"wrote {len(samples)} rows to {out / 'xi.csv'}")
    return 0


def _curve(args) -> bem2d.BoundaryCurve2D:
    try:
        if args.curve_json:
            return bem2d.curve_from_json(json.loads(Path(args.curve_json).read_text()))
        if args.curve == "circle":
            return bem2d.circle(args.radius)
        if args.curve == "ellipse":
            return bem2d.ellipse(args.a, args.b)
        if args.curve == "kite":
            return bem2d.kite()
    except (HodgeScatterError, OSError, KeyError, json.JSONDecodeError) as exc:
        raise CliError(f"invalid curve: {exc}", EXIT_CONFIG)
    raise CliError(f"unknown curve {args.curve!r}", EXIT_CONFIG)


def cmd_bem(args) -> int:
    curve = _curve(args)
    out = _out_dir(args)
    if args.bem_cmd == "capacity":
        try:
            cap, beta = bem2d.laplace_capacity(curve, args.n)
        except HodgeScatterError as exc:
            raise CliError(f"bem2d capacity failed: {exc}", EXIT_NUMERIC)
        obj = {"cap": cap, "beta": beta, "config": _config(args)}
        _write_json(out / "capacity.json", obj)
        print(json.dumps({"cap": cap, "beta": beta}))
        return 0
    if args.lam is None or args.lam <= 0:
        raise CliError("bem farfield needs --lambda > 0", EXIT_CONFIG)
    omega = np.array([math.cos(args.incident_angle), math.sin(args.incident_angle)])
    try:
        sol = bem2d.solve_dirichlet(curve, args.lam, (omega, 1.0), N=args.n)
    except HodgeScatterError as exc:
        raise CliError(f"bem2d failed at lambda={args.lam:.6g}: {exc}", EXIT_NUMERIC)
    theta = 2 * np.pi * np.arange(args.angles) / args.angles
    uinf = bem2d.far_field(sol, theta)[:, 0]
    lines = ["theta,re,im"] + [f"{t:.17g},{z.real:.17g},{z.imag:.17g}" for t, z in zip(theta, uinf)]
    (out / "farfield.csv").write_text("\n".join(lines) + "\n")
    _write_json(out / "farfield.json", {"config": _config(args), "condition": sol.condition,
                                        "residual": sol.residual})
    print(f"wrote {len(theta)} angles to {out / 'farfield.csv'}")
    return 0


def cmd_hahn_fit(args) -> int:
    try:
        rows = list(csv.DictReader(Path(args.samples).read_text().splitlines()))
    except OSError as exc:
        raise CliError(f"cannot read samples: {exc}", EXIT_CONFIG)
    if not rows:
        raise CliError("empty samples file", EXIT_CONFIG)
    try:
        samples = [(LogComplex(float(r["lam"]), float(r.get("arg", 0) or 0)), complex(float(r["re"]), float(r["im"])))
                   for r in rows]
        exps = [tuple(int(v) if "/" not in v else v for v in e.split(":")) for e in args.exponents.split(",")]
        exps = [hahn.HahnExponent(hahn.Fraction(a), int(b)) for a, b in exps]
    except (KeyError, ValueError) as exc:
        raise CliError(f"invalid hahn-fit input: {exc}", EXIT_CONFIG)
    try:
        fr = hahn.fit(samples, exps)
    except HodgeScatterError as exc:
        raise CliError(f"hahn fit failed: {exc}", EXIT_NUMERIC)
    obj = {"config": _config(args), "exponents": [e.to_json() for e in fr.exponents],
           "coefficients": [[c.real, c.imag] for c in fr.coefficients], "residual": fr.residual,
           "condition": fr.condition}
    _write_json(_out_dir(args) / "hahn_fit.json", obj)
    print(json.dumps({"residual": fr.residual, "condition": fr.condition}))
    return 0


# --------------------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------------------

def _geometry_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--bc", choices=["dirichlet", "neumann"], default="dirichlet")
    p.add_argument("--shape", default="ball")
    p.add_argument("--radius", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--tol", type=float, default=1e-3, help="verification tolerance")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: HODGE_SCATTER_THREADS or cores)")
    common.add_argument("--config", default=None, help="JSON file with default option values")

    ap = argparse.ArgumentParser(prog="scatter", description=__doc__.splitlines()[0], parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("smatrix", parents=[common], help="scattering blocks on a lambda grid")
    _geometry_args(s)
    s.add_argument("--lmax", type=int, default=4)
    s.add_argument("--grid", default=None, help="lambda grid (required here or in --config)")
    s.add_argument("--arg-ray", type=float, default=None, help="additional sweep along arg(lambda) = value")
    s.set_defaults(func=cmd_smatrix)

    v = sub.add_parser("verify", parents=[common], help="low-energy expansion checks")
    _geometry_args(v)
    v.add_argument("--grid", default="1e-6:1e-3:geom:16")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("eigenfield", parents=[common], help="generalized eigenfunction along a ray")
    _geometry_args(e)
    e.add_argument("--mode", default="0,0", help="'l,idx' of the incoming mode")
    e.add_argument("--lambda", dest="lam", type=float, default=1.0)
    e.add_argument("--arg", type=float, default=0.0)
    e.add_argument("--lmax", type=int, default=None)
    e.add_argument("--grid", default="1:5:lin:50", help="radii")
    e.add_argument("--direction", default=None)
    e.set_defaults(func=cmd_eigenfield)

    h = sub.add_parser("sshift", parents=[common], help="spectral shift function on a mu grid")
    _geometry_args(h)
    h.add_argument("--mu", default="1e-6:1")
    h.add_argument("--points", type=int, default=60)
    h.add_argument("--fit", action="store_true", help="also write the low-energy fit report")
    h.set_defaults(func=cmd_sshift)

    b = sub.add_parser("bem", parents=[common], help="2D boundary-integral solver")
    b.add_argument("bem_cmd", choices=["farfield", "capacity"])
    b.add_argument("--curve", default="circle", choices=["circle", "ellipse", "kite"])
    b.add_argument("--curve-json", default=None)
    b.add_argument("--radius", type=float, default=1.0)
    b.add_argument("--a", type=float, default=2.0)
    b.add_argument("--b", type=float, default=1.0)
    b.add_argument("--lambda", dest="lam", type=float, default=None)
    b.add_argument("--n", type=int, default=256)
    b.add_argument("--angles", type=int, default=256)
    b.add_argument("--incident-angle", type=float, default=0.0)
    b.set_defaults(func=cmd_bem)

    f = sub.add_parser("hahn-fit", parents=[common], help="least-squares Hahn coefficients from a CSV (lam,arg,re,im)")
    f.add_argument("--samples", required=True)
    f.add_argument("--exponents", required=True, help="comma list of alpha:beta, e.g. 0:-1,0:0,1:0")
    f.set_defaults(func=cmd_hahn_fit)
    return ap


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace, argv) -> argparse.Namespace:
    """Fill options not given on the command line from ``--config``."""
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config: {exc}", EXIT_CONFIG)
    if not isinstance(cfg, dict):
        raise CliError("config must be a JSON object", EXIT_CONFIG)
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for k, v in cfg.items():
        key = k.replace("-", "_")
        if not hasattr(args, key):
            raise CliError(f"unknown config key {k!r}", EXIT_CONFIG)
        if key not in given:
            setattr(args, key, v)
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        args = _apply_config(parser, args, argv)
        return int(args.func(args))
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigurationError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HodgeScatterError as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
