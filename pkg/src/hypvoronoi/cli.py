"""Command-line interface.

Configuration comes from an optional JSON manifest; inline flags override it.
Machine output goes to stdout or files (always preceded by a ``#``
provenance header), progress to stderr. Exit codes: 0 success, 1 domain or
configuration error, 2 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import List, Optional

import numpy as np

from . import experiments as ex
from .coupling import CouplingSpec, build_coupling, continuity_scale, verify_domination
from .geometry import Circle, HypDisk, Rect
from .percolation import DEFAULT_DIVISOR, cross
from .pointprocess import HYPERBOLIC, MarkedConfiguration, normalize_metric, sample_ppp, write_points_csv
from .render import RenderOptions, figure_filename, render_rectangles, render_tiling, render_voronoi, write_svg
from .rng import make_rng
from .suites import InvariantViolation, run_all
from .tiling import (
    closed_event,
    generate_tiling,
    six_rectangles,
    validate_separation,
    white_blocking_check,
)
from .voronoi import voronoi_complex

COMMANDS = ("sample", "cross", "couple", "tiling", "closed-event", "pc", "sweep", "render", "verify")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hypvoronoi", description="Voronoi percolation in the hyperbolic plane.")
    p.add_argument("--version", action="version", version=ex.VERSION)
    sub = p.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}", parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--manifest")
        s.add_argument("--seed", type=int)
        s.add_argument("--out")
        s.add_argument("--jobs", type=int)
        s.add_argument("--lambda", dest="lam", type=float)
        s.add_argument("--p", type=float)
        s.add_argument("--metric", choices=["hyp", "euc"])
        s.add_argument("--n", type=int)
        s.add_argument("-v", "--verbose", action="store_true")
        if name in ("tiling", "render"):
            s.add_argument("--depth", type=int)
        if name == "render":
            s.add_argument("--figure", choices=["voronoi", "voronoi-euclidean", "tiling", "rectangles", "subdivision"])
        if name == "closed-event":
            s.add_argument("--divisor", type=int)
        if name == "cross":
            s.add_argument("--witness", action="store_true")
        if name == "pc":
            s.add_argument("--proxy", choices=["crossing", "reach"])
    return p


def effective_config(args) -> dict:
    cfg = {}
    if args.manifest:
        with open(args.manifest) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise UsageError("manifest must be a JSON object")
    for key in ("seed", "out", "jobs", "lam", "p", "metric", "n", "depth", "figure", "divisor", "proxy"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "witness", False):
        cfg["witness"] = True
    cfg.setdefault("seed", 0)
    cfg.setdefault("experiment_id", args.command.replace("-", "_"))
    return cfg


def _header(cfg: dict) -> str:
    return (f"# version: {ex.VERSION}\n# master_seed: {cfg['seed']}\n"
            f"# config: {json.dumps(cfg, sort_keys=True)}\n")


class _Out:
    """Writes provenance then results to stdout, or to a file under --out."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.dir = cfg.get("out")
        if self.dir:
            os.makedirs(self.dir, exist_ok=True)
        sys.stdout.write(_header(cfg))

    def emit(self, name: str, text: str, header: bool = True):
        if self.dir:
            path = os.path.join(self.dir, name)
            with open(path, "w", newline="\n") as fh:
                fh.write((_header(self.cfg) if header else "") + text)
            print(f"wrote {path}", file=sys.stderr)
        else:
            sys.stdout.write(text)

    def result(self, obj: dict):
        sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _window(cfg: dict, default):
    w = cfg.get("window")
    return ex.window_from_dict(w) if w else default


def _rect(cfg: dict, key: str = "rect", default: Optional[Rect] = None) -> Rect:
    if key in cfg:
        return ex.rect_from_dict(cfg[key])
    if default is None:
        raise UsageError(f"manifest needs a {key!r} entry")
    return default


def _metric(cfg):
    return normalize_metric(cfg.get("metric", "hyp"))


def _require(cfg, *keys):
    for k in keys:
        if k not in cfg:
            raise UsageError(f"missing parameter {k!r} (flag or manifest)")


def cmd_sample(cfg, out):
    _require(cfg, "lam", "p")
    metric = _metric(cfg)
    default = HypDisk((0.0, 0.0), 3.0) if metric == HYPERBOLIC else Rect((0.0, 0.0), 1.0, 1.0, 0.0, "x")
    window = _window(cfg, default)
    pts = sample_ppp(cfg["lam"], metric, window, make_rng(cfg["seed"], 0))
    u = make_rng(cfg["seed"], 1).random(len(pts))
    config = MarkedConfiguration(pts, u < cfg["p"], window)
    out.emit(f"{cfg['experiment_id']}_points.csv", write_points_csv(config))
    print(f"{len(pts)} points", file=sys.stderr)


def cmd_cross(cfg, out):
    _require(cfg, "lam", "p")
    metric = _metric(cfg)
    R = _rect(cfg, default=Rect((-0.2, -0.1), 0.4, 0.2, 0.0, "long") if metric == HYPERBOLIC
              else Rect((0.0, 0.0), 2.0, 1.0, 0.0, "long"))
    margin = float(cfg.get("margin", 0.1 if metric == HYPERBOLIC else 0.5))
    window = _window(cfg, ex.crossing_window(R, margin, metric))
    pts = sample_ppp(cfg["lam"], metric, window, make_rng(cfg["seed"], 0))
    u = make_rng(cfg["seed"], 1).random(len(pts))
    config = MarkedConfiguration(pts, u < cfg["p"], window)
    if len(pts) == 0:
        raise UsageError("the sample is empty; no coloring to test")
    res = cross(R, config, cfg.get("color", "black"), witness=True)
    rec = res.to_record()
    if not cfg.get("witness"):
        rec.pop("witness")
    rec["points"] = len(pts)
    out.result(rec)


def cmd_couple(cfg, out):
    lam = cfg.get("lam", 1e5)
    r, p, q = cfg.get("r", 0.5), cfg.get("p", 0.6), cfg.get("p_new", 0.55)
    if "A" in cfg:
        A = ex.rect_from_dict(cfg["A"])
    else:
        t, _ = continuity_scale(r, p, q)
        side = t / 2.0
        A = Rect((0.1, 0.1), side, side, 0.0, "x")
    spec = CouplingSpec(r, p, q, A, lam)
    window = _window(cfg, A.dilate(0.1 * A.width))
    sample = build_coupling(spec, window, make_rng(cfg["seed"]))
    ok = verify_domination(sample, A)
    out.emit(f"{cfg['experiment_id']}_processes.csv", sample.to_csv())
    out.result({"domination": ok, "mu": spec.mu, "t": spec.t, "delta_abs": spec.delta_abs,
                "counts": {k: int(len(v)) for k, v in sample.processes.items()}})
    if not ok:
        raise InvariantViolation("coupling domination failed")


def cmd_tiling(cfg, out):
    T = generate_tiling(int(cfg.get("depth", 4)), cfg.get("max_radius"))
    out.emit(f"{cfg['experiment_id']}_tiling.json", T.to_json() + "\n", header=False)
    interior = T.interior_tiles()
    degs = sorted({T.degree(int(i)) for i in interior})
    vc = sorted(set(T.vertex_tile_counts()[T.interior_vertices()].tolist()))
    out.result({"tiles": len(T), "interior_tiles": int(len(interior)), "interior_degrees": degs,
                "interior_vertex_counts": vc})


def cmd_closed_event(cfg, out):
    _require(cfg, "lam", "p")
    geom = six_rectangles()
    ok, why = validate_separation(geom, explain=True)
    if not ok:
        raise UsageError(why)
    window = HypDisk((0.0, 0.0), geom.rho)
    t0 = time.time()
    pts = sample_ppp(cfg["lam"], HYPERBOLIC, window, make_rng(cfg["seed"], 0))
    u = make_rng(cfg["seed"], 1).random(len(pts))
    config = MarkedConfiguration(pts, u < cfg["p"], window)
    divisor = int(cfg.get("divisor", DEFAULT_DIVISOR))
    res = closed_event(generate_tiling(0).tiles[0], config, geom, divisor, detail=True)
    rec = {"closed": res.decision, "local": res.local, "crossings": res.crossings, "points": len(pts),
           "divisor": divisor}
    if res.decision:
        b = white_blocking_check(res.points, res.black, geom, divisor=divisor)
        rec["white_escape"] = b.escaped
        if b.escaped:
            raise InvariantViolation("white path escaped although closed(T_o) holds")
    rec["seconds"] = round(time.time() - t0, 3)
    out.result(rec)


def cmd_pc(cfg, out):
    _require(cfg, "lam")
    est = ex.estimate_pc(cfg["lam"], _metric(cfg), cfg.get("proxy", "crossing"), float(cfg.get("tol", 0.01)),
                         int(cfg.get("n", 200)), cfg["seed"], jobs=int(cfg.get("jobs", 1)))
    out.result(est.to_dict())


def cmd_sweep(cfg, out):
    if "grid" not in cfg:
        raise UsageError("sweep needs a manifest with a 'grid' entry")
    manifest = {k: v for k, v in cfg.items() if k not in ("out", "jobs")}
    recs = ex.sweep(manifest, cfg.get("out") or ".", int(cfg.get("jobs", 1)))
    out.result({"cells": len(recs), "csv": os.path.join(cfg.get("out") or ".", f"{cfg['experiment_id']}_results.csv")})


def cmd_render(cfg, out):
    kind = cfg.get("figure", "voronoi")
    opt = RenderOptions(size=int(cfg.get("size", 600)))
    if kind.startswith("voronoi"):
        lam, p = cfg.get("lam", 2.0), cfg.get("p", 0.5)
        window = _window(cfg, HypDisk((0.0, 0.0), float(cfg.get("radius", 4.0))))
        pts = sample_ppp(lam, HYPERBOLIC, window, make_rng(cfg["seed"], 0))
        u = make_rng(cfg["seed"], 1).random(len(pts))
        config = MarkedConfiguration(pts, u < p, window)
        if kind == "voronoi-euclidean":
            opt = RenderOptions(size=opt.size, metric="euclidean")
        svg = render_voronoi(config, None, opt)
    elif kind == "tiling":
        T = generate_tiling(int(cfg.get("depth", 5)))
        svg = render_tiling(T, [0], six_rectangles().rects if cfg.get("rectangles", True) else (), opt)
    elif kind == "rectangles":
        T = generate_tiling(1)
        svg = render_tiling(T, [0], six_rectangles().rects, opt)
    else:
        from .percolation import subdivide_rectangle
        R = _rect(cfg, default=Rect((0.0, 0.0), 6.0, 2.0, 0.0, "long"))
        svg = render_rectangles(subdivide_rectangle(R, float(cfg.get("s", 1.0))), opt, outline=R)
    out.emit(figure_filename(cfg["experiment_id"], kind), svg, header=False)


def cmd_verify(cfg, out):
    res = run_all(cfg["seed"], log=sys.stderr)
    out.result({r.name: {"passed": r.passed, "total": r.total} for r in res})
    bad = [r.name for r in res if not r.ok]
    if bad:
        raise InvariantViolation("failed suites: " + ", ".join(bad))


HANDLERS = {"sample": cmd_sample, "cross": cmd_cross, "couple": cmd_couple, "tiling": cmd_tiling,
            "closed-event": cmd_closed_event, "pc": cmd_pc, "sweep": cmd_sweep, "render": cmd_render,
            "verify": cmd_verify}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("a subcommand is required")
        cfg = effective_config(args)
        out = _Out(cfg)
        HANDLERS[args.command](cfg, out)
        sys.stdout.flush()
        return 0
    except InvariantViolation as e:
        print(f"internal invariant violated: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))
