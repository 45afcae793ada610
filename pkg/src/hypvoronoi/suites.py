"""Invariant suites run by ``hypvoronoi verify``; each returns (passed, total)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coupling import CouplingSpec, build_coupling, verify_domination
from .geometry import HypDisk, Rect
from .oracles import brute_delaunay_faces, closure_components, raster_cross
from .percolation import cluster_labels, cross, crossing_duality
from .pointprocess import MarkedConfiguration, sample_ppp
from .rng import make_rng
from .tiling import generate_tiling, six_rectangles, validate_separation
from .voronoi import boundary_uncertain, euclid_adjacent, hyp_adjacent, voronoi_complex


class InvariantViolation(AssertionError):
    """An internal invariant failed; the CLI maps this to exit code 2."""


@dataclass
class SuiteResult:
    name: str
    passed: int
    total: int

    @property
    def ok(self) -> bool:
        return self.passed == self.total


def _config(rng, lam, window, metric="euc", p=0.5):
    pts = sample_ppp(lam, metric, window, rng)
    return MarkedConfiguration(pts, rng.random(len(pts)) < p, window)


def duality_suite(n: int = 50, seed: int = 0) -> SuiteResult:
    sq = Rect((0.0, 0.0), 1.0, 1.0, 0.0, "x")
    ok = 0
    for i in range(n):
        rng = make_rng(seed, 1, i)
        cfg = _config(rng, 30.0, sq.dilate(0.3))
        black_lr, white_tb = crossing_duality(sq, cfg)
        ok += bool(black_lr) != bool(white_tb)
    return SuiteResult("duality", ok, n)


def raster_suite(n: int = 20, seed: int = 0, res: int = 600) -> SuiteResult:
    R = Rect((0.0, 0.0), 2.0, 1.0, 0.0, "long")
    ok = 0
    for i in range(n):
        rng = make_rng(seed, 2, i)
        cfg = _config(rng, 15.0, R.dilate(0.5))
        ok += cross(R, cfg) == raster_cross(R, cfg.points, cfg.black, "black", res)
    return SuiteResult("crossing-vs-raster", ok, n)


def delaunay_suite(n: int = 20, seed: int = 0) -> SuiteResult:
    ok = 0
    for i in range(n):
        pts = make_rng(seed, 3, i).random((25, 2))
        faces = {tuple(sorted(f)) for f in voronoi_complex(pts).faces.tolist()}
        ok += faces == brute_delaunay_faces(pts)
    return SuiteResult("delaunay-vs-brute", ok, n)


def cluster_suite(n: int = 20, seed: int = 0) -> SuiteResult:
    ok = 0
    for i in range(n):
        rng = make_rng(seed, 4, i)
        pts = rng.random((60, 2))
        black = rng.random(60) < 0.5
        vc = voronoi_complex(pts)
        lab = cluster_labels(MarkedConfiguration(pts, black), vc, "black")
        ours = sorted(sorted(np.flatnonzero(lab == v).tolist()) for v in np.unique(lab[black]))
        ok += ours == closure_components(60, vc.edges.tolist(), black)
    return SuiteResult("cluster-vs-closure", ok, n)


def adjacency_suite(n: int = 5, seed: int = 0) -> SuiteResult:
    ok = total = 0
    window = HypDisk((0.0, 0.0), 2.5)
    for i in range(n):
        pts = sample_ppp(2.0, "hyp", window, make_rng(seed, 5, i))
        if len(pts) < 3:
            continue
        vc = voronoi_complex(pts)
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                if boundary_uncertain(a, b, vc, window):
                    continue
                total += 1
                ok += euclid_adjacent(a, b, vc) == hyp_adjacent(a, b, pts)
    return SuiteResult("adjacency-metric-invariance", ok, total)


def coupling_suite(n: int = 100, seed: int = 0) -> SuiteResult:
    ok = 0
    for i in range(n):
        spec = CouplingSpec.random(make_rng(seed, 6, i))
        window = spec.A.dilate(0.1 * spec.A.width)
        ok += verify_domination(build_coupling(spec, window, make_rng(seed, 7, i)), spec.A)
    return SuiteResult("coupling-domination", ok, n)


def tiling_suite() -> SuiteResult:
    T = generate_tiling(6)
    checks = [all(T.degree(int(t)) == 15 for t in T.interior_tiles()),
              bool(np.all(T.vertex_tile_counts()[T.interior_vertices()] == 7)),
              len(T.interior_tiles()) > 0,
              bool(validate_separation(six_rectangles()))]
    return SuiteResult("tiling-structure", sum(checks), len(checks))


SUITES = {
    "duality": duality_suite,
    "raster": raster_suite,
    "delaunay": delaunay_suite,
    "cluster": cluster_suite,
    "adjacency": adjacency_suite,
    "coupling": coupling_suite,
    "tiling": tiling_suite,
}


def run_all(seed: int = 0, names=None, log=None):
    out = []
    for name in names or SUITES:
        fn = SUITES[name]
        res = fn() if name == "tiling" else fn(seed=seed)
        out.append(res)
        if log is not None:
            print(f"{res.name}: {res.passed}/{res.total} {'ok' if res.ok else 'FAIL'}", file=log)
    return out
