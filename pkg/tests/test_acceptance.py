"""Acceptance criteria 1-9, each printing one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or as a script
(``python tests/test_acceptance.py``); the slow criteria carry the ``slow`` mark.
"""
import math
import sys
import time

import numpy as np
import pytest
from scipy import integrate

from hypvoronoi import experiments as ex
from hypvoronoi.coupling import (
    CouplingSpec,
    build_coupling,
    continuity_scale,
    coupling_intensities,
    region_contains,
    verify_domination,
)
from hypvoronoi.geometry import Circle, HypDisk, Rect, hyp_area, hyp_circle_to_euclid, hyp_distance
from hypvoronoi.percolation import crossing_duality
from hypvoronoi.pointprocess import MarkedConfiguration, sample_ppp
from hypvoronoi.rng import make_rng
from hypvoronoi.suites import adjacency_suite, cluster_suite, delaunay_suite, raster_suite
from hypvoronoi.tiling import (
    closed_event,
    generate_tiling,
    six_rectangles,
    validate_separation,
    white_blocking_check,
)

pytestmark = pytest.mark.slow

LAMS = [1, 4, 16, 64]


def report(num, ok, detail, capsys=None):
    line = f"C{num} {'PASS' if ok else 'FAIL'}: {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    assert ok, line


def _trend_ok(records):
    """Consecutive estimates never drop unless their intervals overlap."""
    return all(b.estimate >= a.estimate or a.overlaps(b) for a, b in zip(records, records[1:]))


def _fmt_records(records):
    return ", ".join(f"lam={r.params['lam']}: {r.estimate:.3f} [{r.ci[0]:.3f},{r.ci[1]:.3f}]" for r in records)


# ----------------------------------------------------------------------------


def test_c1_self_duality(capsys):
    t0 = time.time()
    sq = Rect((0.0, 0.0), 1.0, 1.0, 0.0, "x")
    margin, n, seed = 0.5, 2000, 101
    rec = ex.estimate_crossing(4.0, 0.5, "euc", sq, margin, n, seed)
    W = sq.dilate(margin)
    exceptions = 0
    for i in range(n):
        pts = sample_ppp(4.0, "euc", W, make_rng(seed, i, 0))
        u = make_rng(seed, i, 1).random(len(pts))
        black_lr, white_tb = crossing_duality(sq, MarkedConfiguration(pts, u < 0.5, W))
        exceptions += bool(black_lr) == bool(white_tb)
    dt = time.time() - t0
    ok = 0.47 <= rec.estimate <= 0.53 and exceptions == 0 and dt <= 300
    report(1, ok, f"estimate {rec.estimate:.4f} CI [{rec.ci[0]:.3f},{rec.ci[1]:.3f}], "
                  f"XOR exceptions {exceptions}/{n}, {dt:.0f}s", capsys)


def test_c2_euclidean_crossing_limit(capsys):
    t0 = time.time()
    R = Rect((0.0, 0.0), 2.0, 1.0)
    recs = [ex.estimate_crossing(lam, 0.6, "euc", R, 0.25, 500, 200 + k) for k, lam in enumerate(LAMS)]
    dt = time.time() - t0
    ok = _trend_ok(recs) and recs[-1].estimate >= 0.9 and dt <= 1200
    report(2, ok, f"{_fmt_records(recs)}; trend {_trend_ok(recs)}, {dt:.0f}s", capsys)


def test_c3_hyperbolic_crossing_limit(capsys):
    t0 = time.time()
    R = Rect((-0.5, -0.25), 1.0, 0.5)
    assert R.max_norm() < 0.6
    recs = [ex.estimate_crossing(lam, 0.6, "hyp", R, 0.15, 500, 300 + k) for k, lam in enumerate(LAMS)]
    dt = time.time() - t0
    ok = _trend_ok(recs) and recs[-1].estimate >= 0.9 and dt <= 1800
    report(3, ok, f"{_fmt_records(recs)}; trend {_trend_ok(recs)}, {dt:.0f}s", capsys)


def test_c4_adjacency_metric_invariance(capsys):
    t0 = time.time()
    res = adjacency_suite(200, seed=400)
    dt = time.time() - t0
    ok = res.ok and res.total > 0 and dt <= 600
    report(4, ok, f"{res.total - res.passed} mismatches over {res.total} unflagged pairs in 200 configurations, "
                  f"{dt:.0f}s", capsys)


def test_c5_coupling(capsys):
    t0 = time.time()
    dominated = phi_zero = 0
    for i in range(1000):
        spec = CouplingSpec.random(make_rng(500, i))
        window = spec.A.dilate(0.1 * spec.A.width)
        dominated += verify_domination(build_coupling(spec, window, make_rng(501, i)), spec.A)
        x0, y0, x1, y1 = spec.A.bounds()
        g = np.stack(np.meshgrid(np.linspace(x0, x1, 21), np.linspace(y0, y1, 21)), -1).reshape(-1, 2)
        I = coupling_intensities(spec, g)
        phi_zero += bool(np.all(I["P1"] == 0.0) and np.all(I["P1w"] == 0.0))
    # marginal counts on A for a fixed spec
    r, p, q = 0.5, 0.6, 0.55
    t, _ = continuity_scale(r, p, q)
    spec = CouplingSpec(r, p, q, Rect((0.2, 0.1), 0.6 * t, 0.6 * t, 0.0, "x"), 3000.0)
    A, m = spec.A, 4000
    counts = {"tilde_black": [], "black": [], "white": [], "tilde_white": []}
    for i in range(m):
        s = build_coupling(spec, A.dilate(0.01 * A.width), make_rng(502, i))
        for key, pts in (("tilde_black", s.Z_tilde_b), ("black", s.Z_b), ("white", s.Z_w),
                         ("tilde_white", s.Z_tilde_w)):
            counts[key].append(int(np.sum(region_contains(A, pts))) if len(pts) else 0)
    area, hyp = A.width * A.height, hyp_area(A)
    expect = {"tilde_black": q * spec.mu * area, "tilde_white": (1 - q) * spec.mu * area,
              "black": p * spec.lam * hyp, "white": (1 - p) * spec.lam * hyp}
    z = {k: (np.mean(counts[k]) - v) / math.sqrt(v / m) for k, v in expect.items()}
    dt = time.time() - t0
    ok = dominated == 1000 and phi_zero == 1000 and all(abs(v) < 3 for v in z.values()) and dt <= 300
    report(5, ok, f"domination {dominated}/1000, phi1=psi1=0 on grid {phi_zero}/1000, count z-scores "
                  + ", ".join(f"{k} {v:+.2f}" for k, v in z.items()) + f", {dt:.0f}s", capsys)


def test_c6_local_event_limit(capsys):
    t0 = time.time()
    A = Rect((-0.1, -0.1), 0.2, 0.2, 0.0, "x")
    delta, div, n = 0.05, 1000, 300
    lam99 = ex.local_threshold_lambda(A, delta, 0.99, "hyp", div)
    lams = [ex.local_threshold_lambda(A, delta, tgt, "hyp", div) for tgt in (0.3, 0.7)] + [lam99]
    lines, agree, viol, probes = [], 0, 0, 0
    for k, lam in enumerate(lams):
        est = ex.estimate_local_prob(A, delta, lam, "hyp", n, 600 + k, div, check_probes=True)
        lo, hi = est.record.ci
        agree += lo <= est.analytic <= hi
        viol += est.coverage_violations + est.locality_violations
        probes += est.probes_checked
        lines.append(f"lam={lam:.4g}: MC {est.record.estimate:.3f} [{lo:.3f},{hi:.3f}] vs formula {est.analytic:.4f}")
    final = ex.estimate_local_prob(A, delta, lam99, "hyp", 1000, 610, div)
    dt = time.time() - t0
    ok = agree == 3 and final.record.estimate >= 0.99 and viol == 0 and dt <= 600
    report(6, ok, "; ".join(lines) + f"; at lam={lam99:.4g} MC {final.record.estimate:.3f} (n=1000); "
                  f"probe violations {viol} over {probes} probes, {dt:.0f}s", capsys)


def test_c7_pc_trend(capsys):
    t0 = time.time()
    est = [ex.estimate_pc(lam, "hyp", "crossing", tol=0.005, n=2000, seed=700 + k)
           for k, lam in enumerate([0.5, 2, 8])]
    e = [x.estimate for x in est]
    gaps = [0.5 - v for v in e]
    inc = all(b > a for a, b in zip(e, e[1:]))
    below = all(v < 0.5 for v in e)
    shrink = all(abs(b) < abs(a) for a, b in zip(gaps, gaps[1:]))
    dt = time.time() - t0
    ok = inc and below and shrink and dt <= 7200
    report(7, ok, "estimates " + ", ".join(f"lam={x.lam}: {x.estimate:.4f}" for x in est)
           + f"; increasing {inc}, all < 1/2 {below}, gap shrinking {shrink}, {dt:.0f}s", capsys)


def test_c8_tiling_structure(capsys):
    t0 = time.time()
    T = generate_tiling(6)
    inner = T.interior_tiles()
    deg_ok = len(inner) > 0 and all(T.degree(int(t)) == 15 for t in inner)
    vert_ok = bool(np.all(T.vertex_tile_counts()[T.interior_vertices()] == 7))
    geom = six_rectangles()
    sep_ok = bool(validate_separation(geom))
    tile = generate_tiling(0).tiles[0]
    W = Circle((0.0, 0.0), geom.r + geom.delta)
    lam, p, div = 32000.0, 0.75, 6
    closed = attempts = escapes = 0
    while closed < 200:
        pts = sample_ppp(lam, "hyp", W, make_rng(800, attempts, 0))
        u = make_rng(800, attempts, 1).random(len(pts))
        attempts += 1
        r = closed_event(tile, MarkedConfiguration(pts, u < p, W), geom, div, detail=True)
        if not r.decision:
            continue
        closed += 1
        escapes += white_blocking_check(r.points, r.black, geom, divisor=div).escaped
    dt = time.time() - t0
    ok = deg_ok and vert_ok and sep_ok and escapes == 0 and dt <= 1800
    report(8, ok, f"{len(inner)} interior tiles of degree 15 {deg_ok}, 7 per interior vertex {vert_ok}, "
                  f"separation {sep_ok}; white escapes {escapes} in {closed} closed samples "
                  f"({attempts} drawn, lam={lam:g}, p={p}, grid delta/{div}), {dt:.0f}s", capsys)


def _fit_circle(center, radius, k=60):
    """Least-squares circle through points found by bisection at hyperbolic distance ``radius``."""
    pts = []
    c = np.asarray(center, dtype=float)
    for a in np.linspace(0, 2 * np.pi, k, endpoint=False):
        d = np.array([math.cos(a), math.sin(a)])
        lo, hi = 0.0, 1.0 - math.hypot(*c) - 1e-15
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if hyp_distance(c, c + mid * d) < radius else (lo, mid)
        pts.append(c + lo * d)
    pts = np.array(pts)
    M = np.c_[2 * pts, np.ones(len(pts))]
    sol, *_ = np.linalg.lstsq(M, np.sum(pts ** 2, axis=1), rcond=None)
    return sol[:2], math.sqrt(sol[2] + sol[0] ** 2 + sol[1] ** 2)


def test_c9_oracles(capsys):
    t0 = time.time()
    ras = raster_suite(100, seed=900)
    dela = delaunay_suite(50, seed=900)
    clu = cluster_suite(50, seed=900)
    rng = np.random.default_rng(901)
    worst = 0.0
    # distance: arsinh form vs arcosh form
    u = 0.9 * rng.random((2000, 2)) - 0.45
    v = 0.9 * rng.random((2000, 2)) - 0.45
    arc = np.arccosh(1 + 2 * np.sum((u - v) ** 2, 1) / ((1 - np.sum(u * u, 1)) * (1 - np.sum(v * v, 1))))
    worst = max(worst, float(np.max(np.abs(hyp_distance(u, v) - arc))))
    # area: closed form vs adaptive quadrature of the density
    for _ in range(20):
        x0, y0 = rng.uniform(-0.5, 0.3, 2)
        w, h = rng.uniform(0.05, 0.2, 2)
        quad, _ = integrate.dblquad(lambda y, x: 4 / (1 - x * x - y * y) ** 2, x0, x0 + w, y0, y0 + h,
                                    epsabs=1e-12, epsrel=1e-12)
        worst = max(worst, abs(hyp_area(Rect.from_bounds(x0, y0, x0 + w, y0 + h)) - quad))
    # hyperbolic circles: closed form vs least-squares fit
    for _ in range(5):
        c = rng.uniform(-0.4, 0.4, 2)
        rad = rng.uniform(0.1, 1.0)
        fc, fr = _fit_circle(c, rad)
        got = hyp_circle_to_euclid(tuple(c), rad)
        worst = max(worst, float(np.max(np.abs(np.asarray(got.center) - fc))), abs(got.radius - fr))
    dt = time.time() - t0
    ok = ras.ok and dela.ok and clu.ok and worst <= 1e-8 and dt <= 600
    report(9, ok, f"raster {ras.passed}/{ras.total}, Delaunay {dela.passed}/{dela.total}, clusters "
                  f"{clu.passed}/{clu.total}, geometry max error {worst:.1e}, {dt:.0f}s", capsys)


if __name__ == "__main__":
    failed = 0
    for fn in [test_c1_self_duality, test_c2_euclidean_crossing_limit, test_c3_hyperbolic_crossing_limit,
               test_c4_adjacency_metric_invariance, test_c5_coupling, test_c6_local_event_limit,
               test_c7_pc_trend, test_c8_tiling_structure, test_c9_oracles]:
        try:
            fn(None)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
