import io
import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypvoronoi import experiments as ex
from hypvoronoi.geometry import Rect
from hypvoronoi.percolation import DilatedRegion, cross, local_event
from hypvoronoi.pointprocess import MarkedConfiguration, sample_euclid_ppp
from hypvoronoi.rng import make_rng
from hypvoronoi.voronoi import voronoi_complex

R21 = Rect((0, 0), 2, 1)


def test_wilson_known_values():
    lo, hi = ex.wilson_interval(5, 10)
    assert (lo, hi) == pytest.approx((0.236593, 0.763407), abs=1e-6)
    lo, hi = ex.wilson_interval(0, 10)
    assert lo == 0.0 and hi == pytest.approx(0.277533, abs=1e-6)
    with pytest.raises(ValueError):
        ex.wilson_interval(0, 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 2000), st.floats(0, 1))
def test_wilson_properties(n, frac):
    k = int(round(frac * n))
    lo, hi = ex.wilson_interval(k, n)
    assert 0 <= lo <= k / n <= hi <= 1
    lo2, hi2 = ex.wilson_interval(n - k, n)
    assert lo2 == pytest.approx(1 - hi, abs=1e-12) and hi2 == pytest.approx(1 - lo, abs=1e-12)
    if k < n:
        assert ex.wilson_interval(k + 1, n)[0] >= lo


def test_wilson_coverage():
    rng = np.random.default_rng(0)
    for p in (0.1, 0.5, 0.8):
        k = rng.binomial(200, p, 4000)
        hit = np.mean([lo <= p <= hi for lo, hi in (ex.wilson_interval(int(x), 200) for x in k)])
        assert 0.93 <= hit <= 0.97


def test_record_validation_and_overlap():
    a = ex.ExperimentRecord.from_outcomes("crossing", {}, [True] * 9 + [False], 1)
    b = ex.ExperimentRecord.from_outcomes("crossing", {}, [True] * 8 + [False] * 2, 1)
    c = ex.ExperimentRecord.from_outcomes("crossing", {}, [False] * 10, 1)
    assert a.estimate == 0.9 and a.overlaps(b) and not a.overlaps(c)
    assert "outcomes" not in a.to_dict() and len(a.to_dict(outcomes=True)["outcomes"]) == 10
    with pytest.raises(ValueError):
        ex.ExperimentRecord("x", {}, 0, 0, 0.0, (0, 0), 0)


def test_descriptor_roundtrip():
    R = Rect((0.1, -0.2), 0.4, 0.2, 0.3, "x")
    assert ex.rect_from_dict(json.loads(json.dumps(ex.rect_to_dict(R)))) == R
    from hypvoronoi.geometry import Circle, HypDisk
    for w in (R, HypDisk((0.1, 0.0), 0.5), Circle((0, 0), 0.9)):
        back = ex.window_from_dict(ex.window_to_dict(w))
        assert type(back) is type(w)


def test_crossing_extremes():
    assert ex.estimate_crossing(20, 1.0, "euc", R21, 0.5, 30, 1).estimate == 1.0
    assert ex.estimate_crossing(20, 0.0, "euc", R21, 0.5, 30, 1).estimate == 0.0
    zero = ex.estimate_crossing(0, 0.7, "euc", R21, 0.5, 10, 1)
    assert zero.estimate == 0.0 and zero.undetermined == 10


def test_crossing_reproducible_and_parallel():
    a = ex.estimate_crossing(10, 0.5, "euc", R21, 0.5, 40, 7)
    b = ex.estimate_crossing(10, 0.5, "euc", R21, 0.5, 40, 7, jobs=2)
    assert a.outcomes == b.outcomes and 0 < a.estimate < 1


def test_crossing_matches_direct_loop():
    # independent route: draw the replicates by hand from the same seed streams
    rec = ex.estimate_crossing(15, 0.55, "euc", R21, 0.5, 25, 3)
    W = R21.dilate(0.5)
    direct = []
    for i in range(25):
        pts = sample_euclid_ppp(15, W, make_rng(3, i, 0))
        u = make_rng(3, i, 1).random(len(pts))
        direct.append(bool(cross(R21, MarkedConfiguration(pts, u < 0.55, W))))
    assert rec.outcomes == direct


def test_crossing_hyperbolic_window_checked():
    with pytest.raises(Exception):
        ex.estimate_crossing(5, 0.5, "hyp", Rect((0.5, 0), 0.6, 0.3), 0.1, 2, 0)


def test_local_prob_analytic_vs_direct_sampling():
    A = Rect((0.0, 0.0), 0.2, 0.1, 0.0, "x")
    delta, div = 0.05, 4
    lam = ex.local_threshold_lambda(A, delta, 0.5, "euc", div)
    analytic = ex.local_prob_analytic(A, delta, lam, "euc", div)
    assert analytic == pytest.approx(0.5, abs=0.01)
    reg = DilatedRegion(A, delta)
    x0, y0, x1, y1 = reg.bounds()
    W = Rect.from_bounds(x0, y0, x1, y1, axis="x")
    hits = [local_event(A, delta, sample_euclid_ppp(lam, W, (11, i)), div) for i in range(1000)]
    sd = math.sqrt(analytic * (1 - analytic) / 1000)
    assert abs(np.mean(hits) - analytic) < 4 * sd
    mc = ex.estimate_local_prob(A, delta, lam, "euc", 1000, 12, div)
    assert abs(mc.record.estimate - analytic) < 4 * sd


def test_local_prob_hyperbolic_mc_and_probes():
    A = Rect((0.1, 0.0), 0.1, 0.1, 0.0, "x")
    delta, div = 0.03, 5
    lam = ex.local_threshold_lambda(A, delta, 0.6, "hyp", div)
    est = ex.estimate_local_prob(A, delta, lam, "hyp", 400, 4, div, check_probes=True)
    lo, hi = est.record.ci
    assert lo - 0.03 <= est.analytic <= hi + 0.03
    assert est.probes_checked > 0
    assert est.coverage_violations == 0 and est.locality_violations == 0


def test_local_prob_zero_lambda():
    A = Rect((0.1, 0.0), 0.1, 0.1, 0.0, "x")
    est = ex.estimate_local_prob(A, 0.03, 0.0, "hyp", 10, 0, 5)
    assert est.record.estimate == 0.0 and est.analytic == 0.0


def test_crossing_threshold_vs_scan():
    W = R21.dilate(0.5)
    for i in range(8):
        pts = sample_euclid_ppp(12, W, (21, i))
        u = make_rng(21, i, 1).random(len(pts))
        vc = voronoi_complex(pts)
        th = ex._crossing_threshold(R21, pts, u, vc)
        scan = 1.0
        for t in np.sort(u):
            if cross(R21, MarkedConfiguration(pts, u <= t), "black", vc):
                scan = t
                break
        assert th == scan


def test_estimate_pc_euclidean():
    est = ex.estimate_pc(40, "euc", n=120, seed=1, tol=0.01)
    lo, hi = est.bracket
    assert hi - lo <= 0.01 and lo <= est.estimate <= hi
    assert 0.35 < est.estimate < 0.65
    k = np.sum(est.thresholds <= hi)
    assert k / 120 >= 0.5
    assert ex.monotone_indicator_check(20, 0.4, 0.6, "euc", R21, 0.5, 20, 2)
    with pytest.raises(ValueError):
        ex.estimate_pc(10, "euc", proxy="nope", n=2)


def _manifest(**kw):
    m = {"experiment_id": "t", "kind": "crossing", "metric": "euc", "n": 8, "seed": 5,
         "rect": ex.rect_to_dict(R21), "margin": 0.5, "grid": {"lam": [5, 10], "p": [0.4, 0.6]}}
    m.update(kw)
    return m


def test_sweep_empty_grid(tmp_path):
    recs = ex.sweep(_manifest(grid={"lam": [], "p": []}), str(tmp_path), log=io.StringIO())
    assert recs == []
    lines = (tmp_path / "t_results.csv").read_text().splitlines()
    assert [l for l in lines if not l.startswith("#")] == [",".join(ex.CSV_COLUMNS)]


def test_sweep_grid_and_resume(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    recs = ex.sweep(_manifest(), str(a), log=io.StringIO())
    assert len(recs) == 4
    assert len({r["cell_seed"] for r in recs}) == 4
    ex.sweep(_manifest(), str(b), jobs=2, log=io.StringIO())
    csv_a = (a / "t_results.csv").read_bytes()
    assert csv_a == (b / "t_results.csv").read_bytes()
    log = io.StringIO()
    ex.sweep(_manifest(), str(a), log=log)
    assert log.getvalue() == ""
    assert (a / "t_results.csv").read_bytes() == csv_a
    assert not any(p.endswith(".tmp") for p in os.listdir(a))
    body = [l for l in csv_a.decode().splitlines() if not l.startswith("#")]
    assert len(body) == 5


def test_sweep_unknown_kind(tmp_path):
    with pytest.raises(ValueError):
        ex.sweep(_manifest(kind="bogus"), str(tmp_path), log=io.StringIO())
