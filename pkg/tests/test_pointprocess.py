import io
import math

import numpy as np
import pytest
from scipy import stats

from hypvoronoi.geometry import DomainError, HypDisk, Rect, hyp_area
from hypvoronoi.pointprocess import (
    MarkedConfiguration,
    SimulationParams,
    mark,
    read_points_csv,
    remark,
    sample_configuration,
    sample_euclid_ppp,
    sample_hyp_ppp,
    write_points_csv,
)

UNIT = Rect((0, 0), 1, 1, 0.0, "x")


def test_zero_intensity_is_empty():
    assert len(sample_hyp_ppp(0.0, HypDisk((0, 0), 2.0), 1)) == 0
    assert len(sample_euclid_ppp(0.0, UNIT, 1)) == 0


def test_window_outside_disk_rejected():
    with pytest.raises(DomainError):
        sample_hyp_ppp(1.0, Rect((0.5, 0.5), 0.6, 0.6, 0.0, "x"), 0)


def test_hyp_mean_count():
    W = HypDisk((0, 0), math.log(3))
    counts = np.array([len(sample_hyp_ppp(1.0, W, (5, i))) for i in range(10_000)])
    expect = 4 * math.pi / 3
    assert hyp_area(W) == pytest.approx(expect, rel=1e-12)
    assert abs(counts.mean() - expect) < 3 * math.sqrt(expect / len(counts))


def test_hyp_intensity_on_offcenter_rect():
    R = Rect.from_bounds(0.2, -0.1, 0.5, 0.3)
    counts = np.array([len(sample_hyp_ppp(3.0, R, (6, i))) for i in range(4000)])
    expect = 3.0 * hyp_area(R)
    assert abs(counts.mean() - expect) < 3 * math.sqrt(expect / len(counts))


def test_disjoint_regions_uncorrelated():
    W = HypDisk((0, 0), 1.5)
    a, b = [], []
    for i in range(10_000):
        p = sample_hyp_ppp(1.0, W, (7, i))
        a.append(np.sum(p[:, 0] < 0))
        b.append(np.sum(p[:, 0] >= 0))
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_euclid_counts_and_halves():
    counts, left, right = [], [], []
    for i in range(10_000):
        p = sample_euclid_ppp(10.0, UNIT, (8, i))
        counts.append(len(p))
        left.append(int(np.sum(p[:, 0] < 0.5)))
        right.append(int(np.sum(p[:, 0] >= 0.5)))
    counts = np.array(counts)
    assert abs(counts.mean() - 10) < 3 * math.sqrt(10 / len(counts))
    for half in (left, right):
        k = np.arange(12)
        obs = np.array([np.sum(np.array(half) == j) for j in k[:-1]] + [np.sum(np.array(half) >= 11)])
        probs = np.r_[stats.poisson.pmf(k[:-1], 5), stats.poisson.sf(10, 5)]
        assert stats.chisquare(obs, probs * len(half)).pvalue > 0.01
    assert abs(np.corrcoef(left, right)[0, 1]) < 0.05


def test_marks():
    pts = np.random.default_rng(0).random((100_000, 2)) * 0.5
    assert mark(pts, 1.0, 1).black.all()
    assert not mark(pts, 0.0, 1).black.any()
    frac = mark(pts, 0.3, 2).black.mean()
    assert abs(frac - 0.3) < 3 * math.sqrt(0.3 * 0.7 / 1e5)
    with pytest.raises(ValueError):
        mark(pts, 1.5, 0)


def test_remark_monotone():
    c = mark(np.random.default_rng(1).random((500, 2)) * 0.5, 0.4, 3)
    hi = remark(c, 0.6)
    assert np.all(hi.black[c.black])


def test_sample_configuration_deterministic():
    params = SimulationParams(5.0, 0.5, "hyp", HypDisk((0, 0), 2.0), seed=42)
    a, b = sample_configuration(params), sample_configuration(params)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.black, b.black)
    c = sample_configuration(SimulationParams(5.0, 0.5, "hyp", HypDisk((0, 0), 2.0), seed=43))
    assert len(c) != len(a) or not np.array_equal(a.points, c.points)


def test_csv_roundtrip():
    c = mark(np.random.default_rng(4).random((50, 2)) * 0.5, 0.5, 5)
    buf = io.StringIO()
    write_points_csv(c, buf)
    back = read_points_csv(io.StringIO("# provenance line\n" + buf.getvalue()))
    assert np.array_equal(back.points, c.points) and np.array_equal(back.black, c.black)
    with pytest.raises(ValueError):
        read_points_csv(io.StringIO("x,y,color\n0.1,0.1,Q\n"))


def test_configuration_helpers():
    c = MarkedConfiguration(np.zeros((3, 2)) + 0.1, [True, False, True])
    assert c.swapped().black.tolist() == [False, True, False]
    assert len(c.restricted([True, False, False])) == 1
    with pytest.raises(ValueError):
        MarkedConfiguration(np.zeros((3, 2)), [True])
