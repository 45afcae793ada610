import math

import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from hypvoronoi.geometry import HypDisk, hyp_distance, triangle_angles
from hypvoronoi.pointprocess import MarkedConfiguration, mark, sample_hyp_ppp
from hypvoronoi.tiling import (
    T_O,
    GeometryError,
    block_field,
    closed_event,
    dependency_radius,
    dependent_percolation_run,
    generate_tiling,
    log10_p1_threshold,
    p1_threshold,
    path_bound,
    six_rectangles,
    tile_blocks,
    validate_separation,
    white_blocking_check,
)

LN9 = 2.19722457733621938279  # 2 artanh(0.8), mpmath


@pytest.fixture(scope="module")
def tiling6():
    return generate_tiling(6)


def test_depth_zero():
    T = generate_tiling(0)
    assert len(T) == 1 and len(T.adjacency) == 0
    assert np.allclose(T.tiles[0].vertices, T_O)
    assert np.allclose(T.tiles[0].iso(T_O), T_O, atol=1e-14)


def test_depth_one_neighbors_are_reflections():
    T = generate_tiling(1)
    assert len(T) == 4 and T.degree(0) == 3
    for t in T.tiles[1:]:
        shared = sum(np.min(np.hypot(*(t.vertices[:, None] - T_O[None]).T), axis=0) < 1e-12)
        assert shared == 2
        assert np.allclose(triangle_angles(t.vertices), 2 * math.pi / 7, atol=1e-9)


def test_interior_degrees(tiling6):
    T = tiling6
    assert len(T) == 115
    inner = T.interior_tiles()
    assert len(inner) == 22
    assert all(T.degree(int(t)) == 15 for t in inner)
    counts = T.vertex_tile_counts()
    assert np.all(counts[T.interior_vertices()] == 7) and counts.max() == 7


def test_tiles_are_isometric(tiling6):
    for t in tiling6.tiles:
        assert np.allclose(np.sort(np.hypot(*t.iso(t.vertices).T)), np.hypot(*T_O.T), atol=1e-9)
        assert np.allclose(t.iso(t.center[None]), 0, atol=1e-12)


def test_locate(tiling6):
    T = tiling6
    centers = T.centers
    assert np.array_equal(T.locate(centers), np.arange(len(T)))


def test_rho_two_formulas():
    g = six_rectangles()
    s = g.r + g.delta
    assert g.rho == pytest.approx(math.acosh(1 + 2 * s * s / (1 - s * s)), abs=1e-12)
    assert g.rho == pytest.approx(LN9, abs=1e-12)


def test_dependency_count():
    g = six_rectangles()
    rho, k = dependency_radius(g)
    assert k == 544
    # area of B_H(2 rho) over the area pi/7 of one tile
    approx = 2 * math.pi * (math.cosh(2 * rho) - 1) / (math.pi / 7)
    assert abs(k - approx) / approx < 0.05


def test_validator():
    g = six_rectangles()
    assert validate_separation(g)
    for th in (0.1, 0.7, 2.0):
        assert validate_separation(g.rotated(th))
    with pytest.raises(GeometryError, match="no separating annulus"):
        six_rectangles(length=0.3)
    ok, why = validate_separation(six_rectangles(r=0.6, validate=False), explain=True)
    assert not ok and "B(o, r)" in why
    ok, why = validate_separation(six_rectangles(apothem=0.3, validate=False), explain=True)
    assert not ok


def test_p1_thresholds():
    assert p1_threshold(1, 2) == pytest.approx(2.0**-3, rel=1e-14)
    assert p1_threshold(1, 15) == pytest.approx(15.0**-16, rel=1e-12)
    assert log10_p1_threshold(1, 15) == pytest.approx(-18.8174601448909, abs=1e-10)
    assert log10_p1_threshold(544, 15) == -math.inf and p1_threshold(544, 15) == 0.0
    assert log10_p1_threshold(200, 15) < -1e200
    vals = [p1_threshold(k, 3) for k in range(1, 6)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        p1_threshold(0, 15)


def test_path_bound_decays():
    d, k = 3, 1
    p1 = 0.5 * p1_threshold(k, d)
    b = [path_bound(l, d, k, p1) for l in (1, 10, 100)]
    assert b[0] > b[1] > b[2]


def test_dependent_percolation(tiling6):
    T = tiling6
    n = len(T)
    all_open = dependent_percolation_run(T, np.ones(n, bool))
    assert all_open.largest == n and all_open.touches_boundary
    none = dependent_percolation_run(T, np.zeros(n, bool))
    assert none.largest == 0
    st = np.zeros(n, bool)
    st[T.interior_tiles()[:1]] = True
    one = dependent_percolation_run(T, st)
    assert one.largest == 1 and not one.touches_boundary


def test_block_field_is_k_dependent(tiling6):
    T = tiling6
    m = 1
    blocks = tile_blocks(T, m)
    dist = shortest_path(T.graph(), unweighted=True, directed=False)
    same = blocks[:, None] == blocks[None, :]
    assert np.all(dist[same] <= 2 * m)
    f = block_field(T, 0.5, m, 3, blocks)
    assert np.all((f[:, None] == f[None, :]) | ~same)
    assert np.array_equal(f, block_field(T, 0.5, m, 3))


@pytest.mark.slow
def test_closed_event_invariance_and_blocking():
    g = six_rectangles()
    T = generate_tiling(1)
    tile = T.tiles[2]
    W = HypDisk(tuple(tile.center), g.rho + 0.05)
    c = mark(sample_hyp_ppp(40000, W, 1), 0.75, 11)
    c = MarkedConfiguration(c.points, c.black, W)
    r = closed_event(tile, c, g, 6, detail=True)
    c0 = MarkedConfiguration(tile.iso(c.points), c.black, HypDisk((0, 0), g.rho + 0.049))
    r0 = closed_event(T.tiles[0], c0, g, 6, detail=True)
    assert (r.decision, r.local, r.crossings) == (r0.decision, r0.local, r0.crossings)
    assert r.decision
    b = white_blocking_check(r.points, r.black, g, divisor=6)
    assert not b.escaped and b.start_sites > 0
    # the same points all white cannot be closed
    all_white = MarkedConfiguration(c.points, np.zeros(len(c), bool), W)
    assert not closed_event(tile, all_white, g, 6)


def test_closed_event_window_check():
    g = six_rectangles()
    tile = generate_tiling(0).tiles[0]
    from hypvoronoi.percolation import MarginError
    with pytest.raises(MarginError):
        closed_event(tile, MarkedConfiguration(np.zeros((1, 2)), [True], HypDisk((0, 0), 1.0)), g)
    far = MarkedConfiguration(np.array([[0.0, 0.0]]), [True], HypDisk((0, 0), g.rho + 0.1))
    assert not closed_event(tile, far, g)
    assert hyp_distance((0, 0), (0.8, 0)) == pytest.approx(g.rho, abs=1e-12)
