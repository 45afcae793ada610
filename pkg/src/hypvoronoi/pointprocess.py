"""Poisson point processes on the Poincare disk and the Euclidean plane, plus marking."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .geometry import (
    Circle,
    DiskIsometry,
    DomainError,
    HypDisk,
    Rect,
    density,
    hyp_area,
    repeated_rows,
)
from .rng import make_rng

Window = Union[HypDisk, Rect, Circle]

HYPERBOLIC = "hyperbolic"
EUCLIDEAN = "euclidean"
_METRIC_ALIASES = {"hyp": HYPERBOLIC, "hyperbolic": HYPERBOLIC, "euc": EUCLIDEAN, "euclidean": EUCLIDEAN}


def normalize_metric(metric: str) -> str:
    try:
        return _METRIC_ALIASES[metric]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}") from None


@dataclass(frozen=True)
class SimulationParams:
    lam: float
    p: float
    metric: str = HYPERBOLIC
    window: Optional[Window] = None
    seed: int = 0

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("intensity must be nonnegative")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        object.__setattr__(self, "metric", normalize_metric(self.metric))


@dataclass
class MarkedConfiguration:
    """Finite marked point set. ``black[i]`` is the color of ``points[i]``.

    ``uniforms`` are the per-point U(0,1) draws behind the marks; re-marking
    with a different p via :func:`remark` keeps them, so black sets grow with p.
    """

    points: np.ndarray
    black: np.ndarray
    window: Optional[Window] = None
    params: Optional[SimulationParams] = None
    uniforms: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.black = np.asarray(self.black, dtype=bool).reshape(-1)
        if len(self.black) != len(self.points):
            raise ValueError("marks and points differ in length")

    def __len__(self):
        return len(self.points)

    @property
    def white(self) -> np.ndarray:
        return ~self.black

    def color_mask(self, color: str) -> np.ndarray:
        if color in ("black", "B", True):
            return self.black
        if color in ("white", "W", False):
            return ~self.black
        raise ValueError(f"unknown color {color!r}")

    def swapped(self) -> "MarkedConfiguration":
        return MarkedConfiguration(self.points, ~self.black, self.window, self.params, self.uniforms)

    def restricted(self, mask) -> "MarkedConfiguration":
        mask = np.asarray(mask, dtype=bool)
        u = None if self.uniforms is None else self.uniforms[mask]
        return MarkedConfiguration(self.points[mask], self.black[mask], self.window, self.params, u)

    def transformed(self, iso: DiskIsometry) -> "MarkedConfiguration":
        pts = iso(self.points) if len(self.points) else self.points.copy()
        return MarkedConfiguration(pts, self.black.copy(), None, self.params, self.uniforms)


# --------------------------------------------------------------------------
# windows


def window_contains(window: Window, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if isinstance(window, Rect):
        return window.contains(pts)
    if isinstance(window, HypDisk):
        return window.euclid().contains(pts, strict=False)
    if isinstance(window, Circle):
        return window.contains(pts, strict=False)
    raise TypeError(f"unsupported window {type(window).__name__}")


def _euclid_extent(window: Window) -> float:
    """Largest Euclidean norm reached by the window."""
    if isinstance(window, Rect):
        return window.max_norm()
    circ = window.euclid() if isinstance(window, HypDisk) else window
    return math.hypot(*circ.center) + circ.radius


def check_inside_disk(window: Window) -> None:
    if _euclid_extent(window) >= 1.0:
        raise DomainError("window touches or leaves the unit circle")


def euclid_area(window: Window) -> float:
    if isinstance(window, Rect):
        return window.area()
    circ = window.euclid() if isinstance(window, HypDisk) else window
    return math.pi * circ.radius**2


def _uniform_in(window: Window, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(window, Rect):
        st = rng.random((n, 2))
        return (np.asarray(window.corner) + np.outer(st[:, 0] * window.width, window.u)
                + np.outer(st[:, 1] * window.height, window.v))
    circ = window.euclid() if isinstance(window, HypDisk) else window
    r = circ.radius * np.sqrt(rng.random(n))
    t = 2.0 * math.pi * rng.random(n)
    return np.asarray(circ.center) + np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)


def _max_density(window: Window) -> float:
    s = _euclid_extent(window)
    return 4.0 / (1.0 - s * s) ** 2


def _drop_duplicates(pts: np.ndarray, redraw: Callable[[int], np.ndarray]) -> np.ndarray:
    while len(pts) > 1:
        dup = repeated_rows(pts)
        if len(dup) == 0:
            break
        pts[dup] = redraw(len(dup))
    return pts


# --------------------------------------------------------------------------
# sampling


def sample_inhomogeneous(intensity: Callable[[np.ndarray], np.ndarray], bound: float,
                         window: Window, rng) -> np.ndarray:
    """Poisson process of the given intensity on ``window`` by thinning from ``bound``."""
    rng = make_rng(rng)
    if bound <= 0:
        return np.zeros((0, 2))
    n = rng.poisson(bound * euclid_area(window))
    cand = _uniform_in(window, n, rng)
    keep = rng.random(n) * bound < intensity(cand)
    return cand[keep]


def _sample_centered_disk(lam: float, rho: float, rng) -> np.ndarray:
    area = 2.0 * math.pi * (math.cosh(rho) - 1.0)
    n = rng.poisson(lam * area)
    u = rng.random(n)
    # inverse CDF of the hyperbolic radius: cosh r = 1 + U (cosh rho - 1)
    r = np.arccosh(1.0 + u * (math.cosh(rho) - 1.0))
    s = np.tanh(r / 2.0)
    t = 2.0 * math.pi * rng.random(n)
    return np.stack([s * np.cos(t), s * np.sin(t)], axis=-1)


def sample_hyp_ppp(lam: float, window: Window, seed) -> np.ndarray:
    """Homogeneous hyperbolic Poisson process of intensity ``lam`` on ``window``.

    Hyperbolic disks use exact radial inverse-CDF sampling (moved by an isometry
    when off-center); rectangles and Euclidean disks use thinning against the
    density maximum, which sits at the window point farthest from the origin.
    """
    if lam < 0:
        raise ValueError("intensity must be nonnegative")
    check_inside_disk(window)
    rng = make_rng(seed)
    if lam == 0:
        return np.zeros((0, 2))
    if isinstance(window, HypDisk):
        c = np.asarray(window.center, dtype=float)
        move = DiskIsometry.to_origin(c).inverse() if np.any(c != 0) else None

        def draw(k=None):
            if k is None:
                pts = _sample_centered_disk(lam, window.radius, rng)
            else:
                s = np.tanh(np.arccosh(1.0 + rng.random(k) * (math.cosh(window.radius) - 1.0)) / 2.0)
                t = 2.0 * math.pi * rng.random(k)
                pts = np.stack([s * np.cos(t), s * np.sin(t)], axis=-1)
            return move(pts) if (move is not None and len(pts)) else pts

        return _drop_duplicates(draw(), draw)

    bound = lam * _max_density(window)

    def intensity(u):
        return lam * density(u)

    pts = sample_inhomogeneous(intensity, bound, window, rng)

    def redraw(k):
        out = np.zeros((0, 2))
        while len(out) < k:
            cand = _uniform_in(window, 4 * k, rng)
            cand = cand[rng.random(len(cand)) * bound < intensity(cand)]
            out = np.concatenate([out, cand])
        return out[:k]

    return _drop_duplicates(pts, redraw)


def sample_euclid_ppp(mu: float, window: Window, seed) -> np.ndarray:
    """Homogeneous Euclidean Poisson process of intensity ``mu`` on ``window``."""
    if mu < 0:
        raise ValueError("intensity must be nonnegative")
    rng = make_rng(seed)
    if mu == 0:
        return np.zeros((0, 2))
    n = rng.poisson(mu * euclid_area(window))
    pts = _uniform_in(window, n, rng)
    return _drop_duplicates(pts, lambda k: _uniform_in(window, k, rng))


def sample_ppp(lam: float, metric: str, window: Window, seed) -> np.ndarray:
    if normalize_metric(metric) == HYPERBOLIC:
        return sample_hyp_ppp(lam, window, seed)
    return sample_euclid_ppp(lam, window, seed)


def mark(points, p: float, seed, window: Optional[Window] = None,
         params: Optional[SimulationParams] = None) -> MarkedConfiguration:
    """Independently color each point black with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    u = make_rng(seed).random(len(pts))
    return MarkedConfiguration(pts, u < p, window, params, u)


def remark(config: MarkedConfiguration, p: float) -> MarkedConfiguration:
    """Same points and uniforms, new black probability."""
    if config.uniforms is None:
        raise ValueError("configuration carries no uniforms")
    return MarkedConfiguration(config.points, config.uniforms < p, config.window,
                               config.params, config.uniforms)


def sample_configuration(params: SimulationParams, window: Optional[Window] = None) -> MarkedConfiguration:
    """Sample points on the window and mark them; one Philox stream per stage."""
    window = window if window is not None else params.window
    if window is None:
        raise ValueError("no sampling window given")
    pts = sample_ppp(params.lam, params.metric, window, make_rng(params.seed, 0))
    return mark(pts, params.p, make_rng(params.seed, 1), window, params)


# --------------------------------------------------------------------------
# CSV point files: header x,y,color with colors B/W


def write_points_csv(config: MarkedConfiguration, fh=None, extra: Optional[dict] = None) -> str:
    """Write ``x,y,color`` rows (plus any extra per-point columns); returns the text."""
    buf = io.StringIO()
    cols = ["x", "y", "color"] + list(extra or {})
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for i, (x, y) in enumerate(config.points):
        row = [repr(float(x)), repr(float(y)), "B" if config.black[i] else "W"]
        row += [extra[k][i] for k in (extra or {})]
        w.writerow(row)
    text = buf.getvalue()
    if fh is not None:
        if isinstance(fh, (str, bytes)) or hasattr(fh, "__fspath__"):
            with open(fh, "w", newline="") as f:
                f.write(text)
        else:
            fh.write(text)
    return text


def read_points_csv(fh) -> MarkedConfiguration:
    if isinstance(fh, (str, bytes)) or hasattr(fh, "__fspath__"):
        with open(fh, newline="") as f:
            return read_points_csv(f)
    rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    pts = np.array([[float(r["x"]), float(r["y"])] for r in rows]).reshape(-1, 2)
    colors = [r["color"].strip().upper() for r in rows]
    bad = set(colors) - {"B", "W"}
    if bad:
        raise ValueError(f"unknown colors {sorted(bad)}")
    return MarkedConfiguration(pts, np.array([c == "B" for c in colors], dtype=bool))
