"""Monte Carlo harness: crossing and local-event probabilities, p_c proxies, sweeps.

Replicate i of an experiment with master seed s always uses the stream
derived from (s, i), so estimates do not depend on the order or the number
of worker processes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.stats import norm

from .geometry import Circle, DomainError, HypDisk, Rect, hyp_distance
from .percolation import (
    DEFAULT_DIVISOR,
    DilatedRegion,
    coloring_determined,
    cross,
    grid_squares,
)
from .pointprocess import (
    EUCLIDEAN,
    HYPERBOLIC,
    MarkedConfiguration,
    check_inside_disk,
    normalize_metric,
    sample_ppp,
)
from .rng import derive_seed, make_rng
from .voronoi import voronoi_complex

VERSION = "0.1.0"


def wilson_interval(k: int, n: int, level: float = 0.95):
    if n <= 0:
        raise ValueError("n must be positive")
    z = norm.ppf(0.5 + level / 2.0)
    ph = k / n
    den = 1.0 + z * z / n
    mid = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, min(ph, mid - half))
    hi = 1.0 if k == n else min(1.0, max(ph, mid + half))
    return lo, hi


@dataclass
class ExperimentRecord:
    kind: str
    params: dict
    n: int
    successes: int
    estimate: float
    ci: tuple
    seed: int
    undetermined: int = 0
    wall_time: float = 0.0
    truncated: bool = False
    version: str = VERSION
    outcomes: Optional[list] = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a record needs at least one replicate")
        if not (0.0 <= self.estimate <= 1.0 and self.ci[0] <= self.estimate <= self.ci[1]):
            raise ValueError("estimate outside its interval")

    @classmethod
    def from_outcomes(cls, kind, params, outcomes, seed, undetermined=0, wall_time=0.0, truncated=False):
        outcomes = [bool(x) for x in outcomes]
        n, k = len(outcomes), int(sum(outcomes))
        return cls(kind, params, n, k, k / n, wilson_interval(k, n), seed, undetermined, wall_time,
                   truncated, VERSION, outcomes)

    def overlaps(self, other: "ExperimentRecord") -> bool:
        return self.ci[0] <= other.ci[1] and other.ci[0] <= self.ci[1]

    def to_dict(self, outcomes: bool = False) -> dict:
        d = asdict(self)
        d["ci"] = list(self.ci)
        if not outcomes:
            d.pop("outcomes")
        return d


# --------------------------------------------------------------------------
# parameter descriptors


def rect_to_dict(R: Rect) -> dict:
    return {"corner": [float(R.corner[0]), float(R.corner[1])], "width": R.width, "height": R.height,
            "angle": R.angle, "axis": R.axis}


def rect_from_dict(d: dict) -> Rect:
    return Rect(tuple(d["corner"]), float(d["width"]), float(d["height"]), float(d.get("angle", 0.0)),
                d.get("axis", "long"))


def window_to_dict(w) -> dict:
    if isinstance(w, Rect):
        return {"type": "rect", **rect_to_dict(w)}
    if isinstance(w, HypDisk):
        return {"type": "hypdisk", "center": list(w.center), "radius": w.radius}
    return {"type": "circle", "center": list(w.center), "radius": w.radius}


def window_from_dict(d: dict):
    t = d["type"]
    if t == "rect":
        return rect_from_dict(d)
    if t == "hypdisk":
        return HypDisk(tuple(d["center"]), float(d["radius"]))
    return Circle(tuple(d["center"]), float(d["radius"]))


# --------------------------------------------------------------------------
# running replicates


def _run_replicates(fn: Callable, args: list, jobs: int = 1, deadline: Optional[float] = None):
    """Map fn over args in index order; stops early (returning a prefix) past the deadline."""
    out = []
    if jobs <= 1:
        for a in args:
            out.append(fn(a))
            if deadline is not None and time.time() > deadline:
                break
        return out
    chunk = max(1, jobs * 4)
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        for start in range(0, len(args), chunk):
            out.extend(ex.map(fn, args[start:start + chunk]))
            if deadline is not None and time.time() > deadline:
                break
    return out


def _crossing_replicate(a):
    lam, p, metric, window, rect, seed, i, color = a
    pts = sample_ppp(lam, metric, window, make_rng(seed, i, 0))
    u = make_rng(seed, i, 1).random(len(pts))
    if len(pts) == 0:
        return False, False
    cfg = MarkedConfiguration(pts, u < p, window)
    vc = voronoi_complex(pts)
    decided = coloring_determined(rect, vc, window)
    return bool(cross(rect, cfg, color, vc)), decided


def crossing_window(rect: Rect, margin: float, metric: str):
    window = rect.dilate(margin) if margin > 0 else rect
    if normalize_metric(metric) == HYPERBOLIC:
        check_inside_disk(window)
    return window


def estimate_crossing(lam: float, p: float, metric: str, rect: Rect, margin: float, n: int, seed: int,
                      jobs: int = 1, color: str = "black", window=None,
                      max_seconds: Optional[float] = None) -> ExperimentRecord:
    """Fraction of n independent samples with a crossing of ``rect``.

    Points are drawn on ``rect`` dilated by ``margin`` (or on ``window``).
    Replicates whose coloring of the rectangle could still depend on points
    outside the window are counted in ``undetermined``.
    """
    metric = normalize_metric(metric)
    if n < 1:
        raise ValueError("n must be positive")
    window = crossing_window(rect, margin, metric) if window is None else window
    t0 = time.time()
    deadline = None if max_seconds is None else t0 + max_seconds
    args = [(lam, p, metric, window, rect, seed, i, color) for i in range(n)]
    res = _run_replicates(_crossing_replicate, args, jobs, deadline)
    params = {"lam": lam, "p": p, "metric": metric, "rect": rect_to_dict(rect), "margin": margin,
              "window": window_to_dict(window), "color": color}
    return ExperimentRecord.from_outcomes("crossing", params, [r[0] for r in res], seed,
                                          sum(not r[1] for r in res), time.time() - t0, len(res) < n)


# --------------------------------------------------------------------------
# local event


@dataclass
class SquareMasses:
    """Grid squares inside A_delta with their intensity masses (rows stored compactly)."""

    pitch: float
    rows: np.ndarray
    first: np.ndarray
    last: np.ndarray
    lam: float
    metric: str

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.last - self.first + 1)])

    @property
    def count(self) -> int:
        return int(self.offsets[-1])

    def corners(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        off = self.offsets
        k = np.searchsorted(off, idx, side="right") - 1
        col = self.first[k] + idx - off[k]
        return np.stack([col * self.pitch, self.rows[k] * self.pitch], axis=-1)

    def masses(self, idx) -> np.ndarray:
        """lam times the integral of the density over each square (2x2 Gauss rule)."""
        c = self.corners(idx)
        s = self.pitch
        if self.metric == EUCLIDEAN:
            return np.full(len(c), self.lam * s * s)
        g = (1 - 1 / math.sqrt(3)) / 2, (1 + 1 / math.sqrt(3)) / 2
        tot = 0.0
        for gx in g:
            for gy in g:
                x = c[:, 0] + gx * s
                y = c[:, 1] + gy * s
                tot = tot + 4.0 / (1.0 - x * x - y * y) ** 2
        return self.lam * s * s * tot / 4.0

    def chunks(self, size: int = 2_000_000):
        n = self.count
        for a in range(0, n, size):
            yield np.arange(a, min(n, a + size))


def square_masses(A, delta: float, lam: float, metric: str = HYPERBOLIC,
                  divisor: int = DEFAULT_DIVISOR) -> SquareMasses:
    metric = normalize_metric(metric)
    region = A if isinstance(A, DilatedRegion) else DilatedRegion(A, delta)
    if metric == HYPERBOLIC and region.max_norm() >= 1.0:
        raise DomainError("the dilated region leaves the disk")
    s, rows, first, last = grid_squares(region, divisor)
    sm = SquareMasses(s, rows, first, last, lam, metric)
    if sm.count == 0:
        raise ValueError("no grid square fits inside the dilated region")
    return sm


def local_prob_analytic(A, delta: float, lam: float, metric: str = HYPERBOLIC,
                        divisor: int = DEFAULT_DIVISOR) -> float:
    """Product over grid squares of P(square nonempty) = 1 - exp(-mass)."""
    sm = square_masses(A, delta, lam, metric, divisor)
    if lam == 0:
        return 0.0
    logp = 0.0
    for idx in sm.chunks():
        logp += _log_nonempty(sm.masses(idx))
        if logp == -np.inf:
            return 0.0
    return math.exp(logp)


def _log_nonempty(masses: np.ndarray) -> float:
    return float(np.sum(np.log1p(-np.exp(-masses))))


def _min_mass(sm: SquareMasses) -> float:
    return float(min(sm.masses(idx).min() for idx in sm.chunks()))


def sample_empty_squares(sm: SquareMasses, rng, m_min: Optional[float] = None) -> np.ndarray:
    """Indices of the squares left empty by one Poisson sample.

    Squares are empty independently with probability exp(-mass). Candidates
    are drawn at the largest of these probabilities and then thinned, which is
    exact and costs time proportional to the number of candidates.
    """
    rng = make_rng(rng)
    m_min = _min_mass(sm) if m_min is None else m_min
    q = math.exp(-m_min)
    N = sm.count
    K = rng.binomial(N, q)
    if K == 0:
        return np.zeros(0, dtype=np.int64)
    if K > N // 4:
        out = []
        for idx in sm.chunks():
            e = idx[rng.random(len(idx)) < np.exp(-sm.masses(idx))]
            out.append(e)
        return np.concatenate(out)
    cand = np.sort(rng.choice(N, size=K, replace=False))
    keep = rng.random(K) * q < np.exp(-sm.masses(cand))
    return cand[keep]


def _hyp_ball_inside(u, D, delta) -> np.ndarray:
    """Is the hyperbolic ball B_H(u, D) inside the Euclidean ball B(u, delta)?"""
    s = np.hypot(*u.T)
    a = np.arctanh(s)
    hi = np.tanh(a + D / 2.0) - s
    lo = s - np.tanh(a - D / 2.0)
    return np.maximum(hi, lo) < delta


def _points_in_squares(corners, pitch, rng, metric) -> np.ndarray:
    """One point per square with density proportional to the intensity (rejection)."""
    out = np.empty_like(corners)
    todo = np.arange(len(corners))
    while len(todo):
        cand = corners[todo] + rng.random((len(todo), 2)) * pitch
        if metric == EUCLIDEAN:
            ok = np.ones(len(todo), dtype=bool)
        else:
            far = corners[todo] + pitch * (np.sign(corners[todo]) > 0)
            fmax = 4.0 / (1.0 - np.einsum("ij,ij->i", far, far)) ** 2
            fmax = np.maximum(fmax, 4.0 / (1.0 - np.einsum("ij,ij->i", far - pitch, far - pitch)) ** 2)
            ok = rng.random(len(todo)) * fmax < 4.0 / (1.0 - np.einsum("ij,ij->i", cand, cand)) ** 2
        out[todo[ok]] = cand[ok]
        todo = todo[~ok]
    return out


def probe_points_check(A, delta: float, sm: SquareMasses, rng, pitch: Optional[float] = None):
    """Check the coverage and locality conclusions on a probe grid of A, given the event.

    Each probe's own grid square holds a point (drawn from the conditional
    law); that point is within one square diagonal of the probe. If the
    hyperbolic ball through it around the probe lies inside B(u, delta), the
    hyperbolic nearest point of the whole configuration is within delta.
    Returns (coverage violations, locality violations, probes).
    """
    from .percolation import probe_grid

    pitch = delta / 100 if pitch is None else pitch
    probes = probe_grid(A, pitch)
    s = sm.pitch
    corners = np.floor(probes / s) * s
    z = _points_in_squares(corners, s, make_rng(rng), sm.metric)
    d_e = np.hypot(*(z - probes).T)
    cov = int(np.sum(d_e >= delta))
    if sm.metric == EUCLIDEAN:
        return cov, 0, len(probes)
    D0 = hyp_distance(probes, z)
    loc = int(np.sum(~_hyp_ball_inside(probes, D0, delta)))
    return cov, loc, len(probes)


@dataclass
class LocalEstimate:
    record: ExperimentRecord
    analytic: float
    coverage_violations: int = 0
    locality_violations: int = 0
    probes_checked: int = 0


def estimate_local_prob(A, delta: float, lam: float, metric: str = HYPERBOLIC, n: int = 1000, seed: int = 0,
                        divisor: int = DEFAULT_DIVISOR, check_probes: bool = False,
                        probe_pitch: Optional[float] = None) -> LocalEstimate:
    """Monte Carlo estimate of P(local(A, delta)) with the product formula alongside."""
    metric = normalize_metric(metric)
    sm = square_masses(A, delta, lam, metric, divisor)
    t0 = time.time()
    params = {"A": _region_desc(A), "delta": delta, "lam": lam, "metric": metric, "divisor": divisor,
              "squares": sm.count}
    if lam == 0:
        rec = ExperimentRecord.from_outcomes("local", params, [False] * n, seed, 0, time.time() - t0)
        return LocalEstimate(rec, 0.0)
    m_min = _min_mass(sm)
    outcomes = []
    cov = loc = probes = 0
    for i in range(n):
        rng = make_rng(seed, i)
        ok = len(sample_empty_squares(sm, rng, m_min)) == 0
        outcomes.append(ok)
        if ok and check_probes:
            c, l, k = probe_points_check(A, delta, sm, rng, probe_pitch)
            cov += c
            loc += l
            probes += k
    rec = ExperimentRecord.from_outcomes("local", params, outcomes, seed, 0, time.time() - t0)
    return LocalEstimate(rec, local_prob_analytic(A, delta, lam, metric, divisor), cov, loc, probes)


def local_threshold_lambda(A, delta: float, target: float = 0.99, metric: str = HYPERBOLIC,
                           divisor: int = DEFAULT_DIVISOR) -> float:
    """Smallest lam (to 0.1%) whose product-formula probability reaches ``target``."""
    sm = square_masses(A, delta, 1.0, metric, divisor)
    unit = np.concatenate([sm.masses(idx) for idx in sm.chunks()])

    def prob(lam):
        return math.exp(sum(_log_nonempty(lam * unit[a:a + 2_000_000]) for a in range(0, len(unit), 2_000_000)))

    lo, hi = 0.0, 1.0
    while prob(hi) < target:
        lo, hi = hi, hi * 2.0
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        if prob(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _region_desc(A):
    if isinstance(A, Rect):
        return {"type": "rect", **rect_to_dict(A)}
    if isinstance(A, (Circle, HypDisk)):
        return window_to_dict(A)
    return {"type": "polygon", "vertices": np.asarray(A).tolist()}


# --------------------------------------------------------------------------
# critical probability proxies


def _crossing_threshold(rect: Rect, pts: np.ndarray, u: np.ndarray, vc) -> float:
    """Smallest p at which the black long crossing appears, for fixed points and uniforms."""
    order = np.sort(u)
    if not cross(rect, MarkedConfiguration(pts, u <= order[-1]), "black", vc):
        return 1.0
    lo, hi = -1, len(order) - 1  # cross fails at lo (none black), holds at hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cross(rect, MarkedConfiguration(pts, u <= order[mid]), "black", vc):
            hi = mid
        else:
            lo = mid
    return float(order[hi])


def _reach_threshold(pts, u, vc, radius: float) -> float:
    """Smallest p at which the black cluster of the cell at o reaches a site beyond ``radius``."""
    from .percolation import cluster

    z0 = int(np.argmin(np.hypot(*pts.T)))
    far = np.hypot(*pts.T) >= radius
    if not np.any(far):
        return 1.0
    order = np.sort(u)

    def hit(k):
        black = u <= order[k]
        if not black[z0]:
            return False
        c = cluster(MarkedConfiguration(pts, black), vc, "black", z0)
        return bool(np.any(far[c]))

    lo = int(np.searchsorted(order, u[z0])) - 1
    hi = len(order) - 1
    if not hit(hi):
        return 1.0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if hit(mid):
            hi = mid
        else:
            lo = mid
    return float(order[hi])


def _threshold_replicate(a):
    lam, metric, window, proxy, target, seed, i = a
    pts = sample_ppp(lam, metric, window, make_rng(seed, i, 0))
    u = make_rng(seed, i, 1).random(len(pts))
    if len(pts) < 3:
        return 1.0
    vc = voronoi_complex(pts)
    if proxy == "crossing":
        return _crossing_threshold(target, pts, u, vc)
    return _reach_threshold(pts, u, vc, target)


@dataclass
class PcEstimate:
    lam: float
    bracket: tuple
    estimate: float
    proxy: dict
    iterations: list
    thresholds: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"lam": self.lam, "bracket": list(self.bracket), "estimate": self.estimate,
                "proxy": self.proxy, "iterations": self.iterations}


def default_pc_setup(metric: str, lam: float, proxy: str = "crossing"):
    """Window and target used by :func:`estimate_pc` when none is given.

    Hyperbolic: a square centered at o inside the Euclidean disk of radius
    0.97 (for the reach proxy the target is the circle of radius 0.9).
    Euclidean: a square of side 6 / sqrt(lam) in a window with margin one side.
    """
    if normalize_metric(metric) == HYPERBOLIC:
        window = Circle((0.0, 0.0), 0.97)
        if proxy == "crossing":
            a = 0.6
            return window, Rect((-a, -a), 2 * a, 2 * a, 0.0, "x")
        return window, 0.9
    side = 6.0 / math.sqrt(lam)
    if proxy == "crossing":
        R = Rect((0.0, 0.0), side, side, 0.0, "x")
        return R.dilate(side), R
    return Circle((0.0, 0.0), side * 1.5), side


def estimate_pc(lam: float, metric: str = HYPERBOLIC, proxy: str = "crossing", tol: float = 0.01, n: int = 200,
                seed: int = 0, window=None, target=None, level: float = 0.5, jobs: int = 1) -> PcEstimate:
    """Bisection on p for the level crossing of a monotone proxy probability.

    Each replicate keeps its points and per-point uniforms for every p, so its
    event indicator is monotone in p and is summarized by the p at which it
    switches on. The proxy probability at p is the fraction of replicates
    switched on by p. Proxies: ``"crossing"`` (square crossing, level 1/2)
    and ``"reach"`` (black cluster of the cell at o reaching the target radius).
    """
    metric = normalize_metric(metric)
    if proxy not in ("crossing", "reach"):
        raise ValueError("proxy must be 'crossing' or 'reach'")
    if window is None or target is None:
        w0, t0 = default_pc_setup(metric, lam, proxy)
        window = w0 if window is None else window
        target = t0 if target is None else target
    if metric == HYPERBOLIC:
        check_inside_disk(window)
    args = [(lam, metric, window, proxy, target, seed, i) for i in range(n)]
    th = np.array(_run_replicates(_threshold_replicate, args, jobs))
    lo, hi = 0.0, 1.0
    its = []
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        k = int(np.sum(th <= mid))
        ci = wilson_interval(k, n)
        its.append({"p": mid, "estimate": k / n, "ci": list(ci)})
        if k / n >= level:
            hi = mid
        else:
            lo = mid
    desc = {"proxy": proxy, "level": level, "window": window_to_dict(window),
            "target": rect_to_dict(target) if isinstance(target, Rect) else target, "n": n, "seed": seed}
    return PcEstimate(lam, (lo, hi), 0.5 * (lo + hi), desc, its, th)


def monotone_indicator_check(lam, p_lo, p_hi, metric, rect, margin, n, seed) -> bool:
    """Per-replicate crossing at p_lo implies crossing at p_hi (shared uniforms)."""
    window = crossing_window(rect, margin, metric)
    for i in range(n):
        pts = sample_ppp(lam, metric, window, make_rng(seed, i, 0))
        if len(pts) == 0:
            continue
        u = make_rng(seed, i, 1).random(len(pts))
        vc = voronoi_complex(pts)
        if cross(rect, MarkedConfiguration(pts, u < p_lo), "black", vc) and \
                not cross(rect, MarkedConfiguration(pts, u < p_hi), "black", vc):
            return False
    return True


# --------------------------------------------------------------------------
# sweeps

CSV_COLUMNS = ["experiment_id", "kind", "lam", "p", "metric", "n", "successes", "estimate", "ci_lo", "ci_hi",
               "undetermined", "truncated", "seed", "cell_seed"]


def load_manifest(path_or_dict) -> dict:
    if isinstance(path_or_dict, dict):
        return dict(path_or_dict)
    with open(path_or_dict) as fh:
        return json.load(fh)


def _cell_key(cell: dict) -> str:
    return json.dumps(cell, sort_keys=True)


def sweep(manifest, out_dir: str, jobs: int = 1, log=sys.stderr) -> List[dict]:
    """Run every (lam, p) cell of the manifest grid; resumable and append-only.

    Results go to ``<id>_results.csv`` (fixed columns, preceded by ``#``
    provenance lines) and ``<id>_results.json`` (full records). Cells already
    present in the JSON file are not recomputed.
    """
    m = load_manifest(manifest)
    exp_id = m.get("experiment_id", "sweep")
    kind = m.get("kind", "crossing")
    grid = m.get("grid", {})
    lams = list(grid.get("lam", []))
    ps = list(grid.get("p", [None] if kind == "local" else []))
    seed = int(m.get("seed", 0))
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, f"{exp_id}_results.json")
    csv_path = os.path.join(out_dir, f"{exp_id}_results.csv")
    done = {}
    if os.path.exists(json_path):
        with open(json_path) as fh:
            for rec in json.load(fh).get("records", []):
                done[rec["cell_key"]] = rec
    records = []
    cells = [(a, b) for a in lams for b in ps]
    for ci, (lam, p) in enumerate(cells):
        cell = {"kind": kind, "lam": lam, "p": p, "index": ci}
        key = _cell_key(cell)
        if key in done:
            records.append(done[key])
            continue
        cell_seed = derive_seed(seed, ci)
        print(f"[{exp_id}] cell {ci + 1}/{len(cells)} lam={lam} p={p}", file=log)
        rec = _run_cell(m, kind, lam, p, cell_seed, jobs)
        row = {"cell_key": key, "experiment_id": exp_id, "cell_seed": cell_seed, "seed": seed,
               "record": rec}
        records.append(row)
        done[key] = row
        _write_json_atomic(json_path, {"provenance": provenance(m), "records": records})
    _write_json_atomic(json_path, {"provenance": provenance(m), "records": records})
    _write_csv(csv_path, m, records)
    return records


def _run_cell(m: dict, kind: str, lam, p, cell_seed: int, jobs: int) -> dict:
    metric = m.get("metric", "euc")
    n = int(m.get("n", 100))
    cap = m.get("max_seconds")
    if kind == "crossing":
        rect = rect_from_dict(m["rect"])
        rec = estimate_crossing(lam, p, metric, rect, float(m.get("margin", 0.0)), n, cell_seed, jobs,
                                max_seconds=cap)
        return rec.to_dict()
    if kind == "local":
        A = rect_from_dict(m["region"])
        est = estimate_local_prob(A, float(m["delta"]), lam, metric, n, cell_seed,
                                  int(m.get("divisor", DEFAULT_DIVISOR)))
        d = est.record.to_dict()
        d["analytic"] = est.analytic
        return d
    if kind == "pc":
        est = estimate_pc(lam, metric, m.get("proxy", "crossing"), float(m.get("tol", 0.01)), n, cell_seed,
                          jobs=jobs)
        d = est.to_dict()
        k = int(np.sum(est.thresholds <= est.estimate))
        d.update({"kind": "pc", "n": n, "successes": k, "estimate_p": est.estimate, "estimate": k / n,
                  "ci": list(wilson_interval(k, n)), "undetermined": 0, "truncated": False})
        return d
    raise ValueError(f"unknown experiment kind {kind!r}")


def provenance(m: dict) -> dict:
    return {"version": VERSION, "config": m, "seed": m.get("seed", 0)}


def _write_json_atomic(path: str, obj) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
    os.replace(tmp, path)


def _write_csv(path: str, m: dict, records: List[dict]) -> None:
    buf = io.StringIO()
    buf.write(f"# version: {VERSION}\n")
    buf.write(f"# config: {json.dumps(m, sort_keys=True)}\n")
    buf.write(f"# master_seed: {m.get('seed', 0)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in records:
        r = row["record"]
        params = r.get("params", {})
        w.writerow([row["experiment_id"], r.get("kind", m.get("kind")), params.get("lam", r.get("lam")),
                    params.get("p", ""), params.get("metric", m.get("metric", "")), r["n"], r["successes"],
                    repr(float(r["estimate"])), repr(float(r["ci"][0])), repr(float(r["ci"][1])),
                    r.get("undetermined", 0), int(bool(r.get("truncated", False))), row["seed"], row["cell_seed"]])
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)
