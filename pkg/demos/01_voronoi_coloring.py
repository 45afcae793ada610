"""A hyperbolic Poisson-Voronoi coloring and one rectangle crossing.

Samples points of intensity lam in a hyperbolic disk, colors each cell black
with probability p, decides whether the black cells cross a rectangle and
draws the picture with the crossing path on top.
"""
import numpy as np

from _common import out_path, say
from hypvoronoi import HypDisk, Rect, cross, mark, render_voronoi, sample_hyp_ppp, voronoi_complex

lam, p, seed = 6.0, 0.6, 4
window = HypDisk((0.0, 0.0), 3.0)
R = Rect((-0.4, -0.2), 0.8, 0.4)

config = mark(sample_hyp_ppp(lam, window, seed), p, seed + 1)
vc = voronoi_complex(config.points)
res = cross(R, config, complex_=vc, witness=True)
say(f"{len(config)} sites, {int(config.black.sum())} black, {len(vc.edges)} Delaunay edges")
say(f"black crossing of the rectangle: {res.decision}")
if res.decision:
    say(f"crossing path through {len(res.witness.sites)} cells")

svg = render_voronoi(config, vc, rectangles=[R], witness=res.witness if res.decision else None)
path = out_path("voronoi_coloring.svg")
with open(path, "w") as fh:
    fh.write(svg)
say("wrote", path)
