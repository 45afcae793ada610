"""The (7,7,7) triangle tiling and the six-rectangle event around a tile.

Builds a patch of the tiling, checks the local structure, validates the six
rectangles around the central tile and counts the tiles whose events can
depend on each other.
"""
from _common import out_path, say
from hypvoronoi.render import render_tiling
from hypvoronoi.tiling import dependency_radius, generate_tiling, log10_p1_threshold, six_rectangles

T = generate_tiling(4)
inner = T.interior_tiles()
say(f"{len(T)} tiles, {len(inner)} interior; interior degrees {sorted({T.degree(int(i)) for i in inner})}")
geom = six_rectangles()
rho, k = dependency_radius(geom)
say(f"dependency radius rho = {rho:.6f}; tiles within 2 rho: k = {k}")
say(f"open-probability threshold for d = 15, k = 1: 10^{log10_p1_threshold(1, 15):.2f}")
path = out_path("tiling.svg")
with open(path, "w") as fh:
    fh.write(render_tiling(T, highlighted=[0], rectangles=geom.rects))
say("wrote", path)
