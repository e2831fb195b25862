"""Writes an unstructured Delaunay mesh of the unit square in mesh2d v1 format."""
import sys

import numpy as np
from scipy.spatial import Delaunay


def main(path, n_side=6, n_interior=40, seed=7):
    rng = np.random.default_rng(seed)
    s = np.linspace(0.0, 1.0, n_side + 1)
    boundary = [(x, 0.0) for x in s[:-1]] + [(1.0, y) for y in s[:-1]]
    boundary += [(x, 1.0) for x in s[:0:-1]] + [(0.0, y) for y in s[:0:-1]]
    pts = list(boundary)
    h = 1.0 / n_side
    while len(pts) < len(boundary) + n_interior:
        p = rng.uniform(0.08, 0.92, size=2)
        if min(np.hypot(*(p - np.array(q))) for q in pts) > 0.55 * h:
            pts.append(tuple(p))
    pts = np.array(pts)
    tri = Delaunay(pts).simplices
    out = []
    for a, b, c in tri:
        pa, pb, pc = pts[a], pts[b], pts[c]
        cross = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
        out.append((a, b, c) if cross > 0 else (a, c, b))
    with open(path, "w") as f:
        f.write("mesh2d v1\n")
        f.write(f"{len(pts)} 0 {len(out)}\n")
        for x, y in pts:
            f.write(f"{x:.17g} {y:.17g}\n")
        for t in out:
            f.write(f"{t[0]} {t[1]} {t[2]}\n")


if __name__ == "__main__":
    main(sys.argv[1])
