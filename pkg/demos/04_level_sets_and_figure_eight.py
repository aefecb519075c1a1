"""
Tilted level sets, arcs, and the figure-eight picture
=====================================================

Candidate non-uniqueness constructions need four states on a common
level of a tilted entropy with the tilted flux agreeing in pairs.  The
level-set tracer walks {eta~ = C}, splits it into four arcs by the
sign pattern of the eigenvector sectors, locates the extrema of q~
along the curve, and reports how the arcs' q~ ranges overlap.

With the tilt c = (-2, 0) and level C = 2 the exponential p-system
produces the canonical closed curve whose tilted flux has exactly four
extrema -- the configuration the search machinery probes hardest.
"""

import numpy as np

from hyperlaw.eigen import sector_search
from hyperlaw.levelsets import (decompose, qtilde_extrema,
                                qtilde_range_by_arc, trace_level_set)
from hyperlaw.systems import make_system, tilt

psys = make_system("p_system", {"family": "exp"})
tl = tilt(psys, (-2.0, 0.0))

curve = trace_level_set(tl, 2.0)
print("level set {eta~ = 2}: %d samples, closed = %s"
      % (len(curve.samples), curve.closed))
states = curve.states()
print("  v range (%.3f, %.3f), u range (%.3f, %.3f)"
      % (states[:, 0].min(), states[:, 0].max(),
         states[:, 1].min(), states[:, 1].max()))

# four arcs, labelled by the quadrant pattern of the curve tangent
# against the sector vectors
sectors = sector_search(psys, psys.window)
dec = decompose(curve, tl, sectors)
counts = {name: 0 for name in ("I", "II", "III", "IV")}
for label in dec.labels:
    counts[label] += 1
print("  arc sample counts:", counts)

# the extrema of the tilted flux along the curve, with the residual of
# the first-order condition grad q~ || grad eta~ at each
cps = qtilde_extrema(tl, curve)
print("\nextrema of q~ along the curve: %d" % len(cps))
for cp in cps:
    print("  %s at (%.6f, %.6f), q~ = %.6f, residual %.2g"
          % (cp.kind, cp.u[0], cp.u[1], cp.value, cp.lagrange_residual))

# the q~ ranges of the four arcs: only opposite arcs overlap, which is
# the geometric fact that starves the four-state construction
ranges = qtilde_range_by_arc(tl, curve, dec)
print("\nq~ range by arc:")
for name in ("I", "II", "III", "IV"):
    lo, hi = ranges[name]
    print("  %-3s [%.4f, %.4f]" % (name, lo, hi))

overlap = lambda a, b: min(a[1], b[1]) - max(a[0], b[0])
print("overlap I & III : %.4f (opposite pair, overlaps)"
      % overlap(ranges["I"], ranges["III"]))
print("overlap I & II  : %.4f (adjacent pair, must not overlap)"
      % overlap(ranges["I"], ranges["II"]))
