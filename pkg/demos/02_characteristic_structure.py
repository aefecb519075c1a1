"""
Characteristic structure and the admissibility checklist
========================================================

The verification machinery decides, by sampling, whether a system
satisfies the structural hypotheses that the nonexistence arguments
need: hyperbolicity, genuine nonlinearity, convex rarefactions with a
uniform sign, sector-separated eigenvector fields, speeds of opposite
sign, and a well-behaved family of tilted level sets.
"""

import numpy as np

from hyperlaw.eigen import (eigenframe, genuine_nonlinearity,
                            gradient_flux_speeds, sector_search,
                            smoller_johnson)
from hyperlaw.hypotheses import hypothesis_report
from hyperlaw.systems import make_system

psys = make_system("p_system", {"family": "exp"})

# the eigenframe at a point: speeds, right/left eigenvectors, and the
# gradients of the speeds
u = np.array([0.5, -1.0])
fr = eigenframe(psys, u)
print("speeds at", u.tolist(), "-> lambda_1 = %.6f, lambda_2 = %.6f"
      % (fr.lam1, fr.lam2))
print("r_1 =", fr.r1, " r_2 =", fr.r2)
print("genuine nonlinearity (r_i . grad lambda_i):",
      genuine_nonlinearity(psys, u, frame=fr))
print("convex-rarefaction values (l_j . D2f(r_i, r_i)):",
      smoller_johnson(psys, u, frame=fr))

# for gradient-flux systems the same objects have closed forms
gf = make_system("gradient_flux", {"form": "exp", "c": 0.4, "gamma": 0.7})
v = np.array([0.3, -0.2])
print("\ngradient-flux closed-form speeds:", gradient_flux_speeds(gf, v))
print("generic eigenframe speeds:        (%.12f, %.12f)"
      % (eigenframe(gf, v).lam1, eigenframe(gf, v).lam2))

# two fixed vectors separating the eigenvector fields over the window
sec = sector_search(psys, psys.window)
print("\nsector vectors: w1 =", sec.w1, " w2 =", sec.w2)

# the full checklist, one verdict per item; everything holds for the
# exponential p-system
rep = hypothesis_report(psys, tilt_grid=[(0.0, 0.0), (0.0, -2.0)],
                        level_grid=[1.0, 2.0, 4.0])
print("\np-system checklist:")
for group, name in (("h1", "H1"), ("h2", "H2")):
    items = getattr(rep, group)
    line = ", ".join("%s %s" % (k, items[k].status) for k in sorted(items))
    print("  %s: %s" % (name, line))

# the same gas dynamics law fails two items in Eulerian form -- its
# speeds do not straddle zero and the eigenvector fields cannot be
# separated by fixed sectors; the report recommends the repair
gas = make_system("gamma_law", {"kappa": 1.0, "gamma": 2.0})
gas_rep = hypothesis_report(gas, tilt_grid=[(0.0, 0.0)])
failing = [k for k, v in gas_rep.h1.items() if v.status == "failed-at-point"]
print("\nEulerian gas dynamics fails H1 items:", failing)
print("recommendation:", gas_rep.recommendation)
