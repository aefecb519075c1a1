"""
The system catalog and the constitutive set
===========================================

Every system in the catalog packages a 2x2 conservation law together
with one strictly convex entropy pair: state functions f, eta, q and
their derivatives.  The central object downstream is the constitutive
set, the surface of 3x2 matrices

    G(U) = [[u1, f1(U)], [u2, f2(U)], [eta(U), q(U)]]

swept out as U ranges over the state space.
"""

import numpy as np

from hyperlaw.systems import eval_G, make_system, tilt

# build three members of the catalog; parameters are plain dicts and
# every family validates its own admissibility conditions
psys = make_system("p_system", {"family": "exp"})
gas = make_system("gamma_law", {"kappa": 1.0, "gamma": 2.0})
gf = make_system("gradient_flux", {"form": "exp", "c": 0.4, "gamma": 0.7})

for sys in (psys, gas, gf):
    print(sys.label)
    lo, hi = sys.window
    print("  window", lo.tolist(), hi.tolist())

# the stacked matrix at one state of the p-system
u = np.array([0.5, -1.0])
print("\nG(U) at", u.tolist())
print(eval_G(psys, u))

# the entropy pair is compatible with the flux: grad q = grad eta . Df,
# which is what makes the third row of G meaningful
res = psys.grad_q(u) - psys.grad_eta(u) @ psys.df(u)
print("compatibility residual |grad q - grad eta . Df| = %.3g"
      % np.linalg.norm(res))

# and the entropy is strictly convex: both Hessian eigenvalues positive
eigs = np.linalg.eigvalsh(psys.hess_eta(u))
print("entropy Hessian eigenvalues", eigs)

# tilting shifts the pair by a linear function of the state,
#   eta~ = eta + c . U,   q~ = q + c . f(U),
# which preserves compatibility and convexity but moves the level sets;
# searches use tilts to place candidate states on a common level
tl = tilt(psys, (-2.0, 0.0))
print("\ntilted by c = (-2, 0):")
print("  eta (%.6f) -> eta~ (%.6f)" % (psys.eta(u), tl.eta(u)))
print("  q   (%.6f) -> q~   (%.6f)" % (psys.q(u), tl.q(u)))
res = tl.grad_q(u) - tl.grad_eta(u) @ tl.df(u)
print("  tilted compatibility residual = %.3g" % np.linalg.norm(res))
