"""Eigenstructure of 2x2 fluxes and admissibility quantities.

Frames follow the classical normalization: unit right eigenvectors
with r_i . grad(lambda_i) > 0 where genuine nonlinearity holds (a
deterministic tie-break elsewhere), unit left eigenvectors with
l_i . r_j = 0 for i != j and l_i . r_i > 0.

The gradient of an eigenvalue is computed from the flux second
derivative via the standard perturbation identity

    d(lambda_i)[a] = l_i . D^2 f(a, r_i) / (l_i . r_i),

so no third-order differencing is ever needed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HyperbolicityError

#: threshold below which a directional derivative of lambda counts as
#: linearly degenerate and orientation falls back to the tie-break
_GNL_TIE_TOL = 1e-13


@dataclass
class EigenFrame:
    lam1: float
    lam2: float
    r1: np.ndarray
    r2: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    point: np.ndarray
    grad_lam1: np.ndarray
    grad_lam2: np.ndarray

    @property
    def gnl(self):
        """Directional derivatives r_i . grad(lambda_i) in this frame."""
        return (float(self.r1 @ self.grad_lam1),
                float(self.r2 @ self.grad_lam2))


def _unit(v):
    n = math.hypot(v[0], v[1])
    return v / n


def _right_eigenvector(df, lam):
    # (Df - lam) r = 0; two algebraic forms, keep the better conditioned
    cand_a = np.array([df[0, 1], lam - df[0, 0]])
    cand_b = np.array([lam - df[1, 1], df[1, 0]])
    v = cand_a if cand_a @ cand_a >= cand_b @ cand_b else cand_b
    return _unit(v)


def _tie_break(v):
    # first component exceeding rounding noise decides the sign
    lead = v[0] if abs(v[0]) > 1e-12 else v[1]
    return -v if lead < 0 else v


def eigenframe(sys, u, prev=None):
    """Characteristic speeds and normalized eigenvector frame at u.

    prev: an EigenFrame from a nearby point; when given, eigenvector
    orientation is aligned with it (continuous along traversals)
    instead of the genuine-nonlinearity normalization.
    """
    u = np.asarray(u, dtype=float)
    df = sys.df(u)
    mean = 0.5 * (df[0, 0] + df[1, 1])
    disc = 0.25 * (df[0, 0] - df[1, 1]) ** 2 + df[0, 1] * df[1, 0]
    scale = max(1.0, float(np.max(np.abs(df))))
    if disc < 0.0:
        raise HyperbolicityError(
            "complex characteristic speeds at %s" % (u.tolist(),), point=u)
    root = math.sqrt(disc)
    lam1, lam2 = mean - root, mean + root
    if lam2 - lam1 <= 1e-9 * scale:
        raise HyperbolicityError(
            "coincident characteristic speeds at %s" % (u.tolist(),), point=u)

    r1 = _right_eigenvector(df, lam1)
    r2 = _right_eigenvector(df, lam2)
    # left eigenvectors are orthogonal to the opposite right ones
    l1 = _unit(np.array([-r2[1], r2[0]]))
    l2 = _unit(np.array([-r1[1], r1[0]]))
    if l1 @ r1 < 0:
        l1 = -l1
    if l2 @ r2 < 0:
        l2 = -l2

    h = sys.d2f_tensor(u)

    def grad_lam(l, r, denom):
        # gradient via the perturbation identity, one component per axis
        m = np.tensordot(l, h, axes=(0, 0))   # 2x2: l . D^2 f(., .)
        return (m @ r) / denom

    g1 = grad_lam(l1, r1, l1 @ r1)
    g2 = grad_lam(l2, r2, l2 @ r2)

    def orient(r, g, prev_r):
        if prev_r is not None:
            if r @ prev_r < 0:
                r = -r
        else:
            slope = r @ g
            if abs(slope) > _GNL_TIE_TOL * scale:
                if slope < 0:
                    r = -r
            else:
                r = _tie_break(r)
        return r

    r1 = orient(r1, g1, prev.r1 if prev is not None else None)
    r2 = orient(r2, g2, prev.r2 if prev is not None else None)
    # re-impose l_i . r_i > 0 after orientation
    if l1 @ r1 < 0:
        l1 = -l1
    if l2 @ r2 < 0:
        l2 = -l2
    return EigenFrame(lam1, lam2, r1, r2, l1, l2, u, g1, g2)


def genuine_nonlinearity(sys, u, frame=None):
    """The pair (r_1 . grad lambda_1, r_2 . grad lambda_2) in the
    frame's orientation (nonnegative in the default frame wherever
    genuine nonlinearity holds)."""
    if frame is None:
        frame = eigenframe(sys, u)
    return frame.gnl


def smoller_johnson(sys, u, frame=None):
    """The pair (l_2 . D^2 f(r_1, r_1), l_1 . D^2 f(r_2, r_2)).

    Positivity of both is the convex-rarefaction condition.  The signs
    depend on the frame orientation (through l_j); pass an explicit
    frame to evaluate in a non-default orientation.
    """
    u = np.asarray(u, dtype=float)
    if frame is None:
        frame = eigenframe(sys, u)
    h = sys.d2f_tensor(u)
    d2 = lambda d: np.array([d @ h[0] @ d, d @ h[1] @ d])
    return (float(frame.l2 @ d2(frame.r1)), float(frame.l1 @ d2(frame.r2)))


def rarefaction_curvatures(sys, u, frame=None):
    """Curvatures of the two rarefaction curves,
    kappa_i = l_j . D^2 f(r_i, r_i) / (lambda_i - lambda_j)."""
    if frame is None:
        frame = eigenframe(sys, u)
    sj1, sj2 = smoller_johnson(sys, u, frame=frame)
    return (sj1 / (frame.lam1 - frame.lam2), sj2 / (frame.lam2 - frame.lam1))


# ---------------------------------------------------------------------
# closed forms for gradient-flux systems (f = (eta_u, eta_v))
# ---------------------------------------------------------------------

def _gf_jet(sys, u):
    """(eta_vv, eta_uv, eta_uu, eta_vvv, eta_uvv, eta_uuv, eta_uuu)
    read off the closed-form Hessians of a gradient-flux system."""
    if getattr(sys, "kind", None) != "gradient_flux":
        raise ValueError("closed forms require a gradient-flux system, "
                         "got kind=%r" % (getattr(sys, "kind", None),))
    he = sys.hess_eta(u)
    h = sys.d2f_tensor(u)     # h[0] = Hess(eta_u), h[1] = Hess(eta_v)
    return (he[0, 0], he[0, 1], he[1, 1],
            h[1][0, 0], h[0][0, 0], h[0][0, 1], h[0][1, 1])


def gradient_flux_speeds(sys, u):
    """(eta_uv - sqrt(eta_uu eta_vv), eta_uv + sqrt(eta_uu eta_vv))."""
    evv, euv, euu = _gf_jet(sys, u)[:3]
    s = math.sqrt(euu * evv)
    return (euv - s, euv + s)


def gradient_flux_eigvec_dirs(sys, u):
    """Reference (unnormalized) eigenvector directions for a
    gradient-flux system in (v,u) coordinates:

        R1 = (a, -1)  for lambda_1,   R2 = (a, 1)  for lambda_2,
        L1 = (1, -a),                 L2 = (1, a),     a = sqrt(eta_uu/eta_vv).

    R1 has negative slope and R2 positive slope; orientation here is a
    fixed reference, not the genuine-nonlinearity normalization.
    """
    evv, _, euu = _gf_jet(sys, u)[:3]
    a = math.sqrt(euu / evv)
    return (np.array([a, -1.0]), np.array([a, 1.0]),
            np.array([1.0, -a]), np.array([1.0, a]))


def gradient_flux_gnl_criterion(sys, u):
    """The two genuine-nonlinearity expressions

        (eta_vvv eta_uu + 3 eta_vv eta_uuv)/sqrt(eta_vv)
            +- (eta_vv eta_uuu + 3 eta_uu eta_uvv)/sqrt(eta_uu),

    returned as (minus-choice, plus-choice).  Nonvanishing of both is
    the genuine-nonlinearity criterion; in the reference orientation
    of gradient_flux_eigvec_dirs,

        R1 . grad lambda_1 = -(minus-choice) / (2 sqrt(eta_vv)),
        R2 . grad lambda_2 = +(plus-choice)  / (2 sqrt(eta_vv)).
    """
    evv, _, euu, evvv, euvv, euuv, euuu = _gf_jet(sys, u)
    first = (evvv * euu + 3.0 * evv * euuv) / math.sqrt(evv)
    second = (evv * euuu + 3.0 * euu * euvv) / math.sqrt(euu)
    return (first - second, first + second)


def gradient_flux_sj_criterion(sys, u):
    """The two convex-rarefaction expressions

        +-(eta_uu/eta_vv) eta_uvv + sqrt(eta_uu/eta_vv) eta_uuv
            -+ eta_uuu - (eta_uu/eta_vv)^{3/2} eta_vvv,

    returned as (plus-choice, minus-choice).  In the reference
    orientation of gradient_flux_eigvec_dirs,

        L2 . D^2 f(R1, R1) = -(plus-choice),
        L1 . D^2 f(R2, R2) = +(minus-choice).
    """
    evv, _, euu, evvv, euvv, euuv, euuu = _gf_jet(sys, u)
    rat = euu / evv
    a = math.sqrt(rat)
    base_plus = rat * euvv + a * euuv - euuu - rat * a * evvv
    base_minus = -rat * euvv + a * euuv + euuu - rat * a * evvv
    return (base_plus, base_minus)


# ---------------------------------------------------------------------
# sector condition search
# ---------------------------------------------------------------------

@dataclass
class SectorVectors:
    w1: np.ndarray
    w2: np.ndarray


@dataclass
class SectorAbsence:
    """Certificate that no sector vectors exist for the sampled frames:
    the feasible cone for w1 or w2 became empty, with the two samples
    whose constraints collided."""
    which: str
    witness_points: tuple
    message: str

    def __bool__(self):
        return False


class _Cone:
    """Intersection of open half-planes {w : d.w > 0}, tracked as a
    single open angular interval (always < pi wide)."""

    def __init__(self):
        self.lo = None
        self.hi = None
        self.lo_tag = None
        self.hi_tag = None

    def add(self, d, tag):
        c = math.atan2(d[1], d[0])
        if self.lo is None:
            self.lo, self.hi = c - 0.5 * math.pi, c + 0.5 * math.pi
            self.lo_tag = self.hi_tag = tag
            return True
        mid = 0.5 * (self.lo + self.hi)
        c += (2.0 * math.pi) * round((mid - c) / (2.0 * math.pi))
        lo, hi = c - 0.5 * math.pi, c + 0.5 * math.pi
        if lo > self.lo:
            self.lo, self.lo_tag = lo, tag
        if hi < self.hi:
            self.hi, self.hi_tag = hi, tag
        return self.lo < self.hi

    def midvector(self):
        mid = 0.5 * (self.lo + self.hi)
        return np.array([math.cos(mid), math.sin(mid)])


def _region_grid(region, n_samples):
    lo = np.asarray(region[0], dtype=float)
    hi = np.asarray(region[1], dtype=float)
    m = max(2, math.ceil(math.sqrt(n_samples)))
    xs = lo[0] + (np.arange(m) + 0.5) / m * (hi[0] - lo[0])
    ys = lo[1] + (np.arange(m) + 0.5) / m * (hi[1] - lo[1])
    return [np.array([x, y]) for x in xs for y in ys]


def sector_search(sys, region, n_samples=400):
    """Find fixed vectors (w1, w2) with r_1.w1 < 0, r_1.w2 > 0,
    r_2.w1 > 0, r_2.w2 > 0 at every sampled point of the region, or
    return an absence certificate.

    The constraints are positively homogeneous, so each sample cuts the
    unit circle down by two open semicircles per w; the feasible set is
    an open convex cone intersected exactly (no angular grid).
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    lo = np.asarray(region[0], dtype=float)
    hi = np.asarray(region[1], dtype=float)
    for corner in ([lo[0], lo[1]], [lo[0], hi[1]],
                   [hi[0], lo[1]], [hi[0], hi[1]]):
        if not sys.domain.contains(corner):
            raise DomainError(
                "search region corner %s outside the system domain"
                % (list(corner),), point=np.asarray(corner))
    points = _region_grid(region, n_samples)
    cone_w1 = _Cone()
    cone_w2 = _Cone()
    frames = []
    for pt in points:
        fr = eigenframe(sys, pt)
        frames.append((pt, fr))
        # w1: r1.w < 0 and r2.w > 0;  w2: r1.w > 0 and r2.w > 0
        for cone, d in ((cone_w1, -fr.r1), (cone_w1, fr.r2),
                        (cone_w2, fr.r1), (cone_w2, fr.r2)):
            if not cone.add(d, pt):
                which = "w1" if cone is cone_w1 else "w2"
                return SectorAbsence(
                    which=which,
                    witness_points=(cone.lo_tag, cone.hi_tag),
                    message="feasible cone for %s empty: constraints at "
                            "%s and %s conflict"
                            % (which, cone.lo_tag.tolist(), pt.tolist()))
    w1 = cone_w1.midvector()
    w2 = cone_w2.midvector()
    # post: strict inequalities at all sampled frames
    for pt, fr in frames:
        ok = (fr.r1 @ w1 < 0 and fr.r2 @ w1 > 0
              and fr.r1 @ w2 > 0 and fr.r2 @ w2 > 0)
        if not ok:
            return SectorAbsence(
                which="validation", witness_points=(pt,),
                message="midpoint vectors failed at %s" % (pt.tolist(),))
    return SectorVectors(w1=w1, w2=w2)
