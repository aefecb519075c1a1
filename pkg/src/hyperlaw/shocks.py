"""Hugoniot-locus continuation and shock admissibility diagnostics.

A shock curve through U_0 of family k solves

    F(U, sigma) = sigma (U - U_0) - (f(U) - f(U_0)) = 0

and is traced by pseudo-arclength continuation in (U, sigma).  The
parameter s is signed arclength with the convention that s > 0 leaves
U_0 in the -r_k direction; sigma(0) = lambda_k(U_0) exactly.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (ContinuationError, DomainError, HyperbolicityError,
                     QuadratureError)
from .eigen import eigenframe
from .systems import eval_G
from .smallmat import rank_one_residual, subdet

_MIN_STEP = 1e-8
_CORRECTOR_TOL = 1e-10


@dataclass
class ShockSample:
    s: float
    u: np.ndarray
    sigma: float
    rh_residual: float
    dissipation: float
    tangent: np.ndarray   # unit (du1, du2, dsigma)/ds, increasing s


@dataclass
class ShockCurve:
    base_point: np.ndarray
    family: int
    samples: list
    orientation: str = "s>0 leaves the base point along -r_k"
    truncated_neg: bool = False
    truncated_pos: bool = False
    sys: object = field(default=None, repr=False)

    def s_values(self):
        return np.array([sm.s for sm in self.samples])

    def states(self):
        return np.array([sm.u for sm in self.samples])

    def sigmas(self):
        return np.array([sm.sigma for sm in self.samples])

    def span(self):
        return (self.samples[0].s, self.samples[-1].s)

    def sample_at(self, s):
        i = int(np.argmin(np.abs(self.s_values() - s)))
        return self.samples[i]

    def _anchor_for(self, s):
        """The sample anchoring the parameterization at s: bracketing
        segments are parameterized from the endpoint nearer the base
        point, matching how the tracer assigned parameter values."""
        sv = self.s_values()
        if s < sv[0] - 1e-12 or s > sv[-1] + 1e-12:
            raise ValueError("parameter %g outside traced span %s"
                             % (s, (sv[0], sv[-1])))
        i = int(np.searchsorted(sv, s))
        i = min(max(i, 1), len(sv) - 1)
        a, b = i - 1, i            # bracketing segment [s_a, s_b]
        idx = a if sv[a] >= 0 else b
        return self.samples[idx]

    def point_at(self, s, sys=None):
        """Exact curve point at parameter s (corrector-refined between
        samples).  Returns (u, sigma, unit tangent)."""
        sys = sys or self.sys
        anchor = self._anchor_for(s)
        if abs(s - anchor.s) < 1e-14:
            return anchor.u.copy(), anchor.sigma, anchor.tangent.copy()
        f0 = sys.f(self.base_point)
        xa = np.array([anchor.u[0], anchor.u[1], anchor.sigma])
        h = s - anchor.s
        x = _correct(sys, self.base_point, f0, xa, anchor.tangent, h,
                     xa + h * anchor.tangent)
        if x is None:
            raise ContinuationError("corrector failed between samples",
                                    last_sample=anchor)
        t = _tangent(sys, self.base_point, x, anchor.tangent)
        return x[:2], x[2], t


# ----------------------------------------------------------- continuation

def _correct(sys, u0, f0, anchor, t_hat, h, x_start):
    """Newton for {F(U,sigma)=0, t_hat.(x-anchor)=h}.  Returns the
    solution or None (non-convergence); domain errors propagate."""
    x = np.array(x_start, dtype=float)
    for _ in range(25):
        u, sigma = x[:2], x[2]
        fvec = sigma * (u - u0) - (sys.f(u) - f0)
        g = t_hat @ (x - anchor) - h
        res = max(abs(fvec[0]), abs(fvec[1]), abs(g))
        if res < _CORRECTOR_TOL * 1e-2:
            return x
        df = sys.df(u)
        jac = np.empty((3, 3))
        jac[:2, :2] = sigma * np.eye(2) - df
        jac[:2, 2] = u - u0
        jac[2, :] = t_hat
        try:
            delta = np.linalg.solve(jac, -np.array([fvec[0], fvec[1], g]))
        except np.linalg.LinAlgError:
            return None
        x = x + delta
        if not np.all(np.isfinite(x)):
            return None
    # accept a slow but converged-enough corrector
    u, sigma = x[:2], x[2]
    fvec = sigma * (u - u0) - (sys.f(u) - f0)
    if max(abs(fvec[0]), abs(fvec[1])) < _CORRECTOR_TOL:
        return x
    return None


def _tangent(sys, u0, x, prev_t):
    """Unit null vector of the 2x3 Jacobian of F at x, oriented along
    prev_t.  The two rows' cross product spans the null space."""
    u, sigma = x[:2], x[2]
    df = sys.df(u)
    j1 = np.array([sigma - df[0, 0], -df[0, 1], u[0] - u0[0]])
    j2 = np.array([-df[1, 0], sigma - df[1, 1], u[1] - u0[1]])
    t = np.cross(j1, j2)
    n = np.linalg.norm(t)
    if n < 1e-13 * max(1.0, np.linalg.norm(j1) * np.linalg.norm(j2)):
        t = prev_t.copy()
    else:
        t = t / n
        if t @ prev_t < 0:
            t = -t
    return t


def _make_sample(sys, u0, f0, q0, eta0, s, x, t):
    u, sigma = x[:2].copy(), x[2]
    rh = float(np.linalg.norm(sigma * (u - u0) - (sys.f(u) - f0)))
    diss = float(sys.q(u) - q0 - sigma * (sys.eta(u) - eta0))
    return ShockSample(float(s), u, float(sigma), rh, diss, t.copy())


def _trace_branch(sys, u0, f0, q0, eta0, r, g, lam, sign, s_end, step):
    """Walk the branch with s = sign * (accumulated arclength) up to
    |s_end|.  Returns (samples ordered by walk, truncated flag)."""
    walk_dir = np.array([-sign * r[0], -sign * r[1], -sign * 0.5 * g])
    walk_dir /= np.linalg.norm(walk_dir)
    x = np.array([u0[0], u0[1], lam])
    t = walk_dir
    samples = []
    s_acc, h = 0.0, step
    target = abs(s_end)
    while s_acc < target - 1e-13:
        h_try = min(h, target - s_acc)
        x_new = None
        domain_hit = False
        while True:
            try:
                x_new = _correct(sys, u0, f0, x, t, h_try, x + h_try * t)
            except DomainError:
                x_new = None
                domain_hit = True
            if x_new is not None:
                # reject branch-jumping correctors
                if abs(x_new[2] - x[2]) > 10.0 * h_try + 1e-6:
                    x_new = None
            if x_new is not None:
                break
            h_try *= 0.5
            if h_try < _MIN_STEP:
                if domain_hit:
                    return samples, True
                raise ContinuationError(
                    "corrector diverged at s=%g (family walk %+d)"
                    % (sign * s_acc, sign),
                    last_sample=samples[-1] if samples else None)
        try:
            t_new = _tangent(sys, u0, x_new, t)
        except DomainError:
            return samples, True
        s_acc += h_try
        x, t = x_new, t_new
        # store the tangent oriented along increasing s
        samples.append(_make_sample(sys, u0, f0, q0, eta0,
                                    sign * s_acc, x, sign * t))
        h = min(step, 2.0 * h_try)
    return samples, False


def trace_hugoniot(sys, u0, family, span=(-5.0, 5.0), step=0.02):
    """Trace the family-k Hugoniot curve through u0 over the signed
    pseudo-arclength range span, sampling roughly every `step`."""
    if family not in (1, 2):
        raise ValueError("family must be 1 or 2, got %r" % (family,))
    if span[0] > 0 or span[1] < 0 or span[0] == span[1]:
        raise ValueError("span must contain 0, got %s" % (span,))
    u0 = np.asarray(u0, dtype=float)
    frame = eigenframe(sys, u0)
    r = frame.r1 if family == 1 else frame.r2
    lam = frame.lam1 if family == 1 else frame.lam2
    g = frame.gnl[family - 1]
    f0, q0, eta0 = sys.f(u0), sys.q(u0), sys.eta(u0)

    base_t = np.array([-r[0], -r[1], -0.5 * g])
    base_t /= np.linalg.norm(base_t)
    base = ShockSample(0.0, u0.copy(), float(lam), 0.0, 0.0, base_t)

    pos, trunc_pos = ([], False) if span[1] == 0 else _trace_branch(
        sys, u0, f0, q0, eta0, r, g, lam, +1, span[1], step)
    neg, trunc_neg = ([], False) if span[0] == 0 else _trace_branch(
        sys, u0, f0, q0, eta0, r, g, lam, -1, span[0], step)
    samples = list(reversed(neg)) + [base] + pos
    return ShockCurve(u0, family, samples,
                      truncated_neg=trunc_neg, truncated_pos=trunc_pos,
                      sys=sys)


# ------------------------------------------------------- Liu / Lax checks

@dataclass
class LiuLaxReport:
    monotone_neg: bool
    monotone_pos: bool
    lax_ok: bool
    sigma_slope_neg: float       # representative d(sigma)/ds on s<0
    sigma_slope_pos: float
    liu_violations: list         # (s, sigma) interior extrema
    lax_failures: list           # (s, sigma, lo, hi)

    @property
    def liu_ok(self):
        return self.monotone_neg and self.monotone_pos


def liu_lax_check(sys, curve):
    """Monotonicity of sigma (Liu) per side and Lax E-condition interval
    membership at every sample."""
    if len(curve.samples) < 3:
        raise ValueError("need at least 3 samples")
    sv = curve.s_values()
    sig = curve.sigmas()
    k = curve.family
    lam_base = curve.sample_at(0.0).sigma

    def side(mask):
        ss, qq = sv[mask], sig[mask]
        if len(ss) < 2:
            return True, 0.0, []
        d = np.diff(qq)
        slope = d[0] / (ss[1] - ss[0])
        mono = bool(np.all(d < 0) or np.all(d > 0))
        viol = []
        for i in range(1, len(d)):
            if d[i - 1] * d[i] <= 0:
                viol.append((float(ss[i]), float(qq[i])))
        return mono, float(slope), viol

    mono_neg, slope_neg, viol_neg = side(sv < 0)
    mono_pos, slope_pos, viol_pos = side(sv > 0)

    lax_failures = []
    tol = 1e-9 * max(1.0, float(np.max(np.abs(sig))))
    for sm in curve.samples:
        if sm.s == 0.0:
            continue
        fr = eigenframe(sys, sm.u)
        lam_here = fr.lam1 if k == 1 else fr.lam2
        lo, hi = min(lam_here, lam_base), max(lam_here, lam_base)
        if not (lo - tol <= sm.sigma <= hi + tol):
            lax_failures.append((sm.s, sm.sigma, lo, hi))
    return LiuLaxReport(mono_neg, mono_pos, len(lax_failures) == 0,
                        slope_neg, slope_pos, viol_neg + viol_pos,
                        lax_failures)


# ----------------------------------------------------------- dissipation

@dataclass
class DissipationSample:
    s: float
    direct: float      # q(S) - q(U0) - sigma (eta(S) - eta(U0))
    integral: float    # -int_0^s sigma'(tau) eta(U0|S(tau)) dtau
    eta_rel: float     # eta(U0 | S(s))

    @property
    def identity_residual(self):
        """|direct + integral| relative to the larger magnitude (floored
        so the vanishing base-point limit is not a 0/0)."""
        return abs(self.direct + self.integral) / max(
            abs(self.direct), abs(self.integral), 1e-4)


def _adaptive_simpson(fn, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = fn(lm), fn(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    if depth <= 0:
        raise QuadratureError(
            "adaptive refinement exhausted on [%g, %g]" % (a, b))
    return (_adaptive_simpson(fn, a, m, fa, flm, fm, left, 0.5 * tol,
                              depth - 1)
            + _adaptive_simpson(fn, m, b, fm, frm, fb, right, 0.5 * tol,
                                depth - 1))


def _segment_integral(fn, a, b, tol=1e-9):
    fa, fb = fn(a), fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _adaptive_simpson(fn, a, b, fa, fm, fb, whole, tol, 24)


def dissipation_profile(sys, curve):
    """Both sides of the entropy-dissipation identity at every sample:
    the direct jump expression and the quadrature of the speed-derivative
    against the relative entropy (with its sign flipped, so that
    direct + integral = 0 up to quadrature tolerance)."""
    u0 = curve.base_point
    f0, q0, eta0 = sys.f(u0), sys.q(u0), sys.eta(u0)

    def segment_fn(anchor):
        # d(sigma)/ds on the segment parameterized from this anchor:
        # the unit tangent rescaled by the chain factor of the
        # tangent-projection parameter
        xa = np.array([anchor.u[0], anchor.u[1], anchor.sigma])

        def fn(s):
            h = s - anchor.s
            if abs(h) < 1e-14:
                u, t, factor = anchor.u, anchor.tangent, 1.0
            else:
                x = _correct(sys, u0, f0, xa, anchor.tangent, h,
                             xa + h * anchor.tangent)
                if x is None:
                    raise QuadratureError(
                        "corrector failed inside a quadrature segment "
                        "at s=%g" % (s,))
                u = x[:2]
                t = _tangent(sys, u0, x, anchor.tangent)
                factor = float(anchor.tangent @ t)
            eta_rel = float(eta0 - sys.eta(u)
                            - sys.grad_eta(u) @ (u0 - u))
            return (t[2] / factor) * eta_rel
        return fn

    sv = curve.s_values()
    ib = int(np.argmin(np.abs(sv)))
    acc = np.zeros(len(sv))
    for i in range(ib + 1, len(sv)):
        fn = segment_fn(curve.samples[i - 1])
        acc[i] = acc[i - 1] + _segment_integral(fn, sv[i - 1], sv[i])
    for i in range(ib - 1, -1, -1):
        fn = segment_fn(curve.samples[i + 1])
        acc[i] = acc[i + 1] - _segment_integral(fn, sv[i], sv[i + 1])

    out = []
    for i, sm in enumerate(curve.samples):
        eta_rel = float(sys.eta(u0) - sys.eta(sm.u)
                        - sys.grad_eta(sm.u) @ (u0 - sm.u))
        out.append(DissipationSample(sm.s, sm.dissipation, -acc[i], eta_rel))
    return out


# ------------------------------------------------------ rank-one scanning

@dataclass
class RankOneScan:
    min_normalized: float
    witness_s: float
    witness_u: np.ndarray
    det12_max: float
    n_scanned: int


def rank_one_scan(sys, curve, span=None):
    """Minimum of rank_one_residual(G(U_0) - G(S(s))) / ||.||_F over the
    curve samples with s != 0 (optionally restricted to |s| in span).
    Also checks that the rows-(1,2) subdeterminant vanishes along the
    whole curve, as forced by the jump condition."""
    if span is not None:
        if span[0] <= 0:
            raise ValueError("the s->0 limit is excluded; span must have "
                             "a positive lower bound")
        lo_s, hi_s = span
    else:
        lo_s, hi_s = 0.0, math.inf
    g0 = eval_G(sys, curve.base_point)
    best = (math.inf, None, None)
    det_max = 0.0
    n = 0
    for sm in curve.samples:
        if sm.s == 0.0:
            continue
        m = g0 - eval_G(sys, sm.u)
        nf = np.linalg.norm(m)
        det_max = max(det_max, abs(subdet(m, (1, 2)))
                      / max(1.0, nf * nf))
        if not (lo_s <= abs(sm.s) <= hi_s):
            continue
        n += 1
        val = rank_one_residual(m) / nf
        if val < best[0]:
            best = (val, sm.s, sm.u)
    if n == 0:
        raise ValueError("no samples with s != 0 in the requested range")
    return RankOneScan(float(best[0]), float(best[1]), best[2].copy(),
                       float(det_max), n)


# ------------------------------------------------- geometric side checks

def star_shape_probe(curve, tol=1e-8):
    """Check no two samples lie on a common ray from the base point
    (the curve is angle-monotone around U_0).  Returns (ok, witnesses).
    Straight-line loci through the base point report violations by
    construction; the probe targets curving loci."""
    u0 = curve.base_point
    dirs, rays, svals = [], [], []
    for sm in curve.samples:
        d = sm.u - u0
        n = np.linalg.norm(d)
        if n < 1e-12:
            continue
        dirs.append(d / n)
        rays.append(d)
        svals.append(sm.s)
    d = np.array(dirs)
    rays = np.array(rays)
    svals = np.array(svals)
    witnesses = []
    for i0 in range(0, len(d), 256):
        blk = d[i0:i0 + 256]
        cross = np.abs(np.outer(blk[:, 0], d[:, 1])
                       - np.outer(blk[:, 1], d[:, 0]))
        dot = blk @ d.T
        hits = np.argwhere((cross < tol) & (dot > 0))
        for bi, j in hits:
            i = i0 + bi
            if i >= j:
                continue
            # a violation needs two genuinely distinct states on the ray;
            # samples crowded by step refinement near a window edge are
            # the same curve location, not a re-crossing
            sep = np.linalg.norm(rays[i] - rays[j])
            scale = 1.0 + np.linalg.norm(rays[i]) + np.linalg.norm(rays[j])
            if sep > 1e-6 * scale:
                witnesses.append((float(svals[i]), float(svals[j])))
    return len(witnesses) == 0, witnesses


def sector_side_check(curve, sectors):
    """Geometry check for 1-family curves: on s > 0 the tangent T obeys
    w_1 . T > 0 for valid sector vectors."""
    if curve.family != 1:
        raise ValueError("the sector side condition is stated for the "
                         "1-family curve")
    bad = []
    for sm in curve.samples:
        if sm.s <= 0:
            continue
        if sectors.w1 @ sm.tangent[:2] <= 0:
            bad.append((sm.s, sm.u.copy()))
    return len(bad) == 0, bad


def curve_continuity_probe(sys, u0, family, delta, span=(-2.0, 2.0),
                           step=0.02):
    """Max displacement between the curve from u0 and curves from 8
    compass perturbations at distance delta, matched at equal s over the
    common traced span."""
    u0 = np.asarray(u0, dtype=float)
    base = trace_hugoniot(sys, u0, family, span=span, step=step)
    if delta == 0.0:
        return 0.0
    worst = 0.0
    for kdir in range(8):
        th = kdir * math.pi / 4.0
        pert = u0 + delta * np.array([math.cos(th), math.sin(th)])
        other = trace_hugoniot(sys, pert, family, span=span, step=step)
        lo = max(base.span()[0], other.span()[0])
        hi = min(base.span()[1], other.span()[1])
        for sm in base.samples:
            if not (lo <= sm.s <= hi):
                continue
            u_other, _, _ = other.point_at(sm.s, sys=sys)
            worst = max(worst, float(np.linalg.norm(sm.u - u_other)))
    return worst


# ------------------------------------------------ level-set interaction

def level_crossings(sys, curve, c, level):
    """Parameters where the tilted entropy eta + c.U along the curve
    crosses the given level, refined by bisection to 1e-10 in s.
    Returns a list of (s, U) ordered by s."""
    c = np.asarray(c, dtype=float)

    def val(u):
        return float(sys.eta(u) + c @ u) - level

    sv = curve.s_values()
    vals = np.array([val(sm.u) for sm in curve.samples])
    out = []
    for i in range(len(sv) - 1):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            out.append((float(sv[i]), curve.samples[i].u.copy()))
            continue
        if va * vb < 0:
            a, b = sv[i], sv[i + 1]
            fa = va
            while b - a > 1e-10:
                m = 0.5 * (a + b)
                um, _, _ = curve.point_at(m, sys=sys)
                fm = val(um)
                if fm == 0.0:
                    a = b = m
                elif fa * fm < 0:
                    b = m
                else:
                    a, fa = m, fm
            s_star = 0.5 * (a + b)
            u_star, _, _ = curve.point_at(s_star, sys=sys)
            out.append((float(s_star), u_star))
    if vals[-1] == 0.0:
        out.append((float(sv[-1]), curve.samples[-1].u.copy()))
    return out


def last_exit(sys, curve, c, level):
    """Outermost parameters at which the curve leaves the sublevel set
    {eta + c.U <= level}, per branch: (s_neg, s_pos), None where the
    branch never exits (or never returns inside)."""
    crossings = level_crossings(sys, curve, c, level)
    c = np.asarray(c, dtype=float)

    def val(u):
        return float(sys.eta(u) + c @ u) - level

    pos = [s for s, _ in crossings if s > 0]
    neg = [s for s, _ in crossings if s < 0]
    s_pos = None
    if pos and val(curve.samples[-1].u) > 0:
        s_pos = max(pos)
    s_neg = None
    if neg and val(curve.samples[0].u) > 0:
        s_neg = min(neg)
    return s_neg, s_pos
