"""Level curves of a (tilted) entropy and their arc decomposition.

A strictly convex entropy has convex sublevel sets, so each level set
{eta = C} above the minimum is a convex curve.  It is traced counter-
clockwise with the outward normal nu = grad eta / |grad eta| and the
tangent rot90(nu).  Step sizes adapt to the curve's own curvature

    kappa = T . hess_eta . T / |grad eta|

so that no step turns by more than about a degree.  Unbounded level
sets are clipped to the analysis window and flagged `clipped`; counts
of constrained extrema are then statements about the visible portion
only.

The curve is partitioned into four arcs by the sign pattern of nu in a
sector basis (w_1, w_2):

    nu = b_1 w_1 + b_2 w_2,   (-,-) -> I   (+,-) -> II
                              (+,+) -> III (-,+) -> IV

which makes r_2 point inward on I, r_1 on II, -r_2 on III, -r_1 on IV
whenever (w_1, w_2) satisfy the sector inequalities.  Samples where a
coefficient vanishes (within 1e-10) sit between two arcs and are
assigned to the cyclically following one.

Constrained critical points of the entropy flux q restricted to the
curve are located by bracketing sign changes of dq/dt and bisecting;
each is cross-checked against the Lagrange condition that grad eta be
a left eigenvector of Df there.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .eigen import eigenframe
from .errors import (ContinuationError, DecompositionError, DomainError,
                     EmptyLevelError)

#: target turning per step (the hard bound is twice this)
_TURN_TARGET = math.radians(0.9)
_TURN_BOUND = math.radians(2.0)
_MIN_STEP = 1e-8
_BOUNDARY_COEF = 1e-10

ARC_NAMES = ("I", "II", "III", "IV")


@dataclass
class LevelSample:
    t: float          # accumulated arc parameter (chord length)
    u: np.ndarray
    tangent: np.ndarray   # unit, counterclockwise
    normal: np.ndarray    # unit, outward from {eta < C}


@dataclass
class LevelCurve:
    level: float
    tilt: np.ndarray
    samples: list
    closed: bool
    clipped: bool = False
    window: tuple = None

    def t_values(self):
        return np.array([sm.t for sm in self.samples])

    def states(self):
        return np.array([sm.u for sm in self.samples])

    def __len__(self):
        return len(self.samples)

    def segment_pairs(self):
        """Index pairs of consecutive samples, wrapping when closed."""
        n = len(self.samples)
        pairs = [(i, i + 1) for i in range(n - 1)]
        if self.closed and n > 2:
            pairs.append((n - 1, 0))
        return pairs


@dataclass
class LevelDecomposition:
    labels: list                      # arc name per sample
    arcs: dict                        # name -> index array
    sectors: object                   # the SectorVectors used
    rule: str = "cyclic-forward"
    boundary_indices: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))

    def arc(self, name):
        return self.arcs[name]

    def empty_arcs(self):
        return [n for n in ARC_NAMES if len(self.arcs[n]) == 0]


@dataclass
class CriticalPoint:
    u: np.ndarray
    value: float                # q at the point
    kind: str                   # "max" | "min" | "degenerate"
    lagrange_residual: float    # alignment of grad eta with l_1 or l_2
    second_derivative: float    # d^2 q / dt^2 along the curve
    t: float = 0.0


# ---------------------------------------------------------------------
# tracing
# ---------------------------------------------------------------------

def _correct_to_level(sys, level, x, max_iter=30):
    """Newton steps along the gradient onto {eta = level}; None on
    failure."""
    u = np.asarray(x, dtype=float).copy()
    tol = 1e-13 * max(1.0, abs(level))
    for _ in range(max_iter):
        try:
            res = sys.eta(u) - level
            g = sys.grad_eta(u)
        except DomainError:
            return None
        if abs(res) < tol:
            break
        gg = g @ g
        if gg < 1e-30 or not np.all(np.isfinite(g)):
            return None
        u = u - (res / gg) * g
    try:
        if abs(sys.eta(u) - level) < 1e-9:
            return u
    except DomainError:
        return None
    return None


def _frame_at(sys, u):
    """(outward normal, ccw tangent, curvature) of the level curve of
    eta through u.  Strict convexity keeps the gradient away from zero
    on any level curve; asserted defensively."""
    g = sys.grad_eta(u)
    n = np.linalg.norm(g)
    if n < 1e-12:
        raise ContinuationError(
            "vanishing entropy gradient on a level curve at %s"
            % (np.asarray(u).tolist(),), last_sample=u)
    nu = g / n
    tang = np.array([-nu[1], nu[0]])
    kappa = float(tang @ sys.hess_eta(u) @ tang) / n
    return nu, tang, kappa


def _window_of(sys, window):
    if window is None:
        return sys.window
    return (np.asarray(window[0], dtype=float),
            np.asarray(window[1], dtype=float))


def _inside(u, lo, hi):
    return bool(np.all(u > lo) and np.all(u < hi))


def _window_minimum(sys, lo, hi):
    """Minimize eta over the (slightly inset) window; convexity makes
    the local result global."""
    inset = 1e-9 * (hi - lo)
    res = scipy.optimize.minimize(
        lambda x: sys.eta(x), 0.5 * (lo + hi),
        jac=lambda x: sys.grad_eta(x),
        bounds=list(zip(lo + inset, hi - inset)), method="L-BFGS-B")
    return np.asarray(res.x), float(res.fun)


_COMPASS = [np.array(d) / np.linalg.norm(d) for d in
            ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0),
             (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0))]


def _find_start(sys, level, lo, hi):
    """A point on {eta = level} inside the window, found by marching
    away from the window minimum; EmptyLevelError when the level is at
    or below the minimum or the level set misses the window."""
    xm, m = _window_minimum(sys, lo, hi)
    if level <= m + 1e-12 * max(1.0, abs(m)):
        raise EmptyLevelError(
            "level %g is at or below the minimum %g of the entropy on "
            "the analysis window" % (level, m))
    span = float(np.max(hi - lo))

    def admissible(x):
        if not _inside(x, lo, hi):
            return False
        try:
            sys.eta(x)
        except DomainError:
            return False
        return True

    for d in _COMPASS:
        t_lo, t_hi = 0.0, None
        t = 1e-3 * span
        while t < 4.0 * span:
            x = xm + t * d
            if not admissible(x):
                # the ray exits between t_lo and t; the crossing may sit
                # in that final sliver, so walk up to the edge and test
                a, b = t_lo, t
                for _ in range(60):
                    tm = 0.5 * (a + b)
                    if admissible(xm + tm * d):
                        a = tm
                    else:
                        b = tm
                if a > t_lo and sys.eta(xm + a * d) >= level:
                    t_hi = a
                break
            if sys.eta(x) >= level:
                t_hi = t
                break
            t_lo = t
            t *= 2.0
        if t_hi is None:
            continue
        for _ in range(80):  # bisect the bracket, then polish
            tm = 0.5 * (t_lo + t_hi)
            if sys.eta(xm + tm * d) >= level:
                t_hi = tm
            else:
                t_lo = tm
            if t_hi - t_lo < 1e-12 * span:
                break
        x = _correct_to_level(sys, level, xm + t_hi * d)
        if x is not None and _inside(x, lo, hi):
            return x
    raise EmptyLevelError(
        "the level set {eta = %g} does not meet the analysis window"
        % (level,))


def _march(sys, level, x0, sense, lo, hi):
    """March along the level curve from x0 with orientation `sense`
    (+1 ccw, -1 cw).  Returns (points, closed) where each point is
    (u, normal, ccw-tangent) and x0 itself is excluded.  Stops on
    closure (return to x0 after more than half a turn) or at the
    window/domain edge by step halving."""
    u = np.asarray(x0, dtype=float)
    start = u.copy()
    nu, tang, kappa = _frame_at(sys, u)
    t_dir = sense * tang
    t_init = t_dir.copy()
    points = []
    turning = 0.0
    h_cap = float(np.max(hi - lo)) / 40.0
    while True:
        h_try = min(h_cap, _TURN_TARGET / max(kappa, 1e-12))
        step = None
        while h_try >= _MIN_STEP:
            xc = _correct_to_level(sys, level, u + h_try * t_dir)
            if xc is not None and _inside(xc, lo, hi):
                nu2, tang2, kappa2 = _frame_at(sys, xc)
                t2 = sense * tang2
                ang = abs(math.atan2(t_dir[0] * t2[1] - t_dir[1] * t2[0],
                                     t_dir @ t2))
                if ang <= _TURN_BOUND:
                    step = (xc, nu2, t2, kappa2, ang)
                    break
            h_try *= 0.5
        if step is None:
            return points, False    # clipped at the window or domain edge
        xc, nu2, t2, kappa2, ang = step
        if turning > math.pi and t2 @ t_init > 0.5:
            # does the segment u -> xc pass the start point?
            w = xc - u
            s_proj = float(np.clip((start - u) @ w / (w @ w), 0.0, 1.0))
            if np.linalg.norm(start - (u + s_proj * w)) < 0.5 * np.linalg.norm(w):
                return points, True
        points.append((xc, nu2, t2))
        turning += ang
        u, t_dir, kappa = xc, t2, kappa2
        if len(points) > 500000:
            raise ContinuationError(
                "level-curve trace failed to close or leave the window",
                last_sample=u)


def trace_level_set(sys, level, seed=None, window=None):
    """Trace {eta = level} for the system's entropy (tilted systems
    carry the tilt in eta already).

    Starts from `seed` (corrected onto the level set) or from an
    automatically found point, marches counterclockwise, and either
    closes the curve or clips it at the analysis window, tracing the
    complementary direction so the visible portion is complete.
    """
    level = float(level)
    lo, hi = _window_of(sys, window)
    if seed is not None:
        x0 = _correct_to_level(sys, level, np.asarray(seed, dtype=float))
        if x0 is None or not _inside(x0, lo, hi):
            # distinguish a bad seed from an empty level
            _find_start(sys, level, lo, hi)  # raises EmptyLevelError if empty
            raise ContinuationError(
                "corrector failed to reach the level set from seed %s"
                % (np.asarray(seed).tolist(),), last_sample=seed)
    else:
        x0 = _find_start(sys, level, lo, hi)

    nu0, tang0, _ = _frame_at(sys, x0)
    forward, closed = _march(sys, level, x0, +1, lo, hi)
    chain = [(x0, nu0, tang0)] + forward
    clipped = False
    if not closed:
        backward, back_closed = _march(sys, level, x0, -1, lo, hi)
        if back_closed:
            raise ContinuationError(
                "level trace closed in one direction only", last_sample=x0)
        clipped = True
        # backward points were marched clockwise; reversing them and
        # flipping their stored direction recovers ccw order
        chain = [(u, nu, -t) for (u, nu, t) in backward][::-1] + chain

    samples = []
    t_acc = 0.0
    prev = None
    for u, nu, tang in chain:
        if prev is not None:
            t_acc += float(np.linalg.norm(u - prev))
        samples.append(LevelSample(t=t_acc, u=u, tangent=tang, normal=nu))
        prev = u
    c = np.asarray(sys.extras.get("tilt", np.zeros(2)), dtype=float)
    return LevelCurve(level=level, tilt=c, samples=samples, closed=closed,
                      clipped=clipped, window=(lo, hi))


def convexity_probe(curve, tol=1e-12):
    """Cross products of successive tangents along the curve; all
    nonnegative (within tol) for the boundary of a convex set traced
    counterclockwise.  Returns (ok, worst value, index)."""
    worst, worst_i = np.inf, -1
    for i, j in curve.segment_pairs():
        a = curve.samples[i].tangent
        b = curve.samples[j].tangent
        cr = float(a[0] * b[1] - a[1] * b[0])
        if cr < worst:
            worst, worst_i = cr, i
    return worst >= -tol, worst, worst_i


# ---------------------------------------------------------------------
# arc decomposition
# ---------------------------------------------------------------------

_PATTERN_TO_ARC = {(-1, -1): "I", (1, -1): "II", (1, 1): "III", (-1, 1): "IV"}


def _assign_cyclic(raw, closed):
    """Fill boundary samples (None entries) with the label of the next
    labeled sample, cyclically for closed curves, and backward for a
    trailing run on open curves."""
    n = len(raw)
    labels = list(raw)
    known = [i for i in range(n) if labels[i] is not None]
    if not known:
        return None
    for i in range(n):
        if labels[i] is not None:
            continue
        j = None
        if closed:
            for k in range(1, n):
                if labels[(i + k) % n] is not None:
                    j = labels[(i + k) % n]
                    break
        else:
            for k in range(i + 1, n):
                if labels[k] is not None:
                    j = labels[k]
                    break
            if j is None:
                for k in range(i - 1, -1, -1):
                    if labels[k] is not None:
                        j = labels[k]
                        break
        labels[i] = j
    return labels


def decompose(curve, sys, sectors):
    """Partition the level curve into arcs I-IV by the sign pattern of
    the outward normal in the (w_1, w_2) basis.

    Validates the sector inequalities along the curve with a chained
    eigenframe and raises DecompositionError with the witness point on
    failure."""
    w1 = np.asarray(sectors.w1, dtype=float)
    w2 = np.asarray(sectors.w2, dtype=float)
    m = np.column_stack([w1, w2])
    if abs(np.linalg.det(m)) < 1e-12:
        raise DecompositionError("sector vectors are collinear")
    minv = np.linalg.inv(m)

    raw = []
    boundary = []
    prev_frame = None
    for idx, sm in enumerate(curve.samples):
        fr = eigenframe(sys, sm.u, prev=prev_frame)
        prev_frame = fr
        if not (fr.r1 @ w1 < 0.0 and fr.r2 @ w1 > 0.0
                and fr.r1 @ w2 > 0.0 and fr.r2 @ w2 > 0.0):
            raise DecompositionError(
                "sector inequalities fail at sample %d" % (idx,),
                point=sm.u)
        b = minv @ sm.normal
        if min(abs(b[0]), abs(b[1])) <= _BOUNDARY_COEF:
            raw.append(None)
            boundary.append(idx)
        else:
            raw.append(_PATTERN_TO_ARC[(int(np.sign(b[0])),
                                        int(np.sign(b[1])))])
    labels = _assign_cyclic(raw, curve.closed)
    if labels is None:
        raise DecompositionError(
            "sector coefficients vanish along the whole curve",
            point=curve.samples[0].u)
    arcs = {name: np.array([i for i, lb in enumerate(labels) if lb == name],
                           dtype=int)
            for name in ARC_NAMES}
    return LevelDecomposition(labels=labels, arcs=arcs, sectors=sectors,
                              boundary_indices=np.array(boundary, dtype=int))


def qtilde_range_by_arc(sys, curve, decomp):
    """(min, max) of the entropy flux q over each nonempty arc."""
    qs = np.array([sys.q(sm.u) for sm in curve.samples])
    out = {}
    for name in ARC_NAMES:
        idx = decomp.arcs[name]
        if len(idx):
            out[name] = (float(qs[idx].min()), float(qs[idx].max()))
    return out


# ---------------------------------------------------------------------
# constrained critical points of the entropy flux
# ---------------------------------------------------------------------

def _flux_slope(sys, u):
    """d q / dt along the level curve (ccw) at a point on it."""
    g = sys.grad_eta(u)
    n = np.linalg.norm(g)
    tang = np.array([-g[1], g[0]]) / n
    return float(sys.grad_q(u) @ tang), tang


def _curve_point(sys, level, a, b, theta):
    """Corrected curve point between neighboring samples a, b at chord
    fraction theta."""
    x = _correct_to_level(sys, level, a.u + theta * (b.u - a.u))
    if x is None:
        raise ContinuationError(
            "corrector failed between level-curve samples",
            last_sample=a.u)
    return x


def _classify(before, after):
    if before > 0.0 and after < 0.0:
        return "max"
    if before < 0.0 and after > 0.0:
        return "min"
    return "degenerate"


def _lagrange_residual(sys, u):
    """Alignment of grad eta with a left eigenvector of Df (unit cross
    product magnitude, minimized over the two families)."""
    fr = eigenframe(sys, u)
    g = sys.grad_eta(u)
    g = g / np.linalg.norm(g)
    res = []
    for l in (fr.l1, fr.l2):
        ln = l / np.linalg.norm(l)
        res.append(abs(g[0] * ln[1] - g[1] * ln[0]))
    return float(min(res))


def _second_derivative(sys, level, u, scale):
    """d^2 q / dt^2 along the curve by central differencing the slope."""
    delta = 1e-5 * max(1.0, scale)
    _, tang = _flux_slope(sys, u)
    xp = _correct_to_level(sys, level, u + delta * tang)
    xm = _correct_to_level(sys, level, u - delta * tang)
    if xp is None or xm is None:
        return float("nan")
    gp, _ = _flux_slope(sys, xp)
    gm, _ = _flux_slope(sys, xm)
    return (gp - gm) / (2.0 * delta)


def qtilde_extrema(sys, curve):
    """Critical points of the entropy flux q restricted to the level
    curve.

    Sign changes of dq/dt between samples are bisected to 1e-10; exact
    zeros at samples are taken as critical points directly; runs of
    near-zero slope are reported as a single degenerate point rather
    than silently classified.  Each point carries the Lagrange residual
    (grad eta must align with a left eigenvector there) and the second
    derivative of q along the curve.
    """
    n = len(curve.samples)
    if n < 3:
        raise ValueError("level curve has too few samples")
    slopes = np.empty(n)
    for i, sm in enumerate(curve.samples):
        slopes[i], _ = _flux_slope(sys, sm.u)
    scale = max(1.0, float(np.max(np.abs(slopes))))
    ztol = 1e-12 * scale

    out = []
    zero = np.abs(slopes) <= ztol

    # degenerate plateaus: consecutive near-zero slopes
    i = 0
    plateau = np.zeros(n, dtype=bool)
    while i < n:
        if zero[i]:
            j = i
            while j + 1 < n and zero[j + 1]:
                j += 1
            if j > i:
                plateau[i:j + 1] = True
                mid = curve.samples[(i + j) // 2]
                out.append(CriticalPoint(
                    u=mid.u, value=float(sys.q(mid.u)), kind="degenerate",
                    lagrange_residual=_lagrange_residual(sys, mid.u),
                    second_derivative=0.0, t=mid.t))
            i = j + 1
        else:
            i += 1

    span = max(1.0, float(np.max(np.abs(curve.states()))))

    # isolated exact zeros at samples
    for i in range(n):
        if zero[i] and not plateau[i]:
            before = slopes[(i - 1) % n] if (curve.closed or i > 0) else 0.0
            after = slopes[(i + 1) % n] if (curve.closed or i + 1 < n) else 0.0
            sm = curve.samples[i]
            out.append(CriticalPoint(
                u=sm.u, value=float(sys.q(sm.u)),
                kind=_classify(before, after),
                lagrange_residual=_lagrange_residual(sys, sm.u),
                second_derivative=_second_derivative(sys, curve.level,
                                                     sm.u, span),
                t=sm.t))

    # sign changes between samples: bisect on the curve
    for i, j in curve.segment_pairs():
        si, sj = slopes[i], slopes[j]
        if zero[i] or zero[j] or si * sj > 0.0:
            continue
        a, b = curve.samples[i], curve.samples[j]
        seg = float(np.linalg.norm(b.u - a.u))
        th_lo, th_hi = 0.0, 1.0
        g_lo = si
        while (th_hi - th_lo) * seg > 1e-10:
            th = 0.5 * (th_lo + th_hi)
            x = _curve_point(sys, curve.level, a, b, th)
            g, _ = _flux_slope(sys, x)
            if g == 0.0:
                th_lo = th_hi = th
                break
            if g * g_lo > 0.0:
                th_lo, g_lo = th, g
            else:
                th_hi = th
        th = 0.5 * (th_lo + th_hi)
        x = _curve_point(sys, curve.level, a, b, th)
        out.append(CriticalPoint(
            u=x, value=float(sys.q(x)), kind=_classify(si, sj),
            lagrange_residual=_lagrange_residual(sys, x),
            second_derivative=_second_derivative(sys, curve.level, x, span),
            t=a.t + th * seg))

    out.sort(key=lambda cp: cp.t)
    return out
