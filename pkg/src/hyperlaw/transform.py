"""Eulerian/Lagrangian change of variables for 2x2 systems.

The state map V = (1/u_1, u_2/u_1) is an involution between the strip
{eps < u_1 < M} and {1/M < v_1 < 1/eps}.  Under it a system transforms
to

    flux       (-v_1 f_1(U),  f_2(U) - v_2 f_1(U))
    entropy    eta_hat(V) = v_1 eta(U)
    ent. flux  q_hat(V)  = q(U) - f_1(U) eta_hat(V)

with U = U(V); weak solutions correspond one to one, shock speeds map
as sigma_hat = sigma u_1 - f_1, and eta_hat is convex at V exactly
where eta is convex at U (the Hessians are congruent:
hess eta_hat = (1/v_1) B^T hess eta B with B = [e_2 | -U] up to
coordinate order).  All target derivatives are closed-form chain
rules; nothing is differenced.

The transform acts on the constitutive level only — fluxes and entropy
pairs are recomposed; no solution fields are moved.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .systems import Domain, SystemDef, make_system

_E1 = np.array([1.0, 0.0])
_E2 = np.array([0.0, 1.0])


def wagner_map(u):
    """The involutive state map (u_1, u_2) -> (1/u_1, u_2/u_1)."""
    u = np.asarray(u, dtype=float)
    if u[0] == 0.0:
        raise DomainError("state map undefined at u_1 = 0", point=u)
    return np.array([1.0 / u[0], u[1] / u[0]])


def _chart(V):
    """Source state, Jacobian dU/dV, and the two coordinate Hessians
    of U(V) = (1/v_1, v_2/v_1)."""
    v1, v2 = float(V[0]), float(V[1])
    u = np.array([1.0 / v1, v2 / v1])
    J = np.array([[-1.0 / v1 ** 2, 0.0],
                  [-v2 / v1 ** 2, 1.0 / v1]])
    H1 = np.array([[2.0 / v1 ** 3, 0.0], [0.0, 0.0]])
    H2 = np.array([[2.0 * v2 / v1 ** 3, -1.0 / v1 ** 2],
                   [-1.0 / v1 ** 2, 0.0]])
    return u, J, (H1, H2)


def _target_fns(src):
    """Closed-form flux/entropy functions of the transformed system."""

    def comp(grad_u, J):
        return J.T @ grad_u

    def comp_hess(hess_u, grad_u, J, HU):
        return (J.T @ hess_u @ J + grad_u[0] * HU[0] + grad_u[1] * HU[1])

    def f(V):
        u, _, _ = _chart(V)
        fv = src.f(u)
        return np.array([-V[0] * fv[0], fv[1] - V[1] * fv[0]])

    def df(V):
        u, J, _ = _chart(V)
        fv = src.f(u)
        dfv = src.df(u)
        g1 = comp(dfv[0], J)
        g2 = comp(dfv[1], J)
        r1 = -(_E1 * fv[0] + V[0] * g1)
        r2 = g2 - _E2 * fv[0] - V[1] * g1
        return np.array([r1, r2])

    def d2f(V):
        u, J, HU = _chart(V)
        dfv = src.df(u)
        d2fv = src.d2f_tensor(u)
        g1 = comp(dfv[0], J)
        g2 = comp(dfv[1], J)
        h1 = comp_hess(d2fv[0], dfv[0], J, HU)
        h2 = comp_hess(d2fv[1], dfv[1], J, HU)
        H1 = -(V[0] * h1 + np.outer(_E1, g1) + np.outer(g1, _E1))
        H2 = h2 - V[1] * h1 - np.outer(_E2, g1) - np.outer(g1, _E2)
        return np.array([H1, H2])

    def eta(V):
        u, _, _ = _chart(V)
        return V[0] * src.eta(u)

    def grad_eta(V):
        u, J, _ = _chart(V)
        ge = comp(src.grad_eta(u), J)
        return _E1 * src.eta(u) + V[0] * ge

    def hess_eta(V):
        u, J, HU = _chart(V)
        ge = comp(src.grad_eta(u), J)
        he = comp_hess(src.hess_eta(u), src.grad_eta(u), J, HU)
        return V[0] * he + np.outer(_E1, ge) + np.outer(ge, _E1)

    def q(V):
        u, _, _ = _chart(V)
        return src.q(u) - src.f(u)[0] * V[0] * src.eta(u)

    def grad_q(V):
        u, J, _ = _chart(V)
        a = src.f(u)[0]
        ga = comp(src.df(u)[0], J)
        b = V[0] * src.eta(u)
        gb = _E1 * src.eta(u) + V[0] * comp(src.grad_eta(u), J)
        return comp(src.grad_q(u), J) - (b * ga + a * gb)

    def hess_q(V):
        u, J, HU = _chart(V)
        a = src.f(u)[0]
        ga = comp(src.df(u)[0], J)
        ha = comp_hess(src.d2f_tensor(u)[0], src.df(u)[0], J, HU)
        ge = comp(src.grad_eta(u), J)
        b = V[0] * src.eta(u)
        gb = _E1 * src.eta(u) + V[0] * ge
        hb = (V[0] * comp_hess(src.hess_eta(u), src.grad_eta(u), J, HU)
              + np.outer(_E1, ge) + np.outer(ge, _E1))
        hq = comp_hess(src.hess_q(u), src.grad_q(u), J, HU)
        return hq - (b * ha + np.outer(ga, gb) + np.outer(gb, ga) + a * hb)

    return {"f": f, "df": df, "d2f": d2f, "eta": eta,
            "grad_eta": grad_eta, "hess_eta": hess_eta,
            "q": q, "grad_q": grad_q, "hess_q": hess_q}


@dataclass
class TransformRecord:
    """Provenance of one transform: direction, endpoints and strip."""
    direction: str
    source: SystemDef
    target: SystemDef
    strip: tuple

    def state_map(self, u):
        return wagner_map(u)

    def inverse_map(self, v):
        return wagner_map(v)

    def as_record(self):
        """Config record rebuilding the target via make_system."""
        return self.target.spec_record()


def _build(src, strip, direction):
    eps, M = float(strip[0]), float(strip[1])
    if eps <= 0.0:
        raise DomainError("validity strip touches u_1 = 0: eps = %g" % eps)
    if not eps < M:
        raise ConfigurationError("strip needs eps < M, got (%g, %g)"
                                 % (eps, M))
    lo, hi = src.window
    mid2 = 0.5 * (lo[1] + hi[1])
    probe = 1e-9 * (M - eps)
    for u1 in (eps + probe, 0.5 * (eps + M), M - probe):
        if not src.contains((u1, mid2)):
            raise DomainError(
                "strip (%g, %g) leaves the source domain at u_1 = %g"
                % (eps, M, u1), point=np.array([u1, mid2]))
    # effective strip of the source window, for the target window
    a_lo, a_hi = max(eps, lo[0]), min(M, hi[0])
    if not a_lo < a_hi:
        raise ConfigurationError(
            "strip (%g, %g) does not meet the window u_1 range (%g, %g)"
            % (eps, M, lo[0], hi[0]))
    v1_lo, v1_hi = 1.0 / a_hi, 1.0 / a_lo
    corners = [lo[1] / a_lo, lo[1] / a_hi, hi[1] / a_lo, hi[1] / a_hi]
    v2_lo, v2_hi = min(corners), max(corners)
    inset = 1e-9 * (v1_hi - v1_lo)
    window = ([max(v1_lo, 1.0 / M) + inset, v2_lo],
              [min(v1_hi, 1.0 / eps) - inset, v2_hi])
    domain = Domain.box([1.0 / M, -math.inf], [1.0 / eps, math.inf])
    label = ("lagrangian(%s)" if direction == "to-lagrangian"
             else "eulerian(%s)") % src.label
    params = {"direction": direction, "source": src.spec_record(),
              "strip": [eps, M]}
    target = SystemDef("transformed", params, label, domain, window,
                       _target_fns(src))
    record = TransformRecord(direction, src, target, (eps, M))
    target.extras["transform"] = record
    return target, record


def to_lagrangian(sys, strip):
    """Transformed system on the strip eps <= u_1 <= M, plus the
    provenance record.  Raises DomainError when the strip touches
    u_1 = 0 or leaves the source domain."""
    return _build(sys, strip, "to-lagrangian")


def to_eulerian(sys, strip=None):
    """Inverse direction.  When `sys` came out of to_lagrangian the
    strip defaults to the image of the original one (the map is an
    involution); otherwise bounds on the current first component must
    be given."""
    if strip is None:
        rec = sys.extras.get("transform")
        if rec is None:
            raise ConfigurationError(
                "strip required: system has no transform provenance")
        eps, M = rec.strip
        strip = (1.0 / M, 1.0 / eps)
    return _build(sys, strip, "to-eulerian")


def system_from_record(params):
    """Rebuild a transformed system from its config record (the hook
    behind make_system(\"transformed\", ...))."""
    try:
        direction = params["direction"]
        source = make_system(params["source"])
        strip = tuple(params["strip"])
    except KeyError as e:
        raise ConfigurationError("transformed record missing %s" % (e,))
    if direction == "to-lagrangian":
        return to_lagrangian(source, strip)[0]
    if direction == "to-eulerian":
        return to_eulerian(source, strip)[0]
    raise ConfigurationError("unknown transform direction %r" % (direction,))


# ---------------------------------------------------------------------
# shock correspondence
# ---------------------------------------------------------------------

@dataclass
class CorrespondenceVerdict:
    """Shock correspondence outcome; truthy when the mapped pair
    satisfies the target jump relation and dissipation keeps its
    sign."""
    ok: bool
    trivial: bool
    target_sigma: float
    rh_residual: float
    sigma_formula_gap: float      # |solved sigma_hat - (sigma u_1 - f_1)|
    source_dissipation: float
    target_dissipation: float

    def __bool__(self):
        return self.ok


def _dissipation(sys, ul, ur, sigma):
    # same convention as the shock tracer: [q] - sigma [eta], jumps
    # taken value-at-ur minus value-at-ul
    return (sys.q(ur) - sys.q(ul)
            - sigma * (sys.eta(ur) - sys.eta(ul)))


def shock_correspondence_check(record, shock, rh_tol=1e-6):
    """Map a source shock through the record and verify the target
    jump relation and the sign of the entropy dissipation.

    The input must satisfy the source jump relation within 1e-8; a
    trivial shock (equal states) maps to a trivial shock and any speed
    is admissible."""
    ul, ur, sigma = (np.asarray(shock[0], dtype=float),
                     np.asarray(shock[1], dtype=float),
                     float(shock[2]))
    src, tgt = record.source, record.target
    eps, M = record.strip
    for u in (ul, ur):
        if not (eps < u[0] < M):
            raise DomainError("state %s outside the validity strip (%g, %g)"
                              % (u.tolist(), eps, M), point=u)
    scale = max(1.0, float(np.linalg.norm(ul)), float(np.linalg.norm(ur)))
    if np.linalg.norm(ul - ur) <= 1e-12 * scale:
        return CorrespondenceVerdict(True, True, sigma * ul[0] - src.f(ul)[0],
                                     0.0, 0.0, 0.0, 0.0)
    rh_src = sigma * (ul - ur) - (src.f(ul) - src.f(ur))
    if np.linalg.norm(rh_src) > 1e-8 * scale:
        raise ValueError("input violates the source jump relation: |res| = %g"
                         % np.linalg.norm(rh_src))
    vl, vr = record.state_map(ul), record.state_map(ur)
    dv = vl - vr
    dF = tgt.f(vl) - tgt.f(vr)
    sigma_hat = float(dv @ dF) / float(dv @ dv)
    rh_res = float(np.linalg.norm(sigma_hat * dv - dF)) / max(
        1.0, float(np.linalg.norm(dF)))
    formula = sigma * ul[0] - src.f(ul)[0]
    gap = abs(sigma_hat - formula) / max(1.0, abs(formula))
    d_src = float(_dissipation(src, ul, ur, sigma))
    d_tgt = float(_dissipation(tgt, vl, vr, sigma_hat))
    band = 1e-10 * scale
    sign_ok = ((abs(d_src) <= band and abs(d_tgt) <= band)
               or d_src * d_tgt > 0.0)
    ok = bool(rh_res < rh_tol and sign_ok)
    return CorrespondenceVerdict(ok, False, sigma_hat, rh_res, gap,
                                 d_src, d_tgt)


# ---------------------------------------------------------------------
# convexity transfer
# ---------------------------------------------------------------------

@dataclass
class ConvexityTransferReport:
    """Pointwise convexity comparison across the transform."""
    samples: int
    agreements: int
    disagreements: list            # (point, min eig source, min eig target)
    worst_margin: float            # smallest |min eig| among agreements

    def __bool__(self):
        return not self.disagreements


def convexity_transfer_check(record, n=1000, seed=0, band=1e-9):
    """Sample the strip and compare positive-definiteness of the
    entropy Hessian at U against the transformed entropy Hessian at
    V(U); the theorem makes these equivalent pointwise.  Points where
    either minimum eigenvalue sits within the neutral band are skipped
    as undecided."""
    src, tgt = record.source, record.target
    eps, M = record.strip
    lo, hi = src.window
    a_lo, a_hi = max(eps, lo[0]), min(M, hi[0])
    rng = np.random.default_rng(seed)
    agree = 0
    used = 0
    worst = math.inf
    bad = []
    while used < n:
        u = np.array([rng.uniform(a_lo, a_hi), rng.uniform(lo[1], hi[1])])
        if not src.contains(u):
            continue
        v = record.state_map(u)
        es = float(np.linalg.eigvalsh(src.hess_eta(u))[0])
        et = float(np.linalg.eigvalsh(tgt.hess_eta(v))[0])
        if abs(es) <= band or abs(et) <= band:
            continue
        used += 1
        if (es > 0.0) == (et > 0.0):
            agree += 1
            worst = min(worst, abs(es), abs(et))
        else:
            bad.append((u.copy(), es, et))
    return ConvexityTransferReport(used, agree, bad, worst)
