"""Catalog of 2x2 conservation-law systems with convex entropy pairs.

Each system bundles the flux f, its derivatives, an entropy pair
(eta, q) satisfying the compatibility relation

    grad q = grad eta . Df,

and a state-space domain.  The constitutive matrix map

    G(U) = [[u_1, f_1(U)], [u_2, f_2(U)], [eta(U), q(U)]]

and the tilting operation eta~ = eta + c.U, q~ = q + c.f live here too.

Catalog entries (all closed-form, cross-checked against finite
differences in the tests):

* p_system        dt v - dx u = 0, dt u + dx p(v) = 0, state (v, u),
                  pressure families -a e^{bv} | a v^{-b} (v>0) | -a (v+v0)^b
* gradient_flux   dt v + dx eta_u = 0, dt u + dx eta_v = 0, state (v, u),
                  eta a sum of exponentials or a quadratic form
* isentropic_euler / gamma_law / shallow_water
                  conserved state (rho, m), flux (m, m^2/rho + P(rho))
* two_burgers     decoupled scalar fluxes with a separable entropy

Antiderivative constants are fixed family by family: the natural
closed form with zero integration constants (e.g. p = -e^v gives
E(v) = e^v, the gamma-law gives S = kappa rho^gamma/(gamma-1));
log-bearing cases anchor at v = 1 or rho = 1.
"""

import math

import numpy as np

from .errors import ConfigurationError, DomainError


class Domain:
    """Open convex subset of the state plane: the whole plane, a
    halfplane u[axis] > lower, or an open box."""

    def __init__(self, kind, axis=0, lower=None, lo=None, hi=None):
        self.kind = kind
        self.axis = axis
        self.lower = lower
        self.lo = None if lo is None else np.asarray(lo, dtype=float)
        self.hi = None if hi is None else np.asarray(hi, dtype=float)

    @classmethod
    def plane(cls):
        return cls("plane")

    @classmethod
    def halfplane(cls, axis, lower):
        return cls("halfplane", axis=axis, lower=float(lower))

    @classmethod
    def box(cls, lo, hi):
        return cls("box", lo=lo, hi=hi)

    def contains(self, u):
        u = np.asarray(u, dtype=float)
        if not np.all(np.isfinite(u)):
            return False
        if self.kind == "plane":
            return True
        if self.kind == "halfplane":
            return bool(u[self.axis] > self.lower)
        return bool(np.all(u > self.lo) and np.all(u < self.hi))

    def describe(self):
        if self.kind == "plane":
            return "all-plane"
        if self.kind == "halfplane":
            return "u%d > %g" % (self.axis + 1, self.lower)
        return "box %s x %s" % (list(self.lo), list(self.hi))

    def as_record(self):
        if self.kind == "plane":
            return {"kind": "plane"}
        if self.kind == "halfplane":
            return {"kind": "halfplane", "axis": self.axis, "lower": self.lower}
        # infinite bounds serialize as null so records stay JSON-clean
        cell = lambda x: float(x) if math.isfinite(x) else None
        return {"kind": "box", "lo": [cell(x) for x in self.lo],
                "hi": [cell(x) for x in self.hi]}


def domain_from_record(rec):
    kind = rec.get("kind", "box")
    if kind == "plane":
        return Domain.plane()
    if kind == "halfplane":
        return Domain.halfplane(int(rec.get("axis", 0)), rec["lower"])
    if kind == "box":
        fill = lambda xs, inf: [inf if x is None else x for x in xs]
        return Domain.box(fill(rec["lo"], -math.inf),
                          fill(rec["hi"], math.inf))
    raise ConfigurationError("unknown domain kind %r" % (kind,))


class SystemDef:
    """A 2x2 flux with entropy pair and derivatives up to second order.

    All evaluation methods take a length-2 state and raise DomainError
    outside the open domain.  Instances are immutable by convention.
    """

    def __init__(self, kind, params, label, domain, window, fns, extras=None):
        self.kind = kind
        self.params = dict(params)
        self.label = label
        self.domain = domain
        #: default analysis window (lo, hi arrays), always inside the domain
        self.window = (np.asarray(window[0], dtype=float),
                       np.asarray(window[1], dtype=float))
        self._fns = fns
        self.extras = extras or {}

    # -- evaluation ----------------------------------------------------

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (2,):
            raise ValueError("state must be a 2-vector, got shape %r"
                             % (u.shape,))
        if not self.domain.contains(u):
            raise DomainError("state %s outside domain (%s)"
                              % (u.tolist(), self.domain.describe()), point=u)
        return u

    def f(self, u):
        return self._fns["f"](self._check(u))

    def df(self, u):
        return self._fns["df"](self._check(u))

    def d2f_tensor(self, u):
        """Second derivative of the flux: array H with H[k] the 2x2
        Hessian of f_k."""
        return self._fns["d2f"](self._check(u))

    def d2f(self, u, d1, d2):
        """Directional second derivative D^2 f(U)(d1, d2) as a 2-vector."""
        h = self._fns["d2f"](self._check(u))
        d1 = np.asarray(d1, dtype=float)
        d2 = np.asarray(d2, dtype=float)
        return np.array([d1 @ h[0] @ d2, d1 @ h[1] @ d2])

    def eta(self, u):
        return self._fns["eta"](self._check(u))

    def grad_eta(self, u):
        return self._fns["grad_eta"](self._check(u))

    def hess_eta(self, u):
        return self._fns["hess_eta"](self._check(u))

    def q(self, u):
        return self._fns["q"](self._check(u))

    def grad_q(self, u):
        return self._fns["grad_q"](self._check(u))

    def hess_q(self, u):
        return self._fns["hess_q"](self._check(u))

    # -- bookkeeping ---------------------------------------------------

    def contains(self, u):
        return self.domain.contains(u)

    def spec_record(self):
        return {"kind": self.kind, "params": dict(self.params),
                "domain": self.domain.as_record()}

    def __repr__(self):
        return "<SystemDef %s>" % (self.label,)


# ---------------------------------------------------------------------
# p-system
# ---------------------------------------------------------------------

def _pressure(params):
    """Return (p, p', p'', E, domain, label) for the named family.
    E is the entropy antiderivative with E' = -p."""
    family = params.get("family", "exp")
    a = float(params.get("a", 1.0))
    b = float(params.get("b", 1.0))
    if a <= 0.0 or b <= 0.0:
        raise ConfigurationError("p-system families need a > 0, b > 0; "
                                 "got a=%g, b=%g" % (a, b))
    if family == "exp":
        # p = -a e^{bv}
        p = lambda v: -a * math.exp(b * v)
        dp = lambda v: -a * b * math.exp(b * v)
        d2p = lambda v: -a * b * b * math.exp(b * v)
        ee = lambda v: (a / b) * math.exp(b * v)
        dom = Domain.plane()
        label = "p(v)=-%g*exp(%g v)" % (a, b)
    elif family == "power":
        # p = a v^{-b} on v > 0
        p = lambda v: a * v ** (-b)
        dp = lambda v: -a * b * v ** (-b - 1.0)
        d2p = lambda v: a * b * (b + 1.0) * v ** (-b - 2.0)
        if b == 1.0:
            ee = lambda v: -a * math.log(v)
        else:
            ee = lambda v: a * v ** (1.0 - b) / (b - 1.0)
        dom = Domain.halfplane(0, 0.0)
        label = "p(v)=%g*v^-%g" % (a, b)
    elif family == "shifted_power":
        v0 = float(params.get("v0", 0.0))
        # p = -a (v+v0)^b on v > -v0
        p = lambda v: -a * (v + v0) ** b
        dp = lambda v: -a * b * (v + v0) ** (b - 1.0)
        d2p = lambda v: -a * b * (b - 1.0) * (v + v0) ** (b - 2.0)
        ee = lambda v: a * (v + v0) ** (b + 1.0) / (b + 1.0)
        dom = Domain.halfplane(0, -v0)
        label = "p(v)=-%g*(v+%g)^%g" % (a, v0, b)
    else:
        raise ConfigurationError("unknown p-system family %r" % (family,))
    return p, dp, d2p, ee, dom, label


def _p_system(params, domain):
    p, dp, d2p, ee, dom, label = _pressure(params)
    if domain is not None:
        dom = domain
    fns = {
        "f": lambda u: np.array([-u[1], p(u[0])]),
        "df": lambda u: np.array([[0.0, -1.0], [dp(u[0]), 0.0]]),
        "d2f": lambda u: np.array([[[0.0, 0.0], [0.0, 0.0]],
                                   [[d2p(u[0]), 0.0], [0.0, 0.0]]]),
        "eta": lambda u: 0.5 * u[1] * u[1] + ee(u[0]),
        "grad_eta": lambda u: np.array([-p(u[0]), u[1]]),
        "hess_eta": lambda u: np.array([[-dp(u[0]), 0.0], [0.0, 1.0]]),
        "q": lambda u: u[1] * p(u[0]),
        "grad_q": lambda u: np.array([u[1] * dp(u[0]), p(u[0])]),
        "hess_q": lambda u: np.array([[u[1] * d2p(u[0]), dp(u[0])],
                                      [dp(u[0]), 0.0]]),
    }
    fam = params.get("family", "exp")
    if fam == "exp":
        window = ([-3.0, -3.0], [3.0, 3.0])
    elif fam == "power":
        window = ([0.2, -3.0], [4.0, 3.0])
    else:
        v0 = float(params.get("v0", 0.0))
        window = ([-v0 + 0.2, -3.0], [-v0 + 4.0, 3.0])
    extras = {"pressure": p, "dpressure": dp, "d2pressure": d2p}
    return SystemDef("p_system", params, "p_system[%s]" % label, dom,
                     window, fns, extras=extras)


# ---------------------------------------------------------------------
# gradient-flux system: f = (eta_u, eta_v), q = eta_u eta_v
# ---------------------------------------------------------------------

def _gf_partials_exp(terms):
    """terms: list of (coef, wv, wu) meaning coef * exp(wv*v + wu*u).
    Returns a closure computing all partials of eta up to third order."""
    def partials(u):
        v, w = u[0], u[1]
        out = np.zeros(10)  # eta, ev, eu, evv, euv, euu, evvv, euvv, euuv, euuu
        for coef, wv, wu in terms:
            e = coef * math.exp(wv * v + wu * w)
            out += e * np.array([1.0, wv, wu, wv * wv, wv * wu, wu * wu,
                                 wv ** 3, wv * wv * wu, wv * wu * wu, wu ** 3])
        return out
    return partials


def _gf_partials_quadratic(aa, bb, cc):
    def partials(u):
        v, w = u[0], u[1]
        eta = 0.5 * (aa * v * v + 2.0 * bb * v * w + cc * w * w)
        return np.array([eta, aa * v + bb * w, bb * v + cc * w,
                         aa, bb, cc, 0.0, 0.0, 0.0, 0.0])
    return partials


def _gradient_flux(params, domain):
    form = params.get("form", "exp")
    if form == "exp":
        a = float(params.get("a", 1.0))
        alpha = float(params.get("alpha", 1.0))
        b = float(params.get("b", 1.0))
        beta = float(params.get("beta", 1.0))
        c = float(params.get("c", 0.0))
        gamma = float(params.get("gamma", 1.0))
        d = float(params.get("d", 0.0))
        delta = float(params.get("delta", 1.0))
        eps = float(params.get("eps", -1.0))
        if a <= 0 or b <= 0 or c < 0 or d < 0 or alpha == 0 or beta == 0:
            raise ConfigurationError(
                "gradient_flux exp form needs a,b > 0, c,d >= 0, "
                "alpha,beta != 0")
        terms = [(a, alpha, 0.0), (b, 0.0, beta)]
        if c > 0:
            terms.append((c, gamma, gamma))
        if d > 0:
            terms.append((d, delta, eps))
        partials = _gf_partials_exp(terms)
        label = "gradient_flux[exp a=%g,alpha=%g,b=%g,beta=%g,c=%g,gamma=%g" \
                % (a, alpha, b, beta, c, gamma)
        label += ",d=%g,delta=%g,eps=%g]" % (d, delta, eps) if d > 0 else "]"
    elif form == "quadratic":
        aa = float(params.get("A", 1.0))
        bb = float(params.get("B", 0.0))
        cc = float(params.get("C", 1.0))
        if aa <= 0 or aa * cc - bb * bb <= 0:
            raise ConfigurationError("quadratic form must be positive "
                                     "definite: A > 0, AC - B^2 > 0")
        partials = _gf_partials_quadratic(aa, bb, cc)
        label = "gradient_flux[quadratic A=%g,B=%g,C=%g]" % (aa, bb, cc)
    else:
        raise ConfigurationError("unknown gradient_flux form %r" % (form,))

    def unpack(u):
        return partials(u)

    def f(u):
        p = unpack(u)
        return np.array([p[2], p[1]])          # (eta_u, eta_v)

    def df(u):
        p = unpack(u)
        return np.array([[p[4], p[5]], [p[3], p[4]]])

    def d2f(u):
        p = unpack(u)
        h_fu = np.array([[p[7], p[8]], [p[8], p[9]]])   # Hessian of eta_u
        h_fv = np.array([[p[6], p[7]], [p[7], p[8]]])   # Hessian of eta_v
        return np.array([h_fu, h_fv])

    def eta(u):
        return unpack(u)[0]

    def grad_eta(u):
        p = unpack(u)
        return np.array([p[1], p[2]])

    def hess_eta(u):
        p = unpack(u)
        return np.array([[p[3], p[4]], [p[4], p[5]]])

    def q(u):
        p = unpack(u)
        return p[1] * p[2]

    def grad_q(u):
        p = unpack(u)
        return np.array([p[4] * p[1] + p[2] * p[3],
                         p[5] * p[1] + p[2] * p[4]])

    def hess_q(u):
        p = unpack(u)
        qvv = p[7] * p[1] + 2.0 * p[4] * p[3] + p[2] * p[6]
        quv = p[8] * p[1] + p[4] * p[4] + p[5] * p[3] + p[2] * p[7]
        quu = p[9] * p[1] + 2.0 * p[5] * p[4] + p[2] * p[8]
        return np.array([[qvv, quv], [quv, quu]])

    dom = domain if domain is not None else Domain.plane()
    fns = {"f": f, "df": df, "d2f": d2f, "eta": eta, "grad_eta": grad_eta,
           "hess_eta": hess_eta, "q": q, "grad_q": grad_q, "hess_q": hess_q}
    return SystemDef("gradient_flux", params, label, dom,
                     ([-2.0, -2.0], [2.0, 2.0]), fns)


# ---------------------------------------------------------------------
# isentropic Euler in conserved variables (rho, m)
# ---------------------------------------------------------------------

def _euler_pressure(params):
    """P as a sum of up to two power terms kappa_i rho^{gamma_i}."""
    terms = []
    k1 = float(params.get("kappa", params.get("kappa1", 1.0)))
    g1 = float(params.get("gamma", params.get("gamma1", 2.0)))
    terms.append((k1, g1))
    if "kappa2" in params:
        terms.append((float(params["kappa2"]), float(params.get("gamma2", 1.0))))
    for k, g in terms:
        if k <= 0 or g <= 0:
            raise ConfigurationError("pressure terms need kappa > 0, "
                                     "gamma > 0; got kappa=%g gamma=%g" % (k, g))
    return terms


def _euler_entropy_terms(terms):
    """Entropic integral S with S'' = P'(rho)/rho, natural constants
    (base point rho=1 for the gamma=1 log case)."""
    def s(r):
        tot = 0.0
        for k, g in terms:
            if g == 1.0:
                tot += k * (r * math.log(r) - r)
            else:
                tot += k * r ** g / (g - 1.0)
        return tot

    def ds(r):
        tot = 0.0
        for k, g in terms:
            if g == 1.0:
                tot += k * math.log(r)
            else:
                tot += k * g * r ** (g - 1.0) / (g - 1.0)
        return tot

    def d2s(r):
        return sum(k * g * r ** (g - 2.0) for k, g in terms)

    def d3s(r):
        return sum(k * g * (g - 2.0) * r ** (g - 3.0) for k, g in terms)

    return s, ds, d2s, d3s


def _isentropic_euler(params, domain, kind="isentropic_euler"):
    terms = _euler_pressure(params)
    rho_min = float(params.get("rho_min", 1e-3))
    if rho_min <= 0:
        raise ConfigurationError("rho_min must be positive")
    s, ds, d2s, d3s = _euler_entropy_terms(terms)
    pp = lambda r: sum(k * r ** g for k, g in terms)
    dpp = lambda r: sum(k * g * r ** (g - 1.0) for k, g in terms)
    d2pp = lambda r: sum(k * g * (g - 1.0) * r ** (g - 2.0) for k, g in terms)

    def f(u):
        r, m = u
        return np.array([m, m * m / r + pp(r)])

    def df(u):
        r, m = u
        return np.array([[0.0, 1.0],
                         [-(m * m) / (r * r) + dpp(r), 2.0 * m / r]])

    def d2f(u):
        r, m = u
        h2 = np.array([[2.0 * m * m / r ** 3 + d2pp(r), -2.0 * m / r ** 2],
                       [-2.0 * m / r ** 2, 2.0 / r]])
        return np.array([np.zeros((2, 2)), h2])

    def eta(u):
        r, m = u
        return m * m / (2.0 * r) + s(r)

    def grad_eta(u):
        r, m = u
        return np.array([-m * m / (2.0 * r * r) + ds(r), m / r])

    def hess_eta(u):
        r, m = u
        return np.array([[m * m / r ** 3 + d2s(r), -m / r ** 2],
                         [-m / r ** 2, 1.0 / r]])

    def q(u):
        r, m = u
        return m ** 3 / (2.0 * r * r) + m * ds(r)

    def grad_q(u):
        r, m = u
        return np.array([-m ** 3 / r ** 3 + m * d2s(r),
                         1.5 * m * m / (r * r) + ds(r)])

    def hess_q(u):
        r, m = u
        return np.array([[3.0 * m ** 3 / r ** 4 + m * d3s(r),
                          -3.0 * m * m / r ** 3 + d2s(r)],
                         [-3.0 * m * m / r ** 3 + d2s(r), 3.0 * m / (r * r)]])

    dom = domain if domain is not None else Domain.halfplane(0, rho_min)
    fns = {"f": f, "df": df, "d2f": d2f, "eta": eta, "grad_eta": grad_eta,
           "hess_eta": hess_eta, "q": q, "grad_q": grad_q, "hess_q": hess_q}
    plabel = "+".join("%g*rho^%g" % (k, g) for k, g in terms)
    extras = {
        "primitive": lambda u: (u[0], u[1] / u[0]),
        "from_primitive": lambda rv: np.array([rv[0], rv[0] * rv[1]]),
        "pressure": pp,
        "dpressure": dpp,
    }
    return SystemDef(kind, params, "%s[P=%s]" % (kind, plabel), dom,
                     ([0.2, -3.0], [4.0, 3.0]), fns, extras=extras)


def _two_burgers(params, domain):
    def cubic(tag):
        c = float(params.get("c" + tag, 0.0))
        a = float(params.get("a" + tag, 1.0))
        b = float(params.get("b" + tag, 0.0))
        fi = lambda s: c * s ** 3 + 0.5 * a * s * s + b * s
        dfi = lambda s: 3.0 * c * s * s + a * s + b
        d2fi = lambda s: 6.0 * c * s + a
        # integral of alpha * t * f'(t) from 0 to s, alpha applied by caller
        qi = lambda s: 0.75 * c * s ** 4 + a * s ** 3 / 3.0 + 0.5 * b * s * s
        return fi, dfi, d2fi, qi

    f1, df1, d2f1, q1 = cubic("1")
    f2, df2, d2f2, q2 = cubic("2")
    if "b2" not in params and "a2" not in params and "c2" not in params:
        # default second flux u^2/2 + 10 u: derivative range disjoint
        # from the first on the default box
        f2 = lambda s: 0.5 * s * s + 10.0 * s
        df2 = lambda s: s + 10.0
        d2f2 = lambda s: 1.0
        q2 = lambda s: s ** 3 / 3.0 + 5.0 * s * s
    al1 = float(params.get("alpha1", 1.0))
    al2 = float(params.get("alpha2", 1.0))
    if al1 <= 0 or al2 <= 0:
        raise ConfigurationError("coupling entropies need alpha1, alpha2 > 0")

    fns = {
        "f": lambda u: np.array([f1(u[0]), f2(u[1])]),
        "df": lambda u: np.array([[df1(u[0]), 0.0], [0.0, df2(u[1])]]),
        "d2f": lambda u: np.array([[[d2f1(u[0]), 0.0], [0.0, 0.0]],
                                   [[0.0, 0.0], [0.0, d2f2(u[1])]]]),
        "eta": lambda u: 0.5 * (al1 * u[0] * u[0] + al2 * u[1] * u[1]),
        "grad_eta": lambda u: np.array([al1 * u[0], al2 * u[1]]),
        "hess_eta": lambda u: np.array([[al1, 0.0], [0.0, al2]]),
        "q": lambda u: al1 * q1(u[0]) + al2 * q2(u[1]),
        "grad_q": lambda u: np.array([al1 * u[0] * df1(u[0]),
                                      al2 * u[1] * df2(u[1])]),
        "hess_q": lambda u: np.array(
            [[al1 * (df1(u[0]) + u[0] * d2f1(u[0])), 0.0],
             [0.0, al2 * (df2(u[1]) + u[1] * d2f2(u[1]))]]),
    }
    dom = domain if domain is not None else Domain.box([-4.0, -4.0],
                                                       [4.0, 4.0])
    if dom.kind == "box":
        window = (dom.lo + 0.05 * (dom.hi - dom.lo),
                  dom.hi - 0.05 * (dom.hi - dom.lo))
    else:
        window = ([-3.0, -3.0], [3.0, 3.0])
    return SystemDef("two_burgers", params, "two_burgers", dom, window, fns)


_CATALOG = {
    "p_system": _p_system,
    "gradient_flux": _gradient_flux,
    "isentropic_euler": _isentropic_euler,
    "gamma_law": lambda params, domain: _isentropic_euler(
        {"kappa": params.get("kappa", 1.0),
         "gamma": params.get("gamma", 2.0),
         "rho_min": params.get("rho_min", 1e-3)}, domain, kind="gamma_law"),
    "shallow_water": lambda params, domain: _isentropic_euler(
        {"kappa": params.get("kappa", 0.5), "gamma": 2.0,
         "rho_min": params.get("rho_min", 1e-3)}, domain,
        kind="shallow_water"),
    "two_burgers": _two_burgers,
}


def make_system(kind, params=None, domain=None):
    """Build a catalog system.  `kind` may also be a full spec record
    {"kind": ..., "params": {...}, "domain": {...}}."""
    if isinstance(kind, dict):
        rec = kind
        kind = rec.get("kind")
        params = rec.get("params", {})
        if rec.get("domain") is not None:
            domain = domain_from_record(rec["domain"])
    params = dict(params or {})
    if kind == "gamma_law" and "gamma" in params and params["gamma"] <= 1.0:
        raise ConfigurationError("gamma-law needs gamma > 1")
    if kind == "transformed":
        from .transform import system_from_record
        return system_from_record(params)
    builder = _CATALOG.get(kind)
    if builder is None:
        raise ConfigurationError("unknown catalog identifier %r" % (kind,))
    return builder(params, domain)


def eval_G(sys, u):
    """Constitutive matrix: rows (u_1, f_1), (u_2, f_2), (eta, q)."""
    u = np.asarray(u, dtype=float)
    fv = sys.f(u)
    return np.array([[u[0], fv[0]],
                     [u[1], fv[1]],
                     [sys.eta(u), sys.q(u)]])


def tilt(sys, c):
    """Tilted system: same flux, entropy pair (eta + c.U, q + c.f)."""
    c = np.asarray(c, dtype=float)
    if c.shape != (2,) or not np.all(np.isfinite(c)):
        raise ValueError("tilt vector must be a finite 2-vector")
    base = sys._fns
    fns = dict(base)
    fns["eta"] = lambda u: base["eta"](u) + c @ u
    fns["grad_eta"] = lambda u: base["grad_eta"](u) + c
    fns["q"] = lambda u: base["q"](u) + c @ base["f"](u)
    fns["grad_q"] = lambda u: base["grad_q"](u) + c @ base["df"](u)
    fns["hess_q"] = lambda u: (base["hess_q"](u)
                               + np.tensordot(c, base["d2f"](u), axes=(0, 0)))
    label = "%s~c=(%g,%g)" % (sys.label, c[0], c[1])
    out = SystemDef(sys.kind, sys.params, label, sys.domain,
                    sys.window, fns, extras=dict(sys.extras))
    out.extras["tilt"] = c + sys.extras.get("tilt", np.zeros(2))
    out.extras["untilted"] = sys.extras.get("untilted", sys)
    return out


def compatibility_residual(sys, u):
    """grad q - grad eta . Df at a point (a 2-vector; ~0 for genuine
    entropy pairs)."""
    return sys.grad_q(u) - sys.grad_eta(u) @ sys.df(u)
