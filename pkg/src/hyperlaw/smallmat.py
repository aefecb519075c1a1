"""Dense 3x2 / 2x2 matrix primitives and finite-difference oracles.

The 3x2 matrices here are state/flux/entropy stacks

    [[u_1, f_1], [u_2, f_2], [eta, q]]

and differences of such stacks, so only three 2x2 subdeterminants
(row pairs (1,2), (1,3), (2,3)) and the second singular value ever
matter.  Everything is closed-form; no general factorization is used.
"""

import math

import numpy as np

_ROW_PAIRS = {(1, 2), (1, 3), (2, 3), (2, 1), (3, 1), (3, 2)}


def subdet(m, rows):
    """2x2 subdeterminant of a 3x2 matrix, rows given as an ordered
    1-based pair from {(1,2), (1,3), (2,3)} (reversed order flips sign)."""
    r, s = rows
    if (r, s) not in _ROW_PAIRS:
        raise ValueError("row pair must be an ordered pair of distinct "
                         "indices from {1,2,3}, got %r" % (rows,))
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 2):
        raise ValueError("expected a 3x2 matrix, got shape %r" % (m.shape,))
    i, j = r - 1, s - 1
    return m[i, 0] * m[j, 1] - m[i, 1] * m[j, 0]


def rank_one_residual(m):
    """Second-largest singular value of a 3x2 matrix.

    Zero iff rank(m) <= 1, and |t|-equivariant under scaling by t.  The
    leading right singular vector is read off the 2x2 Gram matrix in
    closed form; the returned value is the Frobenius norm of the
    deflated remainder, which is exact (Eckart-Young) and accurate to
    machine precision even when the Gram determinant has cancelled.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 2):
        raise ValueError("expected a 3x2 matrix, got shape %r" % (m.shape,))
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    g00 = m[0, 0] ** 2 + m[1, 0] ** 2 + m[2, 0] ** 2
    g11 = m[0, 1] ** 2 + m[1, 1] ** 2 + m[2, 1] ** 2
    g01 = m[0, 0] * m[0, 1] + m[1, 0] * m[1, 1] + m[2, 0] * m[2, 1]
    if g00 + g11 == 0.0:
        return 0.0
    half = 0.5 * (g00 - g11)
    disc = math.hypot(half, g01)
    lam1 = 0.5 * (g00 + g11) + disc
    # eigenvector of [[g00,g01],[g01,g11]] for lam1; two algebraic forms,
    # keep the better conditioned one
    v_a = (g01, lam1 - g00)
    v_b = (lam1 - g11, g01)
    v = v_a if (v_a[0] ** 2 + v_a[1] ** 2) >= (v_b[0] ** 2 + v_b[1] ** 2) else v_b
    nv = math.hypot(v[0], v[1])
    if nv == 0.0:
        # isotropic Gram (sigma_1 == sigma_2); any unit vector works
        v, nv = (1.0, 0.0), 1.0
    v = np.array([v[0] / nv, v[1] / nv])
    rem = m - np.outer(m @ v, v)
    return float(np.sqrt(np.sum(rem * rem)))


def rank_one_factor(m):
    """Best rank-one approximation of a 3x2 matrix as (a, n, residual)
    with m ~ outer(a, n), |n| = 1, and residual the Frobenius distance
    (the second singular value, as in rank_one_residual)."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 2):
        raise ValueError("expected a 3x2 matrix, got shape %r" % (m.shape,))
    g00 = m[0, 0] ** 2 + m[1, 0] ** 2 + m[2, 0] ** 2
    g11 = m[0, 1] ** 2 + m[1, 1] ** 2 + m[2, 1] ** 2
    g01 = m[0, 0] * m[0, 1] + m[1, 0] * m[1, 1] + m[2, 0] * m[2, 1]
    if g00 + g11 == 0.0:
        return np.zeros(3), np.array([1.0, 0.0]), 0.0
    half = 0.5 * (g00 - g11)
    disc = math.hypot(half, g01)
    lam1 = 0.5 * (g00 + g11) + disc
    v_a = (g01, lam1 - g00)
    v_b = (lam1 - g11, g01)
    v = v_a if (v_a[0] ** 2 + v_a[1] ** 2) >= (v_b[0] ** 2 + v_b[1] ** 2) else v_b
    nv = math.hypot(v[0], v[1])
    if nv == 0.0:
        v, nv = (1.0, 0.0), 1.0
    n = np.array([v[0] / nv, v[1] / nv])
    a = m @ n
    rem = m - np.outer(a, n)
    return a, n, float(np.sqrt(np.sum(rem * rem)))


_EPS = float(np.finfo(float).eps)


def _default_step(u, order):
    scale = max(1.0, float(np.max(np.abs(u))))
    if order == 1:
        return _EPS ** (1.0 / 3.0) * scale
    return _EPS ** 0.25 * scale


def numeric_derivative(fn, u, order=1, step=None):
    """Central finite differences of a scalar or vector field on states.

    order=1 returns the gradient (scalar fn) or Jacobian stacked as
    rows (vector fn); order=2 returns the Hessian, one 2x2 block per
    output component.  Truncation error is O(step^2); evaluation
    errors from fn (e.g. domain violations) propagate unchanged.
    """
    u = np.asarray(u, dtype=float)
    if step is None:
        step = _default_step(u, order)
    if step <= 0.0:
        raise ValueError("step must be positive")
    h = step
    e = np.eye(2)
    f0 = np.asarray(fn(u), dtype=float)
    if order == 1:
        cols = [(np.asarray(fn(u + h * e[i]), dtype=float)
                 - np.asarray(fn(u - h * e[i]), dtype=float)) / (2.0 * h)
                for i in range(2)]
        if f0.ndim == 0:
            return np.array([cols[0], cols[1]], dtype=float)
        return np.stack([cols[0], cols[1]], axis=-1)
    if order == 2:
        hess = np.empty(f0.shape + (2, 2)) if f0.ndim else np.empty((2, 2))
        for i in range(2):
            dii = (np.asarray(fn(u + h * e[i]), dtype=float) - 2.0 * f0
                   + np.asarray(fn(u - h * e[i]), dtype=float)) / (h * h)
            if f0.ndim:
                hess[..., i, i] = dii
            else:
                hess[i, i] = dii
        dij = (np.asarray(fn(u + h * e[0] + h * e[1]), dtype=float)
               - np.asarray(fn(u + h * e[0] - h * e[1]), dtype=float)
               - np.asarray(fn(u - h * e[0] + h * e[1]), dtype=float)
               + np.asarray(fn(u - h * e[0] - h * e[1]), dtype=float)) / (4.0 * h * h)
        if f0.ndim:
            hess[..., 0, 1] = dij
            hess[..., 1, 0] = dij
        else:
            hess[0, 1] = hess[1, 0] = dij
        return hess
    raise ValueError("order must be 1 or 2, got %r" % (order,))
