"""Compiled kernels for test-function evaluation and the U integral.

A test function is encoded as a short list of terms ``coef * term(t)``
with integer codes, so that numba can evaluate it without Python
callbacks. Two U-pair implementations are kept in step: a loop kernel
(numba when available) and a vectorized numpy kernel.
"""
import math

import numpy as np

from ._accel import njit, prange, use_numba
from .quadrature import entropy_weight_rule, gauss_legendre

AFFINE, RENYI, VON_NEUMANN, ETA_LOG, POWER, LOG, ETA_INF, NEG_LOG1M = range(8)

# graded Gauss rule toward singular endpoints
PANEL_NODES = 12
PANEL_RATIO = 0.3
MAX_DEPTH = 33

_GL_X, _GL_W = gauss_legendre(PANEL_NODES, 0.0, 1.0)
_EW_X, _EW_W = entropy_weight_rule(10)


# ---------------------------------------------------------------- scalars

@njit
def _renyi_scalar(g, t):
    if not (t > 0.0 and t < 1.0):
        return 0.0
    s = t if t <= 0.5 else 1.0 - t
    if s < 1e-300:
        return 0.0
    r = s / (1.0 - s)
    return (g * math.log1p(-s) + math.log1p(r ** g)) / (1.0 - g)


@njit
def _vn_scalar(t):
    if not (t > 0.0 and t < 1.0):
        return 0.0
    s = t if t <= 0.5 else 1.0 - t
    if s < 1e-300:
        return 0.0
    return -s * math.log(s) - (1.0 - s) * math.log1p(-s)


@njit
def _term_value(code, p1, p2, t):
    if code == AFFINE:
        return p1 * t + p2
    if code == RENYI:
        return _renyi_scalar(p1, t)
    if code == VON_NEUMANN:
        return _vn_scalar(t)
    if code == ETA_LOG:
        if t == 0.0:
            return 0.0
        return -t * math.log(abs(t))
    if code == POWER:
        a = abs(t)
        if a == 0.0:
            return 0.0
        return a ** p1
    if code == LOG:
        if t > 0.0:
            return math.log(t)
        if t == 0.0:
            return -math.inf
        return math.nan
    if code == ETA_INF:
        if not (t > 0.0 and t < 1.0):
            return 0.0
        if t < 0.5:
            return -math.log1p(-t)
        return -math.log(t)
    if code == NEG_LOG1M:
        if t < 1.0:
            return -math.log1p(-t)
        return math.inf
    return math.nan


@njit
def _f_value(codes, p1, p2, coef, t):
    acc = 0.0
    for k in range(codes.shape[0]):
        acc += coef[k] * _term_value(codes[k], p1[k], p2[k], t)
    return acc


@njit
def _term_d2_scaled(code, p1, t, d):
    """f''(t) * d**2 for one term, written to avoid overflow for tiny t."""
    if code == AFFINE:
        return 0.0
    if code == RENYI:
        g = p1
        if t <= 0.5:
            a = t
            b = 1.0 - t
            dd = d
        else:
            a = 1.0 - t
            b = t
            dd = -d
        q = dd / a
        ag = a ** g
        bg = b ** g
        den = ag + bg
        term1 = -g * ag * b ** (g - 2.0) * q * q
        cross = ag * q - b ** (g - 1.0) * dd
        term2 = -g / (1.0 - g) * cross * cross
        return (term1 + term2) / (den * den)
    if code == VON_NEUMANN:
        return -(d / t) * (d / (1.0 - t))
    if code == ETA_LOG:
        return -(d / t) * d
    if code == POWER:
        if t == 0.0:
            if p1 == 2.0:
                return 2.0 * d * d
            return math.inf
        q = d / t
        return p1 * (p1 - 1.0) * abs(t) ** p1 * q * q
    if code == LOG:
        q = d / t
        return -q * q
    if code == ETA_INF:
        if t < 0.5:
            q = d / (1.0 - t)
        else:
            q = d / t
        return q * q
    if code == NEG_LOG1M:
        q = d / (1.0 - t)
        return q * q
    return math.nan


@njit
def _f_d2_scaled(codes, p1, coef, t, d):
    acc = 0.0
    for k in range(codes.shape[0]):
        acc += coef[k] * _term_d2_scaled(codes[k], p1[k], t, d)
    return acc


@njit
def _depth(half, dist):
    if dist >= half:
        return 0
    if dist <= 0.0:
        return MAX_DEPTH
    n = int(math.ceil(math.log(half / dist) / math.log(1.0 / PANEL_RATIO))) + 1
    return min(n, MAX_DEPTH)


@njit
def _graded_half(codes, p1, p2, coef, anchor_t, anchor_x, direction, half,
                 depth, d, fu, fv, gl_x, gl_w, q_inner):
    # integrate N(t)/(t(1-t)) over offsets o in [0, half] from an anchor:
    # t = anchor_t + direction*o, x = anchor_x + direction*o*d.
    # Geometric panels; when the grading hits its cap the anchor sits on
    # a singular point and the innermost panel uses o = eps * w**q, which
    # turns a power singularity o**(delta-1) into the smooth w**(q*delta-1).
    acc = 0.0
    hi = half
    for j in range(depth + 1):
        inner = j == depth and depth == MAX_DEPTH
        lo = 0.0 if j == depth else half * PANEL_RATIO ** (j + 1)
        width = hi - lo
        for k in range(gl_x.shape[0]):
            if inner:
                wq = gl_x[k] ** q_inner
                o = hi * wq
                w = hi * q_inner * wq / gl_x[k] * gl_w[k]
            else:
                o = lo + width * gl_x[k]
                w = width * gl_w[k]
            if direction > 0:
                t = anchor_t + o
                tau = (1.0 - anchor_t) - o
            else:
                t = anchor_t - o
                tau = (1.0 - anchor_t) + o
            if t <= 0.0 or tau <= 0.0:
                continue
            x = anchor_x + direction * o * d
            fx = _f_value(codes, p1, p2, coef, x)
            if t <= 0.5:
                num = (fx - fv) - t * (fu - fv)
            else:
                num = (fx - fu) + tau * (fu - fv)
            acc += w * num / (t * tau)
        hi = lo
    return acc


@njit
def _u_single(u, v, codes, p1, p2, coef, sing, gl_x, gl_w, ew_x, ew_w,
              q_inner):
    d = u - v
    if d == 0.0:
        return 0.0
    ad = abs(d)
    lo = min(u, v)
    hi = max(u, v)
    dv = math.inf
    du = math.inf
    n_int = 0
    for s in sing:
        dv = min(dv, abs(v - s))
        du = min(du, abs(u - s))
        if lo < s and s < hi:
            n_int += 1
    if n_int == 0 and dv >= 2.0 * ad and du >= 2.0 * ad:
        acc = 0.0
        for k in range(ew_x.shape[0]):
            t = v + ew_x[k] * d
            acc += ew_w[k] * _f_d2_scaled(codes, p1, coef, t, d)
        return -acc
    fu = _f_value(codes, p1, p2, coef, u)
    fv = _f_value(codes, p1, p2, coef, v)
    nb = n_int + 2
    bt = np.empty(nb)
    bx = np.empty(nb)
    bt[0] = 0.0
    bx[0] = v
    m = 1
    for s in sing:
        if lo < s and s < hi:
            bt[m] = (s - v) / d
            bx[m] = s
            m += 1
    bt[nb - 1] = 1.0
    bx[nb - 1] = u
    # insertion sort of the interior breakpoints
    for i in range(2, nb - 1):
        j = i
        while j > 1 and bt[j - 1] > bt[j]:
            bt[j - 1], bt[j] = bt[j], bt[j - 1]
            bx[j - 1], bx[j] = bx[j], bx[j - 1]
            j -= 1
    acc = 0.0
    for k in range(nb - 1):
        a = bt[k]
        b = bt[k + 1]
        half = 0.5 * (b - a)
        dist_a = dv / ad if k == 0 else 0.0
        dist_b = du / ad if k == nb - 2 else 0.0
        acc += _graded_half(codes, p1, p2, coef, a, bx[k], 1.0, half,
                            _depth(half, dist_a), d, fu, fv, gl_x, gl_w, q_inner)
        acc += _graded_half(codes, p1, p2, coef, b, bx[k + 1], -1.0, half,
                            _depth(half, dist_b), d, fu, fv, gl_x, gl_w, q_inner)
    return acc


@njit(parallel=True)
def _u_pairs_loop(u, v, codes, p1, p2, coef, sing, gl_x, gl_w, ew_x, ew_w,
                  q_inner):
    n = u.shape[0]
    out = np.empty(n)
    for i in prange(n):
        out[i] = _u_single(u[i], v[i], codes, p1, p2, coef, sing,
                           gl_x, gl_w, ew_x, ew_w, q_inner)
    return out


@njit(parallel=True)
def _f_values_loop(codes, p1, p2, coef, t):
    out = np.empty(t.shape[0])
    for i in prange(t.shape[0]):
        out[i] = _f_value(codes, p1, p2, coef, t[i])
    return out


@njit(parallel=True)
def _f_d2_loop(codes, p1, coef, t):
    out = np.empty(t.shape[0])
    for i in prange(t.shape[0]):
        out[i] = _f_d2_scaled(codes, p1, coef, t[i], 1.0)
    return out


# ------------------------------------------------------------ numpy path

def _renyi_np(g, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    s = np.where(t <= 0.5, t, 1.0 - t)
    ok = inside & (s >= 1e-300)
    s = np.where(ok, s, 0.25)
    r = s / (1.0 - s)
    val = (g * np.log1p(-s) + np.log1p(r ** g)) / (1.0 - g)
    out[ok] = val[ok]
    return out


def _vn_np(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    s = np.where(t <= 0.5, t, 1.0 - t)
    ok = inside & (s >= 1e-300)
    s = np.where(ok, s, 0.25)
    val = -s * np.log(s) - (1.0 - s) * np.log1p(-s)
    out[ok] = val[ok]
    return out


def _term_value_np(code, p1, p2, t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if code == AFFINE:
            return p1 * t + p2
        if code == RENYI:
            return _renyi_np(p1, t)
        if code == VON_NEUMANN:
            return _vn_np(t)
        if code == ETA_LOG:
            a = np.abs(t)
            return np.where(a > 0, -t * np.log(np.where(a > 0, a, 1.0)), 0.0)
        if code == POWER:
            a = np.abs(t)
            return np.where(a > 0, a ** p1, 0.0)
        if code == LOG:
            return np.log(t)
        if code == ETA_INF:
            inside = (t > 0) & (t < 1)
            tt = np.where(inside, t, 0.5)
            val = np.where(tt < 0.5, -np.log1p(-tt), -np.log(tt))
            return np.where(inside, val, 0.0)
        if code == NEG_LOG1M:
            return np.where(t < 1, -np.log1p(-np.minimum(t, 1.0)), np.inf)
    raise ValueError(f"unknown term code {code}")


def _f_value_np(codes, p1, p2, coef, t):
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for k in range(len(codes)):
        acc = acc + coef[k] * _term_value_np(int(codes[k]), p1[k], p2[k], t)
    return acc


def _term_d2_scaled_np(code, p1, t, d):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if code == AFFINE:
            return np.zeros_like(t)
        if code == RENYI:
            g = p1
            left = t <= 0.5
            a = np.where(left, t, 1.0 - t)
            b = np.where(left, 1.0 - t, t)
            dd = np.where(left, d, -d)
            q = dd / a
            ag = a ** g
            den = ag + b ** g
            term1 = -g * ag * b ** (g - 2.0) * q * q
            cross = ag * q - b ** (g - 1.0) * dd
            term2 = -g / (1.0 - g) * cross * cross
            return (term1 + term2) / (den * den)
        if code == VON_NEUMANN:
            return -(d / t) * (d / (1.0 - t))
        if code == ETA_LOG:
            return -(d / t) * d
        if code == POWER:
            q = d / t
            val = p1 * (p1 - 1.0) * np.abs(t) ** p1 * q * q
            if p1 == 2.0:
                val = np.where(t == 0, 2.0 * d * d, val)
            return val
        if code == LOG:
            q = d / t
            return -q * q
        if code == ETA_INF:
            q = np.where(t < 0.5, d / (1.0 - t), d / t)
            return q * q
        if code == NEG_LOG1M:
            q = d / (1.0 - t)
            return q * q
    raise ValueError(f"unknown term code {code}")


def _f_d2_scaled_np(codes, p1, coef, t, d):
    acc = np.zeros(np.broadcast(t, d).shape)
    for k in range(len(codes)):
        acc = acc + coef[k] * _term_d2_scaled_np(int(codes[k]), p1[k], t, d)
    return acc


def _graded_offsets(q_inner):
    """Offsets (fractions of a half-interval) and weights, max depth."""
    xs, ws = [], []
    hi = 1.0
    for j in range(MAX_DEPTH):
        lo = PANEL_RATIO ** (j + 1)
        xs.append(lo + (hi - lo) * _GL_X)
        ws.append((hi - lo) * _GL_W)
        hi = lo
    wq = _GL_X ** q_inner
    xs.append(hi * wq)
    ws.append(hi * q_inner * wq / _GL_X * _GL_W)
    return np.concatenate(xs), np.concatenate(ws)




def _u_pairs_numpy(u, v, codes, p1, p2, coef, sing, q_inner, chunk=4096):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.zeros(u.shape)
    d = u - v
    ad = np.abs(d)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    sing = np.asarray(sing, dtype=float)
    if sing.size:
        dv = np.min(np.abs(v[:, None] - sing[None, :]), axis=1)
        du = np.min(np.abs(u[:, None] - sing[None, :]), axis=1)
        interior = np.any((lo[:, None] < sing) & (sing < hi[:, None]), axis=1)
    else:
        dv = np.full(u.shape, np.inf)
        du = np.full(u.shape, np.inf)
        interior = np.zeros(u.shape, dtype=bool)
    nonzero = d != 0
    smooth = nonzero & ~interior & (dv >= 2 * ad) & (du >= 2 * ad)
    if np.any(smooth):
        ds = d[smooth]
        t = v[smooth][:, None] + _EW_X[None, :] * ds[:, None]
        vals = _f_d2_scaled_np(codes, p1, coef, t, ds[:, None])
        out[smooth] = -(vals @ _EW_W)
    graded = np.flatnonzero(nonzero & ~smooth)
    for start in range(0, graded.size, chunk):
        idx = graded[start:start + chunk]
        out[idx] = _u_graded_numpy(u[idx], v[idx], codes, p1, p2, coef, sing,
                                   q_inner)
    return out


def _u_graded_numpy(u, v, codes, p1, p2, coef, sing, q_inner):
    off_x, off_w = _graded_offsets(q_inner)
    d = u - v
    fu = _f_value_np(codes, p1, p2, coef, u)
    fv = _f_value_np(codes, p1, p2, coef, v)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    n = u.size
    # breakpoints: 0, every singular point clipped into [0, 1], 1
    if sing.size:
        inner = (sing[None, :] - v[:, None]) / d[:, None]
        is_in = (lo[:, None] < sing[None, :]) & (sing[None, :] < hi[:, None])
        inner_t = np.where(is_in, inner, 0.0)
        inner_x = np.where(is_in, sing[None, :], v[:, None])
        order = np.argsort(inner_t, axis=1, kind="stable")
        inner_t = np.take_along_axis(inner_t, order, axis=1)
        inner_x = np.take_along_axis(inner_x, order, axis=1)
    else:
        inner_t = np.zeros((n, 0))
        inner_x = np.zeros((n, 0))
    bt = np.concatenate([np.zeros((n, 1)), inner_t, np.ones((n, 1))], axis=1)
    bx = np.concatenate([v[:, None], inner_x, u[:, None]], axis=1)
    acc = np.zeros(n)
    for k in range(bt.shape[1] - 1):
        a, b = bt[:, k], bt[:, k + 1]
        half = 0.5 * (b - a)
        live = half > 0
        if not np.any(live):
            continue
        for direction, anchor_t, anchor_x in ((1.0, a, bx[:, k]),
                                              (-1.0, b, bx[:, k + 1])):
            o = half[:, None] * off_x[None, :]
            w = half[:, None] * off_w[None, :]
            if direction > 0:
                t = anchor_t[:, None] + o
                tau = (1.0 - anchor_t)[:, None] - o
            else:
                t = anchor_t[:, None] - o
                tau = (1.0 - anchor_t)[:, None] + o
            x = anchor_x[:, None] + direction * o * d[:, None]
            fx = _f_value_np(codes, p1, p2, coef, x)
            with np.errstate(divide="ignore", invalid="ignore"):
                num = np.where(t <= 0.5,
                               (fx - fv[:, None]) - t * (fu - fv)[:, None],
                               (fx - fu[:, None]) + tau * (fu - fv)[:, None])
                ok = live[:, None] & (t > 0) & (tau > 0)
                val = np.where(ok, w * num / (t * tau), 0.0)
            acc += val.sum(axis=1)
    return acc


# ------------------------------------------------------------- dispatch

def _term_arrays(terms):
    codes = np.array([t[0] for t in terms], dtype=np.int64)
    p1 = np.array([t[1] for t in terms], dtype=float)
    p2 = np.array([t[2] for t in terms], dtype=float)
    coef = np.array([t[3] for t in terms], dtype=float)
    return codes, p1, p2, coef


def f_values(terms, t):
    """Evaluate an encoded test function on an array."""
    codes, p1, p2, coef = _term_arrays(terms)
    t = np.asarray(t, dtype=float)
    if use_numba():
        flat = np.ascontiguousarray(t.ravel())
        return _f_values_loop(codes, p1, p2, coef, flat).reshape(t.shape)
    return _f_value_np(codes, p1, p2, coef, t)


def f_second_derivative(terms, t):
    """Second derivative of an encoded test function (t off singular set)."""
    codes, p1, p2, coef = _term_arrays(terms)
    t = np.asarray(t, dtype=float)
    if use_numba():
        flat = np.ascontiguousarray(t.ravel())
        return _f_d2_loop(codes, p1, coef, flat).reshape(t.shape)
    return _f_d2_scaled_np(codes, p1, coef, t, np.ones_like(t))


def u_pairs(terms, singular, u, v, hoelder=1.0):
    """U(u_i, v_i; f) for arrays of pairs.

    Uses the entropy-weighted Gauss rule on -(u-v)^2 f'' when the segment
    stays at least two segment lengths away from every singular point,
    and a geometrically graded Gauss rule on the defining integral
    otherwise. ``hoelder`` sets the endpoint substitution power.
    """
    q_inner = float(max(6, math.ceil(6.0 / float(hoelder) - 1e-9)))
    codes, p1, p2, coef = _term_arrays(terms)
    sing = np.asarray(singular, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    shape = u.shape
    uf = np.ascontiguousarray(u.ravel())
    vf = np.ascontiguousarray(v.ravel())
    if use_numba():
        out = _u_pairs_loop(uf, vf, codes, p1, p2, coef, sing,
                            _GL_X, _GL_W, _EW_X, _EW_W, q_inner)
    else:
        out = _u_pairs_numpy(uf, vf, codes, p1, p2, coef, sing, q_inner)
    return out.reshape(shape)
