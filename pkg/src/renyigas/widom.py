"""Area-law coefficients A(a, e; f) and B(a, boundary; f).

A(a, e; f) = (8 pi**2)**-1 lim_{eps -> 0} int dxi int_{|t| > eps} U(a(xi), a(xi + t e); f) / t**2 dt
B(a, boundary; f) = (2 pi)**(1 - d) int_boundary A(a, n_x; f) dsigma(x)

The shift integral is evaluated for t > 0 only: U is symmetric, so the
substitution xi -> xi - t e maps the t < 0 half onto the t > 0 half and
the +/- pairing is exact. Momentum space is sliced into lines parallel
to e. On each line only x in [-R - t, R] contributes, and for t > 2R the
inner integral is the constant 2 int U(a, 0) dx, whose tail in t is
integrated in closed form.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy import special

from .quadrature import ConvergenceError, QuadratureSpec, gauss_legendre, composite_gauss

METHODS = ("pv_quadrature", "parseval", "closed_form", "series")


@dataclass(frozen=True)
class CoefficientResult:
    """A coefficient value with an absolute error estimate."""

    value: float
    error_estimate: float
    method: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not math.isfinite(self.error_estimate) or self.error_estimate < 0:
            raise ValueError("error estimate must be finite and nonnegative")

    def __float__(self):
        return float(self.value)

    def to_record(self, symbol_tag="", region_tag="", f_tag=""):
        return {"value": float(self.value), "error_estimate": float(self.error_estimate),
                "method": self.method, "symbol_tag": symbol_tag,
                "region_tag": region_tag, "f_tag": f_tag}


def emit_jsonl(records, stream):
    """Write ``(result, symbol_tag, region_tag, f_tag)`` tuples as JSON lines."""
    for res, s, r, f in records:
        stream.write(json.dumps(res.to_record(s, r, f), sort_keys=True) + "\n")


# ------------------------------------------------------------- helpers

def _unit(e, d):
    e = np.asarray(e, dtype=float).reshape(-1)
    if e.size != d:
        raise ValueError("direction has wrong dimension")
    n = np.linalg.norm(e)
    if not n > 0:
        raise ValueError("direction must be nonzero")
    return e / n


def _perp_basis(e):
    # columns 1..d-1 of a QR factor starting from e span its complement
    d = e.size
    q, _ = np.linalg.qr(np.column_stack([e, np.eye(d)]))
    return q[:, 1:d]


def _hoelder(f):
    return max(min(float(f.hoelder_exponent), 1.0), 1e-3)


def _radius(a, f, quad):
    if quad.xi_radius is not None:
        return float(quad.xi_radius)
    floor = quad.symbol_floor ** (1.0 / _hoelder(f))
    return a.support_radius(max(floor, 1e-300))


def _t_rule(eps, R, t_max, n):
    """Gauss nodes for t in [eps/4, t_max] with panel labels.

    Label 0 covers [eps/4, eps/2], label 1 covers [eps/2, eps], label 2
    covers [eps, t_max]. Panels grow geometrically from eps up to R/8
    and are uniform beyond.
    """
    width = R / 8.0
    edges = [eps]
    while edges[-1] < width and edges[-1] < t_max:
        edges.append(min(2.0 * edges[-1], t_max))
    if edges[-1] < t_max:
        m = int(math.ceil((t_max - edges[-1]) / width))
        edges.extend(np.linspace(edges[-1], t_max, m + 1)[1:])
    t0, w0 = gauss_legendre(n, eps / 4.0, eps / 2.0)
    t1, w1 = gauss_legendre(n, eps / 2.0, eps)
    t2, w2 = composite_gauss(edges, n)
    t = np.concatenate([t0, t1, t2])
    w = np.concatenate([w0, w1, w2])
    lab = np.concatenate([np.zeros(n, int), np.ones(n, int), np.full(t2.size, 2)])
    return t, w, lab


def _split_rule(breaks, n_total, n_min=4):
    """Gauss panels between ``breaks``, nodes shared in proportion to length.

    Lines through the symbol's maximum carry a kink of f(a) when a reaches
    the endpoint of [0, 1]; panel edges sit at those points.
    """
    breaks = np.asarray(breaks, dtype=float)
    lengths = np.diff(breaks)
    xs, ws = [], []
    for lo, hi, ln in zip(breaks[:-1], breaks[1:], lengths):
        if ln <= 0.0:
            continue
        n = max(n_min, int(math.ceil(n_total * ln / lengths.sum())))
        x, w = gauss_legendre(n, lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _pair_layout(t, wt, lab, R, nodes_x, split=True):
    """Flattened (x, x + t, weight, label) over every t node.

    With ``split`` the x rule breaks at -t and 0, where u and v peak on
    the central line; smooth f keep a single spectral panel.
    """
    xs, x2s, ws, ls = [], [], [], []
    for tk, wk, lk in zip(t, wt, lab):
        n = int(math.ceil(nodes_x * (2.0 * R + tk) / (2.0 * R)))
        x, wx = _split_rule([-R - tk, -tk, 0.0, R] if split else [-R - tk, R], n)
        xs.append(x)
        x2s.append(x + tk)
        ws.append(wx * (wk / tk ** 2))
        ls.append(np.full(x.size, lk))
    return (np.concatenate(xs), np.concatenate(x2s), np.concatenate(ws),
            np.concatenate(ls))


def _transverse(a, e, R, quad, use_radial):
    """Transverse nodes: a callable line(x) per node, with weights."""
    d = a.dimension
    if use_radial:
        rho, w = gauss_legendre(quad.nodes_perp, 0.0, R)
        w = 2.0 * w if d == 2 else 2.0 * np.pi * rho * w
        lines = [lambda x, r=r: a.profile(np.hypot(x, r)) for r in rho]
        return lines, w
    B = _perp_basis(e)
    # full line [-R, R]: twice the radial node count for the same density
    y1, w1 = gauss_legendre(2 * quad.nodes_perp, -R, R)
    if d == 2:
        pts = y1[:, None] * B[:, 0][None, :]
        w = w1
    else:
        Y1, Y2 = np.meshgrid(y1, y1, indexing="ij")
        pts = Y1.ravel()[:, None] * B[:, 0] + Y2.ravel()[:, None] * B[:, 1]
        w = np.outer(w1, w1).ravel()
    lines = [lambda x, y=y: a(x[:, None] * e[None, :] + y[None, :]) for y in pts]
    return lines, w


# ---------------------------------------------------------- A functional

def _a_raw(a, e, f, quad, use_radial):
    """Label-resolved sums and diagnostics for one direction."""
    R = _radius(a, f, quad)
    t_max = float(quad.t_max) if quad.t_max is not None else 2.0 * R
    eps = quad.pv_cutoff
    if not t_max > eps:
        raise ValueError("t_max must exceed the pv cutoff")
    t, wt, lab = _t_rule(eps, R, t_max, quad.nodes_t)
    split = any(p > 0.0 for p in f.singular_set)
    X1, X2, W, L = _pair_layout(t, wt, lab, R, quad.nodes_x, split)
    xt, wxt = _split_rule([-R, 0.0, R] if split else [-R, R], quad.nodes_x)
    lines, wy = _transverse(a, e, R, quad, use_radial)
    floor = quad.symbol_floor ** (1.0 / _hoelder(f))
    sums = np.zeros(3)
    for line, w in zip(lines, wy):
        u = np.asarray(line(X1), dtype=float)
        v = np.asarray(line(X2), dtype=float)
        keep = np.maximum(np.abs(u), np.abs(v)) > floor
        U = np.zeros_like(u)
        if keep.any():
            U[keep] = f.u_pairs(u[keep], v[keep])
        part = np.bincount(L, weights=U * W, minlength=3)
        g = np.asarray(line(xt), dtype=float)
        keep = np.abs(g) > floor
        tail = 0.0
        if keep.any():
            tail = 2.0 * np.dot(wxt[keep], f.u_pairs(g[keep], np.zeros(keep.sum())))
        part[2] += tail / t_max
        sums += w * part
    scale = 2.0 / (8.0 * np.pi ** 2)
    return scale * sums, R


def _extrapolate(sums, tol):
    """Richardson over eps, eps/2, eps/4 with error powers 1 and 3."""
    I1 = sums[2]
    I2 = I1 + sums[1]
    I4 = I2 + sums[0]
    d1 = I2 - I1
    d2 = I4 - I2
    history = [I1, I2, I4]
    floor = max(tol, 1e-12 * abs(I4))
    if abs(d2) > floor and (d1 * d2 < 0 or abs(d2) > abs(d1)):
        raise ConvergenceError("eps extrapolation is not monotone",
                               residual=abs(d2), history=history)
    r1a = 2.0 * I2 - I1
    r1b = 2.0 * I4 - I2
    r2 = (8.0 * r1b - r1a) / 7.0
    return r2, abs(r2 - r1b)


def a_functional(a, e, f, quad=None, use_radial=None):
    """The direction functional A(a, e; f).

    Parameters
    ----------
    a : Symbol
    e : array_like
        Direction (normalized internally).
    f : EntropyFunction
    quad : QuadratureSpec, optional
    use_radial : bool, optional
        Force or forbid the rotation-invariant slicing. Default: use it
        whenever the symbol is radial.

    Returns
    -------
    CoefficientResult
        Method ``pv_quadrature``.
    """
    quad = quad or QuadratureSpec()
    if not a.even:
        raise ValueError("symbol must be even")
    d = a.dimension
    e = _unit(e, d)
    if f.is_affine or f.quadratic_coefficient == 0.0:
        return CoefficientResult(0.0, 0.0, "pv_quadrature")
    if use_radial is None:
        use_radial = a.radial
    if use_radial and not a.radial:
        raise ValueError("symbol is not radial")
    sums, R = _a_raw(a, e, f, quad, use_radial)
    value, err = _extrapolate(sums, quad.tolerance)
    # momentum tail: every neglected value lies below the floor
    err += abs(value) * quad.symbol_floor * R ** d
    if quad.refinement_levels == 2:
        coarse, _ = _extrapolate(_a_raw(a, e, f, quad.coarsened(), use_radial)[0],
                                 quad.tolerance)
        err += abs(value - coarse)
    return CoefficientResult(float(value), float(err), "pv_quadrature",
                             {"xi_radius": R})


def _canonical_normal(n):
    # A(a, -e) = A(a, e): fold antipodal normals together
    n = np.round(n, 12) + 0.0
    k = np.flatnonzero(np.abs(n) > 1e-12)[0]
    return tuple(-n if n[k] < 0 else n)


def b_coefficient(a, region, f, quad=None, boundary_nodes=64):
    """B(a, boundary; f) for a catalog region.

    Radial symbols use B = (2 pi)**(1-d) |boundary| A(a, e1; f). Otherwise
    the boundary integral runs over ``region.boundary_nodes`` with one
    A evaluation per distinct normal direction.
    """
    quad = quad or QuadratureSpec()
    d = a.dimension
    if region.dimension != d:
        raise ValueError("region and symbol dimensions differ")
    pref = (2.0 * np.pi) ** (1 - d)
    if a.radial:
        A = a_functional(a, np.eye(d)[0], f, quad)
        area = region.boundary_measure
        return CoefficientResult(pref * area * A.value, pref * area * A.error_estimate,
                                 "pv_quadrature", {"A": A.value})
    _, normals, w = region.boundary_nodes(boundary_nodes)
    cache = {}
    value = 0.0
    err = 0.0
    for n, wk in zip(normals, w):
        key = _canonical_normal(n)
        if key not in cache:
            cache[key] = a_functional(a, np.array(key), f, quad)
        value += wk * cache[key].value
        err += wk * cache[key].error_estimate
    return CoefficientResult(pref * value, pref * err, "pv_quadrature",
                             {"directions": len(cache)})


# ------------------------------------------------------------- Parseval

class TransformUnavailable(ValueError):
    """The symbol has no Fourier transform route."""


def radial_fourier(a, r, quad=None):
    """hat a(r) = int a(xi) exp(-i xi.z) dxi at |z| = r for a radial symbol."""
    quad = quad or QuadratureSpec()
    if not a.radial:
        raise TransformUnavailable("Fourier route needs a radial symbol")
    d = a.dimension
    S = a.support_radius(quad.symbol_floor)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    n = max(400, int(math.ceil(2.0 * S * float(r.max(initial=0.0)) / np.pi)) + 200)
    s, w = gauss_legendre(n, 0.0, S)
    prof = a.profile(s)
    rs = np.outer(r, s)
    if d == 2:
        return 2.0 * np.pi * (special.j0(rs) @ (w * prof * s))
    if d == 3:
        return 4.0 * np.pi * (np.sinc(rs / np.pi) @ (w * prof * s * s))
    raise TransformUnavailable("radial transform implemented for d = 2, 3")


def parseval_a(a, c=1.0, quad=None, panel=1.0, r_cap=400.0):
    """A(a, e; c t**2) = -c (8 pi**2)**-1 (2 pi)**(1-d) int |hat a(z)|**2 |z.e| dz.

    The constant follows from Plancherel and int 4 sin(ts/2)**2 / t**2 dt
    = 2 pi |s|. Radial symbols only.
    """
    quad = quad or QuadratureSpec()
    if c == 0.0:
        return CoefficientResult(0.0, 0.0, "parseval")
    if not a.radial:
        raise TransformUnavailable("Fourier route needs a radial symbol")
    d = a.dimension
    # |z.e| averaged over directions: 4 r**2 dr (d=2), 2 pi r**3 dr (d=3)
    ang, powr = (4.0, 2) if d == 2 else (2.0 * np.pi, 3)
    total = 0.0
    last = np.inf
    lo = 0.0
    peak = 0.0
    while lo < r_cap:
        r, w = gauss_legendre(24, lo, lo + panel)
        part = np.dot(w, radial_fourier(a, r, quad) ** 2 * r ** powr)
        total += part
        peak = max(peak, abs(part))
        lo += panel
        if abs(part) < 1e-3 * quad.tolerance * max(peak, 1.0) and abs(last) < 1e-3 * quad.tolerance * max(peak, 1.0):
            break
        last = part
    else:
        raise ConvergenceError("Fourier transform does not decay", residual=abs(last))
    pref = -c / (8.0 * np.pi ** 2) * (2.0 * np.pi) ** (1 - d) * ang
    value = pref * total
    return CoefficientResult(float(value), float(abs(pref) * (abs(last) + 1e-14 * total)),
                             "parseval", {"r_max": lo})


def b_parseval_quadratic(a, region, c=1.0, quad=None):
    """B(a, boundary; c t**2) through the Fourier route."""
    d = a.dimension
    A = parseval_a(a, c, quad)
    k = (2.0 * np.pi) ** (1 - d) * region.boundary_measure
    return CoefficientResult(k * A.value, k * A.error_estimate, "parseval", {"A": A.value})


# ---------------------------------------------------- closed forms, series

def _diagonal_amplitudes(K):
    """c_k = sum_{n=1}^{k-1} (n (k-n))**-1/2 for k = 2..K."""
    out = np.empty(K - 1)
    for k in range(2, K + 1):
        n = np.arange(1, k, dtype=float)
        out[k - 2] = np.sum(1.0 / np.sqrt(n * (k - n)))
    return out


def _euler_average(partial, depth):
    s = np.asarray(partial, dtype=float)
    for _ in range(depth):
        s = 0.5 * (s[:-1] + s[1:])
    return s[-1]


def sigma_series(d, tol=1e-8, k_start=256, k_max=1 << 14, depth=12):
    """Sigma(d) = sum_{n,m >= 1} (-1)**(n+m) (nm)**-1/2 (n+m)**-(d+1)/2.

    Anti-diagonal partial sums alternate in sign; ``depth`` rounds of
    pairwise averaging (the Euler transform of the partial sums) are
    applied and the diagonal count is doubled until two consecutive
    estimates agree to ``tol``.

    Raises
    ------
    ConvergenceError
        With the estimate history when ``k_max`` is reached.
    """
    if int(d) != d or d < 2:
        raise ValueError("d must be an integer >= 2")
    if not tol > 0:
        raise ValueError("tol must be positive")
    p = 0.5 * (d + 1)
    amps = _diagonal_amplitudes(k_max)
    k = np.arange(2, k_max + 1, dtype=float)
    terms = np.where(k % 2 == 0, 1.0, -1.0) * amps * k ** -p
    partial = np.cumsum(terms)
    history = []
    K = k_start
    prev = None
    while K <= k_max:
        est = _euler_average(partial[:K - 1], depth)
        history.append(est)
        if prev is not None and abs(est - prev) < tol:
            return float(est)
        prev = est
        K *= 2
    raise ConvergenceError("Sigma series acceleration did not converge",
                           residual=abs(history[-1] - history[-2]), history=history)


def b_closed_form_gaussian(gamma, d, boundary_area):
    """-gamma/(gamma-1) 2**(-d-3) pi**(-(d+1)/2) |boundary| for gamma > 2.

    This is the published closed form for the Gaussian symbol with the
    quadratic effective function. It is returned for comparison only;
    the quadrature and Fourier routes give twice this value.
    """
    gamma = float(gamma)
    if not gamma > 2:
        raise ValueError("closed form holds for gamma > 2")
    ratio = 1.0 if math.isinf(gamma) else gamma / (gamma - 1.0)
    value = -ratio * 2.0 ** (-d - 3) * np.pi ** (-(d + 1) / 2.0) * boundary_area
    return CoefficientResult(float(value), 0.0, "closed_form",
                             {"note": "compared against quadrature, not trusted"})


def b_eta_infinity_gaussian(d, boundary_area, tol=1e-8):
    """B_inf = -(1/2)(2 pi)**(-(d+1)/2) Sigma(d) |boundary|."""
    s = sigma_series(d, tol)
    value = -0.5 * (2.0 * np.pi) ** (-(d + 1) / 2.0) * s * boundary_area
    return CoefficientResult(float(value), float(abs(value) * tol / max(s, 1e-300)),
                             "closed_form", {"sigma": s})


def continuity_scan(a_family, region, f, lambdas, quad=None, reference=None):
    """B(a_lambda) along a family, with deviations from B(a_0).

    ``reference`` is the limit symbol; by default ``a_family(0.0)``.
    Each result carries ``lambda`` and ``deviation`` in its meta.
    """
    quad = quad or QuadratureSpec()
    ref = reference if reference is not None else a_family(0.0)
    B0 = b_coefficient(ref, region, f, quad)
    out = []
    for lam in lambdas:
        B = b_coefficient(a_family(lam), region, f, quad)
        out.append(CoefficientResult(B.value, B.error_estimate, B.method,
                                     {"lambda": float(lam), "reference": B0.value,
                                      "deviation": abs(B.value - B0.value)}))
    return out
