"""Test functions f, their derivatives and the U concavity-defect integral.

The family covers the Renyi functions

    eta_gamma(t) = ln(t**gamma + (1 - t)**gamma) / (1 - gamma),  0 < t < 1,

(zero outside (0, 1)), the von Neumann limit gamma = 1, the building
block ``-t ln|t|``, powers ``M |t|**delta``, the high-temperature
decompositions ``f_gamma`` / ``eta_eff`` and the limiting function
``eta_inf(t) = min(-ln(1 - t), -ln t)``.

Every catalog function is stored as a short list of encoded terms so the
compiled kernels in :mod:`renyigas._kernels` can evaluate it.
"""
from dataclasses import dataclass, field
import math
import warnings

import mpmath
import numpy as np
from scipy import integrate

from . import _kernels as K
from .quadrature import ConvergenceError, QuadratureSpec

SNAP = 1e-12
KINDS = ("renyi", "von_neumann", "eta_log", "power", "effective",
         "linear_shifted", "eta_infinity", "affine", "log", "neg_log1m",
         "combination", "custom")


@dataclass(frozen=True)
class EntropyFunction:
    """A tagged test function.

    Attributes
    ----------
    kind : str
        One of :data:`KINDS`.
    params : tuple
        Kind parameters, e.g. ``(gamma,)`` or ``(M, delta)``.
    terms : tuple
        Encoded ``(code, p1, p2, coef)`` terms; empty for ``custom``.
    singular_set : tuple of float
        Points where f fails to be smooth.
    hoelder_exponent : float
        A Hoelder exponent valid near the singular points.
    """

    kind: str
    params: tuple
    terms: tuple
    singular_set: tuple
    hoelder_exponent: float
    func: object = field(default=None, compare=False, repr=False)

    # ------------------------------------------------------------ values
    def __call__(self, t):
        if self.kind == "custom":
            return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)
        out = K.f_values(self.terms, t)
        return out if np.ndim(t) else float(out)

    @property
    def tag(self):
        if self.kind in ("renyi", "effective", "linear_shifted"):
            return f"{self.kind}:{_fmt(self.params[0])}"
        if self.kind == "power":
            return f"power:{_fmt(self.params[0])}:{_fmt(self.params[1])}"
        if self.kind == "affine":
            return f"affine:{_fmt(self.params[0])}:{_fmt(self.params[1])}"
        if self.kind == "combination":
            return "combination"
        return self.kind

    @property
    def is_affine(self):
        # M |t| is linear on [0, 1]
        return bool(self.terms) and all(_affine_term(t) for t in self.terms)

    @property
    def quadratic_coefficient(self):
        """c if f(t) = c t**2 + affine, else None."""
        if not self.terms:
            return None
        c = 0.0
        for code, p1, _p2, coef in self.terms:
            if code == K.POWER and p1 == 2.0:
                c += coef
            elif not _affine_term((code, p1, _p2, coef)):
                return None
        return c

    def second_derivative(self, t):
        """f'' off the singular set."""
        if self.kind == "custom":
            raise NotImplementedError("no second derivative for custom f")
        out = K.f_second_derivative(self.terms, t)
        return out if np.ndim(t) else float(out)

    def u_pairs(self, u, v):
        """Vectorized U(u, v; f) through the compiled kernel."""
        if self.kind == "custom":
            u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
            out = np.array([u_value(self, a, b) for a, b in zip(u.ravel(), v.ravel())])
            return out.reshape(u.shape)
        return K.u_pairs(self.terms, self.singular_set, u, v, self.hoelder_exponent)

    # ----------------------------------------------------- linear algebra
    def __add__(self, other):
        return combine([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return combine([(1.0, self), (-1.0, other)])

    def __mul__(self, c):
        return combine([(float(c), self)])

    __rmul__ = __mul__

    def __neg__(self):
        return combine([(-1.0, self)])


def _fmt(x):
    return f"{x:.12g}"


def _affine_term(term):
    return term[0] == K.AFFINE or (term[0] == K.POWER and term[1] == 1.0)


def _make(kind, params, terms, singular, hoelder, func=None):
    return EntropyFunction(kind, tuple(params), tuple(terms),
                           tuple(sorted(set(float(s) for s in singular))),
                           float(hoelder), func)


def _snap(gamma):
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    for anchor in (1.0, 2.0):
        if abs(gamma - anchor) < SNAP:
            return anchor
    return gamma


# --------------------------------------------------------------- catalog

def renyi(gamma):
    """eta_gamma; gamma = 1 returns the von Neumann function."""
    gamma = _snap(gamma)
    if gamma == 1.0:
        return von_neumann()
    return _make("renyi", (gamma,), [(K.RENYI, gamma, 0.0, 1.0)], (0.0, 1.0),
                 0.99 * min(1.0, gamma))


def von_neumann():
    return _make("von_neumann", (1.0,), [(K.VON_NEUMANN, 0.0, 0.0, 1.0)],
                 (0.0, 1.0), 0.99)


def eta_log():
    """-t ln|t|."""
    return _make("eta_log", (), [(K.ETA_LOG, 0.0, 0.0, 1.0)], (0.0,), 0.99)


def power(M, delta):
    """M |t|**delta."""
    delta = float(delta)
    if not delta > 0:
        raise ValueError("power exponent must be positive")
    smooth = delta == 2.0
    return _make("power", (float(M), delta), [(K.POWER, delta, 0.0, float(M))],
                 () if smooth else (0.0,), min(1.0, delta))


def quadratic(c=1.0):
    """c t**2."""
    return power(c, 2.0)


def affine(slope, intercept=0.0):
    return _make("affine", (float(slope), float(intercept)),
                 [(K.AFFINE, float(slope), float(intercept), 1.0)], (), 1.0)


def log():
    """Natural logarithm on (0, inf)."""
    return _make("log", (), [(K.LOG, 0.0, 0.0, 1.0)], (0.0,), 1.0)


def neg_log1m():
    """-ln(1 - t) on (-inf, 1)."""
    return _make("neg_log1m", (), [(K.NEG_LOG1M, 0.0, 0.0, 1.0)], (1.0,), 1.0)


def eta_infinity():
    """min(-ln(1 - t), -ln t) on (0, 1), zero outside."""
    return _make("eta_infinity", (), [(K.ETA_INF, 0.0, 0.0, 1.0)],
                 (0.0, 0.5, 1.0), 0.99)


def custom(func, singular_set=(), hoelder_exponent=1.0):
    """Black-box f with declared singular set and Hoelder exponent.

    Only the scalar adaptive U quadrature supports it.
    """
    return _make("custom", (), (), singular_set, hoelder_exponent, func)


def combine(pairs):
    """Linear combination sum_k c_k f_k of catalog functions."""
    terms, sing, hoelder = [], set(), 1.0
    for c, f in pairs:
        if f.kind == "custom":
            raise ValueError("custom functions cannot be combined")
        for code, p1, p2, coef in f.terms:
            terms.append((code, p1, p2, float(c) * coef))
        sing.update(f.singular_set)
        hoelder = min(hoelder, f.hoelder_exponent)
    if len(pairs) == 1 and pairs[0][0] == 1.0:
        return pairs[0][1]
    return _make("combination", (), terms, sing, hoelder)


def _regime(gamma):
    if gamma < 1.0:
        return "lt1"
    if gamma == 1.0:
        return "eq1"
    if gamma < 2.0:
        return "lt2"
    if gamma == 2.0:
        return "eq2"
    return "gt2"


def effective(gamma):
    """eta_gamma^eff, the small-t model of f_gamma."""
    gamma = _snap(gamma)
    r = _regime(gamma)
    if r in ("lt1", "lt2"):
        terms, sing, h = [(K.POWER, gamma, 0.0, 1.0 / (1.0 - gamma))], (0.0,), min(1.0, gamma)
    elif r == "eq1":
        terms, sing, h = [(K.ETA_LOG, 0.0, 0.0, 1.0)], (0.0,), 0.99
    elif r == "eq2":
        terms, sing, h = [(K.POWER, 3.0, 0.0, -4.0 / 3.0)], (0.0,), 1.0
    else:
        terms, sing, h = [(K.POWER, 2.0, 0.0, gamma / (2.0 * (gamma - 1.0)))], (), 1.0
    return _make("effective", (gamma,), terms, sing, h)


def linear_shifted(gamma):
    """f_gamma: eta_gamma minus its linear part at t = 0."""
    gamma = _snap(gamma)
    base = renyi(gamma)
    r = _regime(gamma)
    if r == "lt1":
        slope = 0.0
    elif r == "eq1":
        slope = 1.0
    else:
        slope = gamma / (gamma - 1.0)
    terms = list(base.terms)
    if slope:
        terms.append((K.AFFINE, -slope, 0.0, 1.0))
    return _make("linear_shifted", (gamma,), terms, base.singular_set,
                 base.hoelder_exponent)


def delta_gamma(gamma):
    gamma = _snap(gamma)
    return {"lt1": gamma, "eq1": 1.0, "lt2": gamma, "eq2": 3.0, "gt2": 2.0}[_regime(gamma)]


def table1(gamma):
    """High-temperature decomposition ``(delta_gamma, f_gamma, eta_eff)``."""
    return delta_gamma(gamma), linear_shifted(gamma), effective(gamma)


FROM_TAG = {
    "renyi": lambda p: renyi(float(p[0])),
    "von_neumann": lambda p: von_neumann(),
    "eta1": lambda p: von_neumann(),
    "eta_log": lambda p: eta_log(),
    "power": lambda p: power(float(p[0]), float(p[1])),
    "quadratic": lambda p: quadratic(float(p[0]) if p else 1.0),
    "linear": lambda p: affine(float(p[0]) if p else 1.0, float(p[1]) if len(p) > 1 else 0.0),
    "affine": lambda p: affine(float(p[0]), float(p[1]) if len(p) > 1 else 0.0),
    "log": lambda p: log(),
    "neg_log1m": lambda p: neg_log1m(),
    "eta_infinity": lambda p: eta_infinity(),
    "effective": lambda p: effective(float(p[0])),
    "linear_shifted": lambda p: linear_shifted(float(p[0])),
}


def from_tag(tag):
    """Build a catalog function from a string such as ``renyi:0.5``."""
    name, *params = str(tag).split(":")
    try:
        return FROM_TAG[name](params)
    except KeyError:
        raise ValueError(f"unknown test function {tag!r}") from None
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad parameters in {tag!r}: {exc}") from None


# ------------------------------------------------------------ operations

def evaluate(f, t):
    """Value of ``f`` at ``t`` (scalar or array)."""
    return f(t)


def second_derivative_eta(gamma, t):
    """eta_gamma''(t) for t strictly inside (0, 1).

    For gamma != 1, with s = 1 - t and g = t**gamma + s**gamma,

        eta'' g**2 = -gamma (t s)**(gamma-2)
                     - gamma/(1-gamma) (t**(gamma-1) - s**(gamma-1))**2,

    and eta_1''(t) = -1/(t(1-t)).
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr <= 0.0) | (t_arr >= 1.0)):
        raise ValueError("second derivative requested at a singular endpoint")
    return renyi(gamma).second_derivative(t)


def u_value(f, u, v, quad=None):
    """U(u, v; f) = int_0^1 [f(tu + (1-t)v) - t f(u) - (1-t) f(v)] / (t(1-t)) dt.

    Closed forms are used for ``f = c t**2 + affine`` (U = -c (u-v)**2)
    and ``f = ln`` (U = (ln u - ln v)**2 / 2). Everything else goes
    through adaptive quadrature after the substitution
    t = s**2 / (s**2 + (1-s)**2), which turns the endpoint weight
    1/(t(1-t)) into 2/(s(1-s)) and doubles the local Hoelder order.
    """
    quad = quad or QuadratureSpec()
    u = float(u)
    v = float(v)
    if u == v:
        return 0.0
    c = f.quadratic_coefficient
    if c is not None:
        return -c * (u - v) ** 2
    if f.kind == "log":
        return 0.5 * (math.log(u) - math.log(v)) ** 2
    return _u_adaptive(f, u, v, quad.tolerance)


def _u_adaptive(f, u, v, tol):
    d = u - v
    fu = float(f(u))
    fv = float(f(v))

    def integrand(s):
        if s <= 0.0 or s >= 1.0:
            return 0.0
        den = s * s + (1.0 - s) ** 2
        t = s * s / den
        tau = (1.0 - s) ** 2 / den
        if t <= 0.5:
            x = v + t * d
            num = (float(f(x)) - fv) - t * (fu - fv)
        else:
            x = u - tau * d
            num = (float(f(x)) - fu) + tau * (fu - fv)
        # dt / (t (1-t)) = 2 ds / (s (1-s))
        return 2.0 * num / (s * (1.0 - s))

    lo, hi = min(u, v), max(u, v)
    points = []
    for sig in f.singular_set:
        if lo < sig < hi:
            t = (sig - v) / d
            # invert t = s^2/(s^2+(1-s)^2)
            r = math.sqrt(t / (1.0 - t))
            points.append(r / (1.0 + r))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, 0.0, 1.0, points=sorted(points) or None,
                                  epsabs=tol, epsrel=1e-13, limit=500)
    if not err <= 10.0 * max(tol, 1e-12 * abs(val)):
        raise ConvergenceError(f"U quadrature did not converge for u={u}, v={v}",
                               residual=err)
    return val


def concavity_classify(gamma, grid_size=2000):
    """``"concave"`` if eta_gamma'' has no positive sample, else ``"neither"``."""
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    t = np.linspace(1e-6, 1.0 - 1e-6, int(grid_size))
    d2 = second_derivative_eta(gamma, t)
    return "neither" if np.any(d2 > 0.0) else "concave"


# ------------------------------------------------ remainder (extended precision)

def _mp_eta_derivs(gamma, t):
    s = 1 - t
    if gamma == 1:
        e0 = -t * mpmath.log(t) - s * mpmath.log(s)
        return e0, mpmath.log(s / t), -1 / (t * s)
    g = t ** gamma + s ** gamma
    e0 = mpmath.log(g) / (1 - gamma)
    e1 = gamma * (t ** (gamma - 1) - s ** (gamma - 1)) / ((1 - gamma) * g)
    e2 = (-gamma * (t * s) ** (gamma - 2)
          - gamma / (1 - gamma) * (t ** (gamma - 1) - s ** (gamma - 1)) ** 2) / g ** 2
    return e0, e1, e2


def _mp_term_derivs(code, p1, coef, t):
    if code == K.AFFINE:
        return coef * p1 * t, coef * p1, mpmath.mpf(0)
    if code == K.POWER:
        p = mpmath.mpf(p1)
        return (coef * t ** p, coef * p * t ** (p - 1), coef * p * (p - 1) * t ** (p - 2))
    if code == K.ETA_LOG:
        return coef * (-t * mpmath.log(t)), coef * (-mpmath.log(t) - 1), coef * (-1 / t)
    if code == K.RENYI:
        return tuple(coef * x for x in _mp_eta_derivs(mpmath.mpf(p1), t))
    if code == K.VON_NEUMANN:
        return tuple(coef * x for x in _mp_eta_derivs(1, t))
    raise ValueError(f"no extended-precision derivative for term code {code}")


def remainder_limit_scan(gamma, k, t_list, dps=60):
    """t**(k - delta) * d^k/dt^k (f_gamma - eta_eff)(t) along ``t_list``.

    Derivatives are analytic; arithmetic runs at ``dps`` decimal digits
    because the difference cancels to many orders near t = 0.
    """
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    t_list = [float(t) for t in t_list]
    if any(not (0.0 < t < 0.5) for t in t_list):
        raise ValueError("t values must lie in (0, 1/2)")
    if any(b >= a for a, b in zip(t_list, t_list[1:])):
        raise ValueError("t values must be decreasing")
    delta, f_gamma, eta_eff = table1(gamma)
    out = []
    with mpmath.workdps(dps):
        for t in t_list:
            tm = mpmath.mpf(t)
            acc = mpmath.mpf(0)
            for sign, fn in ((1, f_gamma), (-1, eta_eff)):
                for code, p1, _p2, coef in fn.terms:
                    acc += sign * _mp_term_derivs(code, p1, mpmath.mpf(coef), tm)[k]
            out.append(float(tm ** (k - mpmath.mpf(delta)) * acc))
    return out
