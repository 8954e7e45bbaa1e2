"""Hamiltonians, Fermi-type symbols and thermodynamic densities.

Conventions: a_{T,mu}(xi) = 1 / (1 + exp((h(xi) - mu) / T)) and all
densities carry the factor (2 pi)**(-d).
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy import integrate, optimize, special

from . import entropy_functions as ef
from .quadrature import ConvergenceError, QuadratureSpec, gauss_legendre


def _sphere_area(d):
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def _norm(xi):
    return np.sqrt(np.sum(np.square(xi), axis=-1))


# ------------------------------------------------------------ Hamiltonian

@dataclass(frozen=True)
class Hamiltonian:
    """A dispersion relation h on R^d.

    Attributes
    ----------
    name : str
        Catalog tag.
    dimension : int
    degree_half : int
        m, with h_inf homogeneous of degree 2m.
    nondegeneracy : float
        nu with h_inf(xi) >= 2 nu |xi|**(2m).
    profile : callable or None
        h as a function of |xi| for rotation-invariant h.
    func : callable
        h on arrays of shape (..., d).
    limit : Hamiltonian or None
        The homogeneous part h_inf; ``None`` when h is itself homogeneous.
    """

    name: str
    dimension: int
    degree_half: int
    nondegeneracy: float
    profile: object = field(compare=False, repr=False)
    func: object = field(compare=False, repr=False)
    limit: object = field(default=None, compare=False, repr=False)
    weights: tuple = ()

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1] != self.dimension:
            raise ValueError("dimension mismatch")
        return self.func(xi)

    evaluate = __call__

    @property
    def radial(self):
        return self.profile is not None

    @property
    def limit_part(self):
        return self.limit if self.limit is not None else self

    @property
    def is_homogeneous(self):
        return self.limit is None

    def scaled(self, T):
        """h_T(xi) = h(T**(1/2m) xi) / T, the temperature-rescaled dispersion."""
        c = float(T) ** (1.0 / (2 * self.degree_half))
        T = float(T)
        if self.is_homogeneous:
            return self
        prof = None if self.profile is None else (lambda s, p=self.profile: p(c * np.asarray(s)) / T)
        fn = lambda xi, f=self.func: f(c * np.asarray(xi)) / T
        return Hamiltonian(f"{self.name}@T={T:.12g}", self.dimension, self.degree_half,
                           self.nondegeneracy, prof, fn, self.limit, self.weights)

    def sublevel_radius(self, level, direction=None):
        """Radius where h reaches ``level`` along a ray (radial or given)."""
        if direction is None:
            if not self.radial:
                raise ValueError("direction required for a non-radial h")
            g = lambda s: float(self.profile(np.asarray(s))) - level
        else:
            e = np.asarray(direction, dtype=float)
            e = e / np.linalg.norm(e)
            g = lambda s: float(self.func(s * e)) - level
        if g(0.0) >= 0.0:
            return 0.0
        hi = 1.0
        while g(hi) < 0.0:
            hi *= 2.0
            if hi > 1e12:
                raise ValueError("sub-level set is unbounded")
        return optimize.brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-15)


def quadratic(d=2):
    """h = |xi|**2 / 2."""
    return Hamiltonian("quadratic", d, 1, 0.25,
                       lambda s: 0.5 * np.square(s),
                       lambda xi: 0.5 * np.sum(np.square(xi), axis=-1))


def quartic(d=2):
    """h = |xi|**4."""
    return Hamiltonian("quartic", d, 2, 0.5,
                       lambda s: np.asarray(s, float) ** 4,
                       lambda xi: np.sum(np.square(xi), axis=-1) ** 2)


def perturbed_quadratic(d=2):
    """h = |xi|**2 / 2 + 1 / (1 + |xi|**2), bounded perturbation of the quadratic."""
    return Hamiltonian("perturbed_quadratic", d, 1, 0.25,
                       lambda s: 0.5 * np.square(s) + 1.0 / (1.0 + np.square(s)),
                       lambda xi: (0.5 * np.sum(np.square(xi), axis=-1)
                                   + 1.0 / (1.0 + np.sum(np.square(xi), axis=-1))),
                       limit=quadratic(d))


def anisotropic(weights):
    """h = sum_i w_i xi_i**2 / 2 (not rotation invariant)."""
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    d = w.size
    return Hamiltonian("anisotropic:" + ",".join(f"{x:.12g}" for x in w), d, 1,
                       float(w.min()) / 4.0, None,
                       lambda xi: 0.5 * np.sum(w * np.square(xi), axis=-1),
                       weights=tuple(w))


HAMILTONIANS = {"quadratic": quadratic, "quartic": quartic,
                "perturbed": perturbed_quadratic,
                "perturbed_quadratic": perturbed_quadratic}


def hamiltonian_from_tag(tag, d=2):
    name, *params = tag.split(":")
    if name == "anisotropic":
        return anisotropic([float(x) for x in params[0].split(",")])
    try:
        return HAMILTONIANS[name](d)
    except KeyError:
        raise ValueError(f"unknown Hamiltonian {tag!r}") from None


# ----------------------------------------------------------------- Symbol

@dataclass(frozen=True)
class Symbol:
    """A momentum-space symbol a(xi).

    Attributes
    ----------
    kind : str
        fermi, model, limit_fermi, boltzmann, gaussian or custom.
    dimension : int
    params : tuple
        Kind parameters, e.g. ``(T, mu)`` or ``(phi, omega, T)``.
    hamiltonian : Hamiltonian or None
    radial, even : bool
    decay : str
        ``"gaussian"``, ``"super-exponential"`` or ``"beta=<value>"``.
    """

    kind: str
    dimension: int
    params: tuple
    hamiltonian: object = field(compare=False, repr=False)
    radial: bool
    even: bool
    decay: str
    profile_fn: object = field(compare=False, repr=False)
    func: object = field(compare=False, repr=False)
    name: str = ""

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1] != self.dimension:
            raise ValueError("dimension mismatch")
        return self.func(xi)

    def profile(self, s):
        if not self.radial:
            raise ValueError("symbol is not rotation invariant")
        return self.profile_fn(np.asarray(s, dtype=float))

    @property
    def tag(self):
        return self.name or self.kind

    def amplitude(self, c):
        """The symbol c * a."""
        c = float(c)
        prof = None if self.profile_fn is None else (lambda s, p=self.profile_fn: c * p(s))
        return Symbol(self.kind if c == 1.0 else "custom", self.dimension, self.params + (c,),
                      self.hamiltonian, self.radial, self.even, self.decay, prof,
                      lambda xi, f=self.func: c * f(xi), f"{c:.12g}*{self.tag}")

    def support_radius(self, floor=1e-16):
        """Radius beyond which a(xi) < floor (searched along rays)."""
        if self.radial:
            dirs = [None]
        else:
            dirs = _probe_directions(self.dimension)
        best = 0.0
        for e in dirs:
            if e is None:
                g = lambda s: float(self.profile(s))
            else:
                g = lambda s, e=e: float(self.func(s * e))
            hi = 1.0
            while g(hi) >= floor:
                hi *= 1.5
                if hi > 1e8:
                    raise ValueError("symbol does not decay")
            lo = 0.0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if g(mid) >= floor:
                    lo = mid
                else:
                    hi = mid
            best = max(best, hi)
        return best


def _probe_directions(d, n=64):
    if d == 2:
        th = np.linspace(0.0, np.pi, n, endpoint=False)
        return list(np.stack([np.cos(th), np.sin(th)], axis=1))
    rng = np.random.default_rng(12345)
    v = rng.normal(size=(n, d))
    v = np.concatenate([np.eye(d), v / np.linalg.norm(v, axis=1, keepdims=True)])
    return list(v)


def _fermi_of(x):
    # 1 / (1 + exp(x)), safe for any real x
    return special.expit(-np.asarray(x, dtype=float))


def fermi(h, T, mu):
    """a_{T,mu} = 1 / (1 + exp((h - mu) / T))."""
    T = float(T)
    mu = float(mu)
    if not T > 0:
        raise ValueError("temperature must be positive")
    prof = None if not h.radial else (lambda s: _fermi_of((h.profile(s) - mu) / T))
    return Symbol("fermi", h.dimension, (T, mu), h, h.radial, True, "super-exponential",
                  prof, lambda xi: _fermi_of((h(xi) - mu) / T),
                  f"fermi[{h.name},T={T:.12g},mu={mu:.12g}]")


def _model_of(x, phi, omega):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        e = np.exp(-np.abs(x))
        return np.where(x > 0, e / (phi * e + omega), 1.0 / (phi + omega / e))


def model(h, phi, omega, T):
    """p_T = 1 / (phi + omega exp(h / T))."""
    phi, omega, T = float(phi), float(omega), float(T)
    if phi < 0 or not omega > 0 or not T > 0:
        raise ValueError("need phi >= 0, omega > 0, T > 0")
    prof = None if not h.radial else (lambda s: _model_of(h.profile(s) / T, phi, omega))
    return Symbol("model", h.dimension, (phi, omega, T), h, h.radial, True,
                  "super-exponential", prof, lambda xi: _model_of(h(xi) / T, phi, omega),
                  f"model[{h.name},phi={phi:.12g},omega={omega:.12g},T={T:.12g}]")


def limit_fermi(h_inf):
    """p_inf = 1 / (1 + exp(h_inf))."""
    prof = None if not h_inf.radial else (lambda s: _fermi_of(h_inf.profile(s)))
    return Symbol("limit_fermi", h_inf.dimension, (), h_inf, h_inf.radial, True,
                  "super-exponential", prof, lambda xi: _fermi_of(h_inf(xi)),
                  f"limit_fermi[{h_inf.name}]")


def boltzmann(h_inf):
    """exp(-h_inf)."""
    prof = None if not h_inf.radial else (lambda s: np.exp(-h_inf.profile(s)))
    return Symbol("boltzmann", h_inf.dimension, (), h_inf, h_inf.radial, True,
                  "super-exponential", prof, lambda xi: np.exp(-h_inf(xi)),
                  f"boltzmann[{h_inf.name}]")


def gaussian(d=2, scale=1.0):
    """exp(-|xi|**2 / (2 scale**2))."""
    scale = float(scale)
    return Symbol("gaussian", d, (scale,), None, True, True, "gaussian",
                  lambda s: np.exp(-0.5 * np.square(s / scale)),
                  lambda xi: np.exp(-0.5 * np.sum(np.square(xi), axis=-1) / scale ** 2),
                  f"gaussian[d={d},scale={scale:.12g}]")


def custom_symbol(func, d, profile=None, even=True, decay="super-exponential", name="custom"):
    return Symbol("custom", d, (), None, profile is not None, even, decay,
                  profile, func, name)


def rescaled_fermi(h, T, mu):
    """b_T(xi) = a_{T,mu}(T**(1/2m) xi), the Fermi symbol on the thermal scale."""
    return fermi(h.scaled(T), 1.0, float(mu) / float(T))


def symbol_from_tag(tag, d=2):
    """Parse catalog symbols such as ``gaussian``, ``boltzmann-quadratic``,
    ``limit_fermi-quadratic`` or ``fermi-quadratic:T=1:mu=0``."""
    name, *opts = tag.split(":")
    kw = dict(o.split("=", 1) for o in opts)
    base, _, hname = name.partition("-")
    if base == "gaussian":
        return gaussian(d, float(kw.get("scale", 1.0)))
    h = hamiltonian_from_tag(hname or "quadratic", d)
    if base == "boltzmann":
        return boltzmann(h.limit_part)
    if base == "limit_fermi":
        return limit_fermi(h.limit_part)
    if base == "fermi":
        return fermi(h, float(kw.get("T", 1.0)), float(kw.get("mu", 0.0)))
    if base == "model":
        return model(h, float(kw.get("phi", 1.0)), float(kw.get("omega", 1.0)),
                     float(kw.get("T", 1.0)))
    raise ValueError(f"unknown symbol {tag!r}")


def eval_symbol(a, xi):
    return a(xi)


# -------------------------------------------------------------- densities

def _tol(quad, default=1e-10):
    if quad is None:
        return default
    if isinstance(quad, QuadratureSpec):
        return min(quad.tolerance, default)
    return float(quad)


def _radial_integral(g, h, level, tail_rate, tol):
    """(2 pi)**(-d) int g(h(xi)) dxi for radial h, g decaying in h."""
    d = h.dimension
    # integrand ~ exp(-rate * h) beyond the level: cut where it is below tol/10
    cut = level + (math.log(10.0 / tol) + 10.0) / tail_rate
    R = h.sublevel_radius(max(cut, 1e-300))
    R = max(R, 1e-6)
    points = []
    if level > h.profile(np.asarray(0.0)):
        points.append(h.sublevel_radius(level))
    pts = sorted(p for p in points if 0.0 < p < R)

    def integrand(s):
        return float(g(h.profile(np.asarray(s)))) * s ** (d - 1)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, 0.0, R, points=pts or None, limit=500,
                                  epsabs=0.0, epsrel=min(tol, 1e-12))
        val2, _ = integrate.quad(integrand, R, 2.0 * R, limit=200, epsabs=0.0,
                                 epsrel=1e-8)
    scale = _sphere_area(d) / (2.0 * math.pi) ** d
    total = scale * (val + val2)
    if not err <= max(tol * abs(val), 1e-300) * 10 and err > 1e-14 * abs(val) + 1e-300:
        raise ConvergenceError("radial density quadrature did not converge",
                               residual=scale * err)
    return total


def _tensor_integral(g, h, level, tail_rate, tol, n_start=64, n_cap=None):
    d = h.dimension
    if n_cap is None:
        n_cap = 1024 if d == 2 else 128
    cut = level + (math.log(10.0 / tol) + 10.0) / tail_rate
    R = max(h.sublevel_radius(cut, direction=e) for e in _probe_directions(d, 32))
    prev = None
    n = n_start
    while True:
        x, w = gauss_legendre(n, -R, R)
        grids = np.meshgrid(*([x] * d), indexing="ij")
        pts = np.stack(grids, axis=-1)
        wt = w
        for _ in range(d - 1):
            wt = np.multiply.outer(wt, w)
        val = float(np.sum(wt * g(h(pts)))) / (2.0 * math.pi) ** d
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300):
            return val
        if 2 * n > n_cap:
            if prev is not None and abs(val - prev) <= 1e3 * tol * max(abs(val), 1e-300):
                return val
            raise ConvergenceError("tensor density quadrature did not converge",
                                   residual=abs(val - (prev if prev is not None else 0.0)))
        prev = val
        n *= 2


def _density(g, h, T, mu, tail_rate, quad):
    tol = _tol(quad)
    # substitute the thermal scale so the integrand has O(1) features
    # (homogeneous h is invariant: h(c xi) / T = h(xi))
    hs = h.scaled(T)
    jac = float(T) ** (h.dimension / (2.0 * h.degree_half))
    gg = lambda e: g(e - mu / T)
    level = mu / T
    if hs.radial:
        val = _radial_integral(gg, hs, level, tail_rate, tol)
    else:
        val = _tensor_integral(gg, hs, level, tail_rate, tol)
    return jac * val


def particle_density(h, T, mu, quad=None):
    """rho(T, mu) = (2 pi)**(-d) int a_{T,mu}(xi) dxi."""
    T = float(T)
    if not T > 0:
        raise ValueError("temperature must be positive")
    return _density(_fermi_of, h, T, float(mu), 1.0, quad)


def entropy_density(h, T, mu, gamma, quad=None):
    """s_gamma(T, mu) = (2 pi)**(-d) int eta_gamma(a_{T,mu}(xi)) dxi."""
    T = float(T)
    if not T > 0:
        raise ValueError("temperature must be positive")
    f = ef.renyi(gamma)
    rate = 0.95 * min(1.0, float(gamma))
    return max(0.0, _density(lambda e: f(_fermi_of(e)), h, T, float(mu), rate, quad))


def symbol_integral(a, f, quad=None):
    """int f(a(xi)) dxi (no (2 pi) factor), used for volume terms."""
    tol = _tol(quad, 1e-11)
    if a.radial:
        d = a.dimension
        R = a.support_radius(1e-40)

        def integrand(s):
            return float(f(a.profile(np.asarray(s)))) * s ** (d - 1)

        edges = np.linspace(0.0, R, 9)
        total = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for lo, hi in zip(edges[:-1], edges[1:]):
                total += integrate.quad(integrand, lo, hi, limit=200, epsabs=0.0,
                                        epsrel=tol)[0]
        return _sphere_area(d) * total
    d = a.dimension
    R = a.support_radius(1e-40)
    prev = None
    for n in (128, 256, 512):
        if d == 3 and n > 256:
            break
        x, w = gauss_legendre(n, -R, R)
        pts = np.stack(np.meshgrid(*([x] * d), indexing="ij"), axis=-1)
        wt = w
        for _ in range(d - 1):
            wt = np.multiply.outer(wt, w)
        val = float(np.sum(wt * f(np.maximum(a(pts), 0.0))))
        if prev is not None and abs(val - prev) <= 1e-9 * max(abs(val), 1e-300):
            return val
        prev = val
    return prev


def integrated_dos(h, T_level):
    """N(T) = (2 pi)**(-d) |{xi : h(xi) < T}|."""
    T_level = float(T_level)
    d = h.dimension
    if T_level <= 0.0:
        return 0.0
    if h.radial:
        r = h.sublevel_radius(T_level)
        vol = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * r ** d
        return vol / (2.0 * math.pi) ** d
    # star-shaped level sets: |set| = (1/d) int_{S^{d-1}} r(theta)**d dtheta
    if d == 2:
        th, w = gauss_legendre(256, 0.0, 2.0 * math.pi)
        r = np.array([h.sublevel_radius(T_level, (math.cos(t), math.sin(t))) for t in th])
        vol = np.sum(w * r ** 2) / 2.0
    else:
        ct, wc = gauss_legendre(48, -1.0, 1.0)
        ph, wp = gauss_legendre(96, 0.0, 2.0 * math.pi)
        vol = 0.0
        for c, a in zip(ct, wc):
            st = math.sqrt(1.0 - c * c)
            for p, b in zip(ph, wp):
                r = h.sublevel_radius(T_level, (st * math.cos(p), st * math.sin(p), c))
                vol += a * b * r ** 3 / 3.0
    return vol / (2.0 * math.pi) ** d


def kappa(h_inf, d=None, quad=None):
    """kappa = (2 pi)**(-d) int exp(-h_inf(xi)) dxi."""
    if d is not None and d != h_inf.dimension:
        raise ValueError("dimension mismatch")
    return _density(lambda e: np.exp(-np.asarray(e)), h_inf, 1.0, 0.0, 1.0, quad)


def lambda_T(rho, T, h_inf, d=None, quad=None):
    """lambda_T = rho T**(-d/2m) / kappa."""
    d = h_inf.dimension if d is None else d
    m = h_inf.degree_half
    return float(rho) * float(T) ** (-d / (2.0 * m)) / kappa(h_inf, d, quad)


def solve_mu(h, T, rho, tol=1e-12, quad=None):
    """Chemical potential with particle_density(h, T, mu) = rho.

    The density is strictly increasing in mu, so a bracket is grown
    geometrically from [-50 T, 50 T] and Brent's method finishes.
    """
    T = float(T)
    rho = float(rho)
    if not rho > 0:
        raise ValueError("density must be positive")
    if not T > 0:
        raise ValueError("temperature must be positive")
    qtol = min(_tol(quad, 1e-12), 1e-12)
    g = lambda mu: particle_density(h, T, mu, qtol) - rho
    lo, hi = -50.0 * T, 50.0 * T
    limit = 1e6 * max(1.0, T)
    while g(lo) > 0.0:
        lo *= 2.0
        if abs(lo) > limit:
            raise ConvergenceError("no bracket for mu below", residual=g(lo))
    while g(hi) < 0.0:
        hi *= 2.0
        if abs(hi) > limit:
            raise ConvergenceError("no bracket for mu above", residual=g(hi))
    mu = optimize.brentq(g, lo, hi, xtol=1e-14 * max(1.0, T), rtol=1e-15, maxiter=400)
    res = abs(g(mu))
    if res > tol:
        raise ConvergenceError("density residual above tolerance", residual=res)
    return mu


def fugacity_diagnostic(h, T, rho, mu=None):
    """exp(-mu/T) * lambda_T, which tends to 1 as T grows at fixed rho."""
    if mu is None:
        mu = solve_mu(h, T, rho)
    lam = lambda_T(rho, T, h.limit_part)
    return math.exp(-mu / T) * lam
