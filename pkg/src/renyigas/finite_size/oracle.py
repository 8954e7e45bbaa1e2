"""Hilbert-Schmidt oracle for the quadratic test function.

For f(t) = t**2 the trace defect is a squared Hilbert-Schmidt norm:

    tr D_alpha(a, Lambda; t**2) = -int_Lambda int_{R^d \\ Lambda} |k_alpha(x - y)|**2 dy dx
                                = -alpha**d int |check-a(u)|**2 (|Lambda| - g(u / alpha)) du

with g the covariogram of Lambda. For a half-space the bracket becomes
(u.n)_+ / alpha per unit boundary area.
"""
import math

import numpy as np

from ..quadrature import ConvergenceError, composite_gauss
from .kernel import kernel_table, kernel_transform

REL_TOL = 1e-3


def _sphere_area(d):
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def _radial_rule(u_max, n):
    edges = np.linspace(0.0, u_max, int(math.ceil(u_max / 0.5)) + 1)
    return composite_gauss(edges, n)


def _directions(d, n):
    """Directions and weights covering the sphere (weights sum to its area)."""
    if d == 2:
        th, w = composite_gauss(np.linspace(0.0, 2.0 * np.pi, 17), n)
        return np.stack([np.cos(th), np.sin(th)], axis=1), w
    c, wc = composite_gauss(np.linspace(-1.0, 1.0, 9), n)
    ph, wp = composite_gauss(np.linspace(0.0, 2.0 * np.pi, 17), n)
    C, P = np.meshgrid(c, ph, indexing="ij")
    S = np.sqrt(1.0 - C ** 2)
    e = np.stack([S * np.cos(P), S * np.sin(P), C], axis=-1).reshape(-1, 3)
    return e, np.outer(wc, wp).ravel()


def _evaluate(a, region, alpha, n):
    d = a.dimension
    if a.radial:
        tab = kernel_table(a)
        u, wu = _radial_rule(tab.u_max, n)
        k2 = tab.radial(u) ** 2
        if region.shape == "half_plane":
            # int (u.n)_+ over the sphere = area(S^{d-2}) / (d-1) * u; per unit area
            avg = 2.0 if d == 2 else math.pi
            return -alpha ** (d - 1) * avg * np.dot(wu, k2 * u ** d)
        if region.shape in ("ball", "annulus"):
            miss = region.base.volume - region.base.covariogram(u / alpha)
            return -alpha ** d * _sphere_area(d) * np.dot(wu, k2 * miss * u ** (d - 1))
        e, we = _directions(d, n)
        z = (u[:, None, None] * e[None, :, :]) / alpha
        miss = region.base.volume - region.base.covariogram(z)
        inner = miss @ we
        return -alpha ** d * np.dot(wu, k2 * inner * u ** (d - 1))
    # general even symbol: tensor grid in u, panels split at the kink u = 0
    if region.shape == "half_plane" or d != 2:
        raise ValueError("non-radial oracle is implemented for bounded planar regions")
    U = 12.0
    x, w = composite_gauss(np.linspace(-U, U, 13), max(4, n // 2))
    grids = np.meshgrid(*([x] * d), indexing="ij")
    uu = np.stack([g.ravel() for g in grids], axis=1)
    wt = w
    for _ in range(d - 1):
        wt = np.multiply.outer(wt, w)
    k2 = kernel_transform(a, uu) ** 2
    miss = region.base.volume - region.base.covariogram(uu / alpha)
    return -alpha ** d * float(np.sum(wt.ravel() * k2 * miss))


def hs_oracle_quadratic(a, region, alpha, quad=None, levels=(16, 24)):
    """tr D_alpha(a, Lambda; t**2) by direct quadrature.

    Balls and annuli use a radial rule against the exact covariogram,
    boxes add an angular rule, and a half-space returns the value per
    unit boundary area. Two node counts must agree to 0.1 %.
    """
    if not a.even:
        raise ValueError("symbol must be even")
    if a.dimension != region.dimension:
        raise ValueError("region and symbol dimensions differ")
    alpha = float(alpha)
    coarse = _evaluate(a, region, alpha, levels[0])
    fine = _evaluate(a, region, alpha, levels[1])
    if abs(fine - coarse) > REL_TOL * abs(fine):
        raise ConvergenceError("oracle quadrature not converged",
                               residual=abs(fine - coarse), history=[coarse, fine])
    return float(fine)
