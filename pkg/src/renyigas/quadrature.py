"""Quadrature plumbing shared by all modules."""
from dataclasses import dataclass, asdict, replace
from functools import lru_cache

import mpmath
import numpy as np


class ConvergenceError(RuntimeError):
    """A numerical procedure did not reach its tolerance.

    Attributes
    ----------
    residual : float
        Last available error indicator.
    history : list
        Optional trail of intermediate values.
    """

    def __init__(self, message, residual=float("nan"), history=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history or [])


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization parameters for the coefficient integrals.

    Parameters
    ----------
    pv_cutoff : float
        Smallest-scale cutoff eps of the principal value integral; the
        values at eps, eps/2 and eps/4 are extrapolated to eps -> 0.
    t_max : float or None
        Upper limit of the shift integral. ``None`` picks twice the
        symbol support radius.
    xi_radius : float or None
        Momentum truncation radius. ``None`` derives it from the symbol
        decay and ``symbol_floor``.
    nodes_t : int
        Gauss points per panel of the shift variable.
    nodes_x : int
        Gauss points along a line of length ``2 * xi_radius``.
    nodes_perp : int
        Gauss points per transverse axis.
    tolerance : float
        Target absolute accuracy.
    refinement_levels : int
        1 = single pass; 2 also runs a coarser pass and adds the
        difference to the error estimate.
    symbol_floor : float
        Symbol values below this count as zero when sizing domains.
    """

    pv_cutoff: float = 0.02
    t_max: float | None = None
    xi_radius: float | None = None
    nodes_t: int = 8
    nodes_x: int = 64
    nodes_perp: int = 32
    tolerance: float = 1e-8
    refinement_levels: int = 1
    symbol_floor: float = 1e-16

    def __post_init__(self):
        if not self.pv_cutoff > 0:
            raise ValueError("pv_cutoff must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.nodes_t < 2 or self.nodes_x < 4 or self.nodes_perp < 2:
            raise ValueError("node counts too small")
        if self.refinement_levels not in (1, 2):
            raise ValueError("refinement_levels must be 1 or 2")

    def coarsened(self):
        """A cheaper spec used for the two-level error estimate."""
        return replace(
            self,
            nodes_t=max(4, (2 * self.nodes_t) // 3),
            nodes_x=max(16, (2 * self.nodes_x) // 3),
            nodes_perp=max(8, (2 * self.nodes_perp) // 3),
            refinement_levels=1,
        )

    def to_dict(self):
        return asdict(self)


@lru_cache(maxsize=64)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n, a=0.0, b=1.0):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss(edges, n):
    """Gauss rule with ``n`` points on every panel between ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = _leggauss(int(n))
    lo = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    nodes = lo + half * (x + 1.0)
    weights = half * w
    return nodes.ravel(), weights.ravel()


def geometric_edges(a, b, ratio=0.5, smallest=None, n_panels=None):
    """Panel edges on ``[a, b]`` shrinking geometrically toward ``a``."""
    length = b - a
    if n_panels is None:
        n_panels = int(np.ceil(np.log(smallest / length) / np.log(ratio)))
        n_panels = max(n_panels, 1)
    offsets = length * ratio ** np.arange(n_panels, -1, -1, dtype=float)
    return np.concatenate([[a], a + offsets])


def _vn_moment(k):
    # int_0^1 (-s ln s - (1-s) ln(1-s)) s^k ds, exact
    k = mpmath.mpf(k)
    h1 = mpmath.harmonic(k + 1)
    h2 = mpmath.harmonic(k + 2)
    return 1 / (k + 2) ** 2 + h1 / (k + 1) - h2 / (k + 2)


@lru_cache(maxsize=8)
def entropy_weight_rule(n=10):
    """Gauss rule on [0, 1] for the weight -s ln s - (1-s) ln(1-s).

    Built by the Chebyshev moment algorithm in 80-digit arithmetic, then
    rounded to float. The weights sum to 1/2.
    """
    with mpmath.workdps(80):
        m = [_vn_moment(k) for k in range(2 * n)]
        # modified Chebyshev algorithm (ordinary moments)
        alpha = [mpmath.mpf(0)] * n
        beta = [mpmath.mpf(0)] * n
        sig_prev = [mpmath.mpf(0)] * (2 * n)
        sig = list(m)
        alpha[0] = m[1] / m[0]
        beta[0] = m[0]
        for k in range(1, n):
            sig_new = [mpmath.mpf(0)] * (2 * n)
            for l in range(k, 2 * n - k):
                sig_new[l] = (sig[l + 1] - alpha[k - 1] * sig[l]
                              - beta[k - 1] * sig_prev[l])
            alpha[k] = (sig_new[k + 1] / sig_new[k]) - (sig[k] / sig[k - 1])
            beta[k] = sig_new[k] / sig[k - 1]
            sig_prev, sig = sig, sig_new
        J = mpmath.matrix(n, n)
        for i in range(n):
            J[i, i] = alpha[i]
            if i + 1 < n:
                J[i, i + 1] = J[i + 1, i] = mpmath.sqrt(beta[i + 1])
        E, Q = mpmath.eigsy(J)
        nodes = np.array([float(E[i]) for i in range(n)])
        weights = np.array([float(beta[0] * Q[0, i] ** 2) for i in range(n)])
    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights
