"""Angular-momentum decomposition for disks, annuli, balls and shells.

For a radial symbol and a rotation-invariant region the operator splits
into angular channels. In channel l its kernel is

    d = 2:  K_l(r, r') = int_0^inf a(s/alpha) J_l(s r) J_l(s r') s ds
    d = 3:  K_l(r, r') = (2/pi) int_0^inf a(s/alpha) j_l(s r) j_l(s r') s**2 ds

on L2(r**(d-1) dr). Gauss rules in r and s give K_l = G G^T with

    G[i, q] = sqrt(w_i r_i**(d-1)) J_l(s_q r_i) sqrt(w_q s_q**(d-1) a_q c_d),

so each channel is positive semidefinite by construction. Channels l
and -l coincide in d = 2 (multiplicity 2); in d = 3 channel l carries
2l + 1 copies.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from ..quadrature import gauss_legendre
from ._bessel import BesselSweep

# Gauss nodes per unit of (momentum cutoff x length) / pi
RADIAL_DENSITY = 1.6
MOMENTUM_DENSITY = 1.6


@dataclass
class SectorSpectrum:
    """Eigenvalues per angular channel.

    Attributes
    ----------
    channels : list of (l, multiplicity, eigenvalues)
    volume : float
        Exact |Lambda|.
    alpha : float
    meta : dict
        Node counts, momentum cutoff and the largest channel used.
    """

    channels: list
    volume: float
    alpha: float
    meta: dict = field(default_factory=dict)

    def eigenvalues(self):
        """All eigenvalues and their multiplicities as flat arrays."""
        lam = np.concatenate([c[2] for c in self.channels]) if self.channels else np.zeros(0)
        mult = np.concatenate([np.full(c[2].size, c[1], dtype=float) for c in self.channels]) \
            if self.channels else np.zeros(0)
        return lam, mult

    def trace(self, fn):
        """sum over channels of multiplicity * sum fn(eigenvalues)."""
        total = 0.0
        for _l, m, lam in self.channels:
            if lam.size:
                total += m * float(np.sum(fn(lam)))
        return total


def radial_extent(region):
    if region.complement:
        raise ValueError("sector route needs a bounded region")
    if region.shape == "ball":
        # the center drops out: translations do not change the spectrum
        return 0.0, region.params[0]
    if region.shape == "annulus":
        return region.params[0], region.params[1]
    raise ValueError("sector route needs a ball or annulus")


def supports(a, region):
    return (a.radial and not region.complement
            and region.shape in ("ball", "annulus"))


def sector_spectrum(a, region, alpha, rel_floor=1e-12, hoelder=1.0,
                    radial_density=None, momentum_density=None, lmax=None):
    """Channel eigenvalues of W_alpha(a, Lambda).

    Parameters
    ----------
    a : Symbol
        Radial, nonnegative.
    region : Region
        Ball or annulus in d = 2 or 3.
    alpha : float
    rel_floor : float
        Symbol values below ``max(a) * rel_floor**(1/hoelder)`` are cut.
    hoelder : float
        Smallest Hoelder exponent of the test functions to be applied;
        lowers the cutoff so that f(a) is still negligible there.
    """
    if not a.radial:
        raise ValueError("sector route needs a radial symbol")
    d = region.dimension
    if a.dimension != d:
        raise ValueError("region and symbol dimensions differ")
    r0, r1 = radial_extent(region)
    alpha = float(alpha)
    rd = RADIAL_DENSITY if radial_density is None else radial_density
    md = MOMENTUM_DENSITY if momentum_density is None else momentum_density

    probe = np.linspace(0.0, 20.0, 2001)
    amax = float(np.max(a.profile(probe)))
    if not amax > 0:
        return SectorSpectrum([], region.volume, alpha, {"empty": True})
    floor = amax * rel_floor ** (1.0 / min(max(hoelder, 1e-3), 1.0))
    smax = a.support_radius(floor)
    S = alpha * smax
    n_r = int(math.ceil(rd * S * (r1 - r0) / math.pi)) + 24
    n_s = int(math.ceil(md * S * r1 / math.pi)) + 24
    r, wr = gauss_legendre(n_r, r0, r1)
    sig, ws = gauss_legendre(n_s, 0.0, smax)
    prof = np.asarray(a.profile(sig), dtype=float)
    if np.any(prof < 0):
        raise ValueError("sector route needs a nonnegative symbol")
    if d == 2:
        left = np.sqrt(wr * r)
        right = np.sqrt(ws * alpha ** 2 * sig * prof)
    else:
        left = np.sqrt(wr * r ** 2)
        right = np.sqrt(ws * alpha ** 3 * sig ** 2 * prof * 2.0 / math.pi)
    drop = floor * 1e-2
    if lmax is None:
        x = S * r1
        lmax = int(math.ceil(x + 10.0 * x ** (1.0 / 3.0) + 10.0))
    arg = np.outer(r, alpha * sig)
    while True:
        channels = []
        top_ok = True
        for l, vals in BesselSweep(arg, lmax, spherical=(d == 3)):
            G = vals.reshape(n_r, n_s) * left[:, None] * right[None, :]
            rows = np.einsum("ij,ij->i", G, G) > drop
            if l == lmax and rows.any():
                top_ok = False
                break
            if not rows.any():
                continue
            G = G[rows]
            cols = np.einsum("ij,ij->j", G, G) > drop * 1e-4
            G = G[:, cols]
            M = G @ G.T if G.shape[0] <= G.shape[1] else G.T @ G
            lam = np.linalg.eigvalsh(M)
            mult = (1 if l == 0 else 2) if d == 2 else 2 * l + 1
            channels.append((l, mult, np.clip(lam, 0.0, None)))
        if top_ok:
            break
        lmax = int(lmax * 1.25) + 8
    channels.reverse()
    return SectorSpectrum(channels, region.volume, alpha,
                          {"n_r": n_r, "n_s": n_s, "lmax": lmax, "s_max": smax})
