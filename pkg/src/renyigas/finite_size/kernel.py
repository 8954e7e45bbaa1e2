"""Position-space kernels check-a(z) = (2 pi)**-d int exp(i z.xi) a(xi) dxi."""
import math

import numpy as np
from scipy import special
from scipy.interpolate import make_interp_spline

from ..quadrature import gauss_legendre

TABLE_STEP = 0.02
TABLE_RANGE = 80.0
RELATIVE_CUT = 1e-13


def _hankel(a, u, S, d):
    """Radial inverse transform at the points ``u`` (symbol cut at S)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = max(400, int(math.ceil(2.0 * S * float(u.max(initial=0.0)) / math.pi)) + 200)
    s, w = gauss_legendre(n, 0.0, S)
    prof = np.asarray(a.profile(s), dtype=float)
    out = np.empty_like(u)
    for lo in range(0, u.size, 512):
        us = np.outer(u[lo:lo + 512], s)
        if d == 2:
            out[lo:lo + 512] = special.j0(us) @ (w * prof * s) / (2.0 * math.pi)
        else:
            out[lo:lo + 512] = np.sinc(us / math.pi) @ (w * prof * s * s) / (2.0 * math.pi ** 2)
    return out


class KernelTable:
    """check-a on a uniform radial grid with quintic spline interpolation.

    Built once per radial symbol and read-only afterwards. Beyond
    ``u_max`` the kernel is below ``RELATIVE_CUT * |check-a(0)|`` and is
    returned as zero.
    """

    def __init__(self, a, step=TABLE_STEP, u_range=TABLE_RANGE):
        if not a.even:
            raise ValueError("kernel transform needs an even symbol")
        if not a.radial:
            raise ValueError("kernel table needs a radial symbol")
        self.dimension = a.dimension
        S = a.support_radius(1e-18)
        u = np.arange(0.0, u_range + step, step)
        vals = _hankel(a, u, S, a.dimension)
        peak = abs(vals[0]) if vals[0] != 0 else np.max(np.abs(vals))
        big = np.flatnonzero(np.abs(vals) > RELATIVE_CUT * max(peak, 1e-300))
        last = int(big[-1]) if big.size else 0
        stop = min(u.size, last + 16)
        self.u_max = float(u[stop - 1])
        self.value0 = float(vals[0])
        self._spline = make_interp_spline(u[:stop], vals[:stop], k=5)
        self._u = u[:stop]
        self._u.setflags(write=False)

    def radial(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        inside = r <= self.u_max
        out[inside] = self._spline(r[inside])
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return self.radial(np.linalg.norm(z, axis=-1))


def _tensor_transform(a, z, n=96):
    d = a.dimension
    S = a.support_radius(1e-18)
    x, w = gauss_legendre(n, -S, S)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    xi = np.stack([g.ravel() for g in grids], axis=1)
    wt = w
    for _ in range(d - 1):
        wt = np.multiply.outer(wt, w)
    aw = np.asarray(a(xi), dtype=float) * wt.ravel()
    z = np.atleast_2d(z)
    out = np.empty(z.shape[0])
    for lo in range(0, z.shape[0], 256):
        out[lo:lo + 256] = np.cos(z[lo:lo + 256] @ xi.T) @ aw
    return out / (2.0 * math.pi) ** d


_TABLES = {}


def kernel_table(a):
    """Cached :class:`KernelTable` for a radial symbol."""
    key = (a.tag, a.params, a.dimension, id(a.profile_fn))
    tab = _TABLES.get(key)
    if tab is None:
        tab = KernelTable(a)
        _TABLES[key] = tab
    return tab


def kernel_transform(a, z, quad=None):
    """check-a(z) = (2 pi)**-d int exp(i z.xi) a(xi) dxi.

    Radial symbols go through a cached Hankel table; others through a
    tensor Gauss cosine sum.
    """
    if not a.even:
        raise ValueError("kernel transform needs an even symbol")
    z = np.asarray(z, dtype=float)
    if z.ndim == 0 or z.shape[-1] != a.dimension:
        raise ValueError("z must have the symbol's dimension as last axis")
    if a.radial:
        return kernel_table(a)(z)
    shape = z.shape[:-1]
    return _tensor_transform(a, z.reshape(-1, a.dimension)).reshape(shape)
