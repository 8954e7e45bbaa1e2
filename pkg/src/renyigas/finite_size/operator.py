"""Pixel Nystroem discretization of W_alpha(a, Lambda) and trace functionals."""
from dataclasses import dataclass, field
import math

import numpy as np

from .. import entropy_functions as ef
from .. import _kernels as K
from ..quadrature import QuadratureSpec
from ..thermo import symbol_integral
from . import sector
from .kernel import kernel_table, kernel_transform

NODE_CAP = 6000
CLAMP_TOL = 1e-6
CLAMP_ERROR = 1e-3


def spacing_rule(alpha, region):
    """h = min(1/(4 alpha), feature_size / 8)."""
    h = 1.0 / (4.0 * float(alpha))
    fs = region.base.feature_size
    if math.isfinite(fs):
        h = min(h, fs / 8.0)
    return h


def _lattice(lo, hi, h, origin):
    axes = []
    for a, b, o in zip(lo, hi, origin):
        m0 = math.ceil((a - o) / h - 1e-9)
        m1 = math.floor((b - o) / h + 1e-9)
        axes.append(np.arange(m0, m1 + 1))
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def grid_nodes(region, spacing, box=None):
    """Integer lattice indices and points strictly inside the region.

    Boxes use a cell-centered lattice anchored at their lower corner, so
    the cells tile the box exactly; balls and annuli use a lattice
    through their center. ``box`` (an axis_box region) bounds a
    complement.
    """
    d = region.dimension
    h = float(spacing)
    if region.complement:
        if box is None:
            raise ValueError("a complement needs an enclosing box")
        lo, hi = np.asarray(box.params[0], float), np.asarray(box.params[1], float)
        origin = lo + 0.5 * h
    elif region.shape == "axis_box":
        lo, hi = region.bounding_box()
        origin = lo + 0.5 * h
    elif region.shape == "half_plane":
        raise ValueError("half-space cannot be discretized")
    else:
        lo, hi = region.bounding_box()
        origin = region.center
    idx = _lattice(lo, hi, h, origin)
    pts = origin + idx * h
    keep = region.contains(pts)
    if box is not None:
        keep &= box.contains(pts)
    return idx[keep], pts[keep]


@dataclass
class DiscretizedOperator:
    """Dense matrix of W_alpha(a, Lambda) on a lattice.

    Entries are k_alpha(x_i - x_j) h**d with k_alpha(z) = alpha**d check-a(alpha z).
    """

    spacing: float
    nodes: np.ndarray
    matrix: np.ndarray
    alpha: float
    symbol_tag: str = ""
    region_tag: str = ""
    _eig: np.ndarray = field(default=None, repr=False)

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def volume(self):
        """Measure N h**d of the pixel set carried by the grid."""
        return self.size * self.spacing ** self.nodes.shape[1]

    def eigenvalues(self):
        if self._eig is None:
            self._eig = np.linalg.eigvalsh(self.matrix) if self.size else np.zeros(0)
            self._eig.setflags(write=False)
        return self._eig


def build_w(a, region, alpha, spacing=None, cap=NODE_CAP, box=None):
    """Assemble the pixel operator for ``a`` on ``region``.

    Raises
    ------
    ValueError
        When the node count exceeds ``cap``.
    """
    if not a.even:
        raise ValueError("symbol must be even")
    if a.dimension != region.dimension:
        raise ValueError("region and symbol dimensions differ")
    alpha = float(alpha)
    h = spacing_rule(alpha, region) if spacing is None else float(spacing)
    idx, pts = grid_nodes(region, h, box)
    n = idx.shape[0]
    if n > cap:
        raise ValueError(f"{n} grid nodes exceed the node cap of {cap}")
    d = region.dimension
    span = idx.max(axis=0) - idx.min(axis=0) if n else np.zeros(d, int)
    # kernel on every lattice offset, then gathered by index differences
    axes = [np.arange(-s, s + 1) for s in span]
    off = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    z = alpha * h * off
    if a.radial:
        tab = kernel_table(a)
        vals = tab.radial(np.linalg.norm(z, axis=-1))
    else:
        vals = kernel_transform(a, z)
    table = alpha ** d * vals * h ** d
    M = np.empty((n, n))
    shift = span
    for lo in range(0, n, 512):
        diff = idx[lo:lo + 512, None, :] - idx[None, :, :] + shift
        M[lo:lo + 512] = table[tuple(diff[..., k] for k in range(d))]
    M = 0.5 * (M + M.T)
    return DiscretizedOperator(h, pts, M, alpha, a.tag, region.tag)


def _is_polynomial(f):
    if f.kind == "custom" or not f.terms:
        return False
    for code, p1, _p2, _c in f.terms:
        if code == K.AFFINE:
            continue
        if code == K.POWER and p1 == int(p1) and int(p1) % 2 == 0:
            continue
        return False
    return True


def apply_to_spectrum(lam, f):
    """f on eigenvalues: raw for polynomial f, clamped to [0, 1] otherwise."""
    lam = np.asarray(lam, dtype=float)
    if _is_polynomial(f):
        return f(lam)
    if lam.size:
        excess = max(-float(lam.min()), float(lam.max()) - 1.0, 0.0)
        if excess > CLAMP_ERROR:
            raise ValueError(f"eigenvalue outside [0, 1] by {excess:.3g}; grid under-resolved")
    return f(np.clip(lam, 0.0, 1.0))


def trace_f_of_w(W, f):
    """sum_i f(lambda_i) over the eigenvalues of the discretized operator."""
    return float(np.sum(apply_to_spectrum(W.eigenvalues(), f)))


@dataclass(frozen=True)
class TraceResult:
    """tr D = eigen_part - volume_part."""

    value: float
    eigen_part: float
    volume_part: float
    method: str
    nodes: int
    volume: float
    alpha: float

    def __float__(self):
        return float(self.value)


def _check_f0(f):
    f0 = float(f(np.asarray([0.0]))[0])
    if not f0 == 0.0:
        raise ValueError("trace_d needs f(0) = 0")


def _auto_method(a, region, alpha, spacing, cap):
    if spacing is not None:
        return "pixel"
    if sector.supports(a, region):
        h = spacing_rule(alpha, region)
        vol = region.volume
        if vol / h ** region.dimension > 0.8 * cap:
            return "sector"
    return "pixel"


def trace_d(a, region, alpha, f, spacing=None, method="auto", cap=NODE_CAP,
            box=None, quad=None, operator=None, spectrum=None):
    """tr D_alpha(a, Lambda; f) = tr f(W) - (alpha/2pi)**d |Lambda| int f(a) dxi.

    Parameters
    ----------
    method : {"auto", "pixel", "sector"}
        ``pixel`` diagonalizes the lattice matrix and measures the volume
        term on the pixel set (N h**d). ``sector`` uses the angular
        channel decomposition for balls and annuli with the exact
        |Lambda|. ``auto`` picks pixel unless it would exceed the cap.
    operator, spectrum : optional
        Reuse a prebuilt :class:`DiscretizedOperator` or
        :class:`~renyigas.finite_size.sector.SectorSpectrum`.
    """
    _check_f0(f)
    alpha = float(alpha)
    d = region.dimension
    if f.is_affine:
        return TraceResult(0.0, 0.0, 0.0, "exact", 0, region.volume, alpha)
    if operator is not None:
        method = "pixel"
    elif spectrum is not None:
        method = "sector"
    elif method == "auto":
        method = _auto_method(a, region, alpha, spacing, cap)
    quad = quad or QuadratureSpec()
    if method == "pixel":
        W = operator or build_w(a, region, alpha, spacing, cap, box)
        eig = trace_f_of_w(W, f)
        vol = W.volume
        nodes = W.size
    elif method == "sector":
        sp = spectrum or sector.sector_spectrum(a, region, alpha,
                                                hoelder=f.hoelder_exponent)
        eig = sp.trace(lambda lam: apply_to_spectrum(lam, f))
        vol = sp.volume
        nodes = sum(c[2].size for c in sp.channels)
    else:
        raise ValueError(f"unknown method {method!r}")
    volume_part = (alpha / (2.0 * math.pi)) ** d * vol * symbol_integral(a, f, quad)
    return TraceResult(eig - volume_part, eig, volume_part, method, nodes, vol, alpha)
