"""Catalog of truncation regions: balls, axis boxes, annuli, half-spaces."""
from dataclasses import dataclass
import math

import numpy as np

from .quadrature import gauss_legendre

SHAPES = ("ball", "axis_box", "annulus", "half_plane")


def _ball_volume(d, R):
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * R ** d


def _sphere_area(d, R):
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0) * R ** (d - 1)


def lens_area(R1, R2, r):
    """Area of the intersection of two disks with centers ``r`` apart."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    small, big = min(R1, R2), max(R1, R2)
    inside = r <= big - small
    out[inside] = math.pi * small ** 2
    mid = (r > big - small) & (r < R1 + R2)
    rm = r[mid]
    if rm.size:
        c1 = np.clip((rm ** 2 + R1 ** 2 - R2 ** 2) / (2 * rm * R1), -1.0, 1.0)
        c2 = np.clip((rm ** 2 + R2 ** 2 - R1 ** 2) / (2 * rm * R2), -1.0, 1.0)
        k = (-rm + R1 + R2) * (rm + R1 - R2) * (rm - R1 + R2) * (rm + R1 + R2)
        out[mid] = (R1 ** 2 * np.arccos(c1) + R2 ** 2 * np.arccos(c2)
                    - 0.5 * np.sqrt(np.maximum(k, 0.0)))
    return out


def lens_volume(R1, R2, r):
    """Volume of the intersection of two balls in R^3 with centers ``r`` apart."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    small, big = min(R1, R2), max(R1, R2)
    inside = r <= big - small
    out[inside] = 4.0 / 3.0 * math.pi * small ** 3
    mid = (r > big - small) & (r < R1 + R2)
    rm = r[mid]
    if rm.size:
        out[mid] = (math.pi * (R1 + R2 - rm) ** 2
                    * (rm ** 2 + 2 * rm * (R1 + R2) - 3 * (R1 - R2) ** 2) / (12 * rm))
    return out


@dataclass(frozen=True)
class Region:
    """A truncation set Lambda, or its complement when ``complement`` is set.

    Parameters
    ----------
    shape : str
        ball, axis_box, annulus or half_plane.
    dimension : int
        2 or 3.
    params : tuple
        ball: (R, center); axis_box: (lo, hi); annulus: (R_in, R_out);
        half_plane: (normal,).
    """

    shape: str
    dimension: int
    params: tuple
    complement: bool = False

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")

    # ------------------------------------------------------------ metrics
    @property
    def bounded(self):
        return self.shape != "half_plane" and not self.complement

    @property
    def base(self):
        """The bounded set underlying a complement."""
        return Region(self.shape, self.dimension, self.params, False)

    def complemented(self):
        return Region(self.shape, self.dimension, self.params, not self.complement)

    @property
    def volume(self):
        if not self.bounded:
            return math.inf
        return self._base_volume()

    def _base_volume(self):
        d = self.dimension
        if self.shape == "ball":
            return _ball_volume(d, self.params[0])
        if self.shape == "axis_box":
            lo, hi = self.params
            return float(np.prod(np.subtract(hi, lo)))
        if self.shape == "annulus":
            r0, r1 = self.params
            return _ball_volume(d, r1) - _ball_volume(d, r0)
        return math.inf

    @property
    def boundary_measure(self):
        """|boundary|; per unit area for a half-space."""
        d = self.dimension
        if self.shape == "ball":
            return _sphere_area(d, self.params[0])
        if self.shape == "axis_box":
            L = np.subtract(self.params[1], self.params[0])
            return float(sum(np.prod(np.delete(L, i)) for i in range(d)) * 2)
        if self.shape == "annulus":
            return _sphere_area(d, self.params[0]) + _sphere_area(d, self.params[1])
        return 1.0

    @property
    def feature_size(self):
        if self.shape == "ball":
            return self.params[0]
        if self.shape == "axis_box":
            return float(np.min(np.subtract(self.params[1], self.params[0])))
        if self.shape == "annulus":
            return self.params[1] - self.params[0]
        return math.inf

    @property
    def center(self):
        if self.shape == "ball":
            return np.asarray(self.params[1], dtype=float)
        if self.shape == "axis_box":
            return 0.5 * (np.asarray(self.params[0]) + np.asarray(self.params[1]))
        return np.zeros(self.dimension)

    def bounding_box(self, margin=0.0):
        """(lo, hi) of a box containing the base set, enlarged by ``margin``."""
        d = self.dimension
        if self.shape == "ball":
            c = self.center
            return c - self.params[0] - margin, c + self.params[0] + margin
        if self.shape == "axis_box":
            return (np.asarray(self.params[0], float) - margin,
                    np.asarray(self.params[1], float) + margin)
        if self.shape == "annulus":
            R = self.params[1]
            return np.full(d, -R - margin), np.full(d, R + margin)
        raise ValueError("half-space has no bounding box")

    @property
    def tag(self):
        p = self.params
        if self.shape == "ball":
            s = f"ball:{p[0]:.12g}"
        elif self.shape == "axis_box":
            s = "box:" + ",".join(f"{a:.12g}" for a in np.subtract(p[1], p[0]))
        elif self.shape == "annulus":
            s = f"annulus:{p[0]:.12g}:{p[1]:.12g}"
        else:
            s = "half_plane"
        s += f":d={self.dimension}"
        return ("complement:" + s) if self.complement else s

    # ------------------------------------------------------- membership
    def contains(self, x):
        x = np.asarray(x, dtype=float)
        if self.shape == "ball":
            r = np.linalg.norm(x - self.center, axis=-1)
            inside = r < self.params[0]
        elif self.shape == "axis_box":
            lo, hi = self.params
            inside = np.all((x > np.asarray(lo)) & (x < np.asarray(hi)), axis=-1)
        elif self.shape == "annulus":
            r = np.linalg.norm(x, axis=-1)
            inside = (r > self.params[0]) & (r < self.params[1])
        else:
            inside = x @ np.asarray(self.params[0], float) < 0.0
        return ~inside if self.complement else inside

    def covariogram(self, z):
        """|Lambda intersect (Lambda + z)| for the bounded base set."""
        z = np.asarray(z, dtype=float)
        d = self.dimension
        if self.shape == "ball":
            r = np.linalg.norm(z, axis=-1) if z.ndim and z.shape[-1] == d else np.abs(z)
            R = self.params[0]
            return lens_area(R, R, r) if d == 2 else lens_volume(R, R, r)
        if self.shape == "axis_box":
            L = np.subtract(self.params[1], self.params[0])
            return np.prod(np.maximum(L - np.abs(z), 0.0), axis=-1)
        if self.shape == "annulus":
            r = np.linalg.norm(z, axis=-1) if z.ndim and z.shape[-1] == d else np.abs(z)
            a, b = self.params
            lens = lens_area if d == 2 else lens_volume
            return lens(b, b, r) - 2.0 * lens(b, a, r) + lens(a, a, r)
        raise ValueError("half-space has no finite covariogram")

    # ------------------------------------------------- boundary quadrature
    def boundary_nodes(self, n=64):
        """Points, outward unit normals and weights on the boundary.

        Weights sum to ``boundary_measure``. Normals point out of the
        region, so they flip for a complement.
        """
        d = self.dimension
        if self.shape == "ball":
            pts, nrm, w = _sphere_nodes(d, self.params[0], n)
            pts = pts + self.center
        elif self.shape == "axis_box":
            pts, nrm, w = _box_nodes(np.asarray(self.params[0], float),
                                     np.asarray(self.params[1], float), n)
        elif self.shape == "annulus":
            p1, n1, w1 = _sphere_nodes(d, self.params[1], n)
            p0, n0, w0 = _sphere_nodes(d, self.params[0], n)
            pts = np.concatenate([p1, p0])
            nrm = np.concatenate([n1, -n0])
            w = np.concatenate([w1, w0])
        else:
            nrm = np.asarray(self.params[0], float)[None, :]
            nrm = nrm / np.linalg.norm(nrm)
            pts = np.zeros((1, d))
            w = np.ones(1)
        if self.complement:
            nrm = -nrm
        return pts, nrm, w


def _sphere_nodes(d, R, n):
    if d == 2:
        th = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        nrm = np.stack([np.cos(th), np.sin(th)], axis=1)
        return R * nrm, nrm, np.full(n, 2.0 * np.pi * R / n)
    # product rule: Gauss in cos(theta), uniform in phi
    nc = max(2, n // 2)
    c, wc = gauss_legendre(nc, -1.0, 1.0)
    phi = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    C, P = np.meshgrid(c, phi, indexing="ij")
    S = np.sqrt(1.0 - C ** 2)
    nrm = np.stack([S * np.cos(P), S * np.sin(P), C], axis=-1).reshape(-1, 3)
    w = (np.outer(wc, np.full(n, 2.0 * np.pi / n)) * R ** 2).ravel()
    return R * nrm, nrm, w


def _box_nodes(lo, hi, n):
    d = lo.size
    pts, nrm, wts = [], [], []
    for axis in range(d):
        others = [i for i in range(d) if i != axis]
        rules = [gauss_legendre(n, lo[i], hi[i]) for i in others]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        wgrid = rules[0][1]
        for r in rules[1:]:
            wgrid = np.multiply.outer(wgrid, r[1])
        flat = [g.ravel() for g in grids]
        for side, val in ((-1.0, lo[axis]), (1.0, hi[axis])):
            p = np.zeros((flat[0].size, d))
            for k, i in enumerate(others):
                p[:, i] = flat[k]
            p[:, axis] = val
            e = np.zeros((flat[0].size, d))
            e[:, axis] = side
            pts.append(p)
            nrm.append(e)
            wts.append(np.asarray(wgrid).ravel())
    return np.concatenate(pts), np.concatenate(nrm), np.concatenate(wts)


def ball(R=1.0, d=2, center=None):
    center = tuple(np.zeros(d) if center is None else np.asarray(center, float))
    if not R > 0:
        raise ValueError("radius must be positive")
    return Region("ball", d, (float(R), center))


def axis_box(lo, hi):
    lo = tuple(float(x) for x in lo)
    hi = tuple(float(x) for x in hi)
    if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
        raise ValueError("need lo < hi componentwise")
    return Region("axis_box", len(lo), (lo, hi))


def annulus(R_in, R_out, d=2):
    if not 0 < R_in < R_out:
        raise ValueError("need 0 < R_in < R_out")
    return Region("annulus", d, (float(R_in), float(R_out)))


def half_plane(normal=(1.0, 0.0)):
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return Region("half_plane", n.size, (tuple(n),))


def region_from_tag(tag, d=2):
    """Parse ``ball:R``, ``box:Lx,Ly[,Lz]``, ``annulus:Rin:Rout``,
    ``half_plane``; a ``complement:`` prefix selects the complement."""
    comp = tag.startswith("complement:")
    if comp:
        tag = tag[len("complement:"):]
    name, *p = tag.split(":")
    p = [x for x in p if not x.startswith("d=")]
    if name == "ball":
        r = ball(float(p[0]) if p else 1.0, d)
    elif name == "box":
        L = [float(x) for x in p[0].split(",")] if p else [1.0] * d
        if len(L) == 1:
            L = L * d
        r = axis_box([-x / 2 for x in L], [x / 2 for x in L])
    elif name == "annulus":
        r = annulus(float(p[0]), float(p[1]), d)
    elif name in ("half_plane", "half_space"):
        r = half_plane(tuple([1.0] + [0.0] * (d - 1)))
    else:
        raise ValueError(f"unknown region {tag!r}")
    return r.complemented() if comp else r
