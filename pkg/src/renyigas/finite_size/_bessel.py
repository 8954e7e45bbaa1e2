"""All-order Bessel values by Miller's downward recurrence.

Every argument is swept in lockstep from a common starting order down to
zero, so the caller receives J_l (or the spherical j_l) for all
arguments one order at a time, from ``lmax`` down to 0. A first sweep
fixes the normalization; the second replays the identical recurrence.
"""
import math

import numpy as np

from .._accel import njit, use_numba

BIG = 1e250
SMALL = 1e-250


def start_order(xmax, lmax):
    m = max(float(lmax), float(xmax))
    n = int(m + 30 + math.sqrt(160.0 * max(m, 1.0)))
    return n + (n % 2)


@njit
def _advance_loop(x, a, b, cnt, n_from, n_to, spherical):
    # a holds order n, b order n+1; step down to n_to
    for k in range(x.shape[0]):
        ak = a[k]
        bk = b[k]
        ck = cnt[k]
        xk = x[k]
        for n in range(n_from, n_to, -1):
            fac = (2.0 * n + 1.0) if spherical else 2.0 * n
            nxt = fac / xk * ak - bk
            bk = ak
            ak = nxt
            if abs(ak) > BIG:
                ak *= SMALL
                bk *= SMALL
                ck += 1
        a[k] = ak
        b[k] = bk
        cnt[k] = ck


@njit
def _norm_loop(x, n_start):
    m = x.shape[0]
    total = np.empty(m)
    a0 = np.empty(m)
    a1 = np.empty(m)
    cnt = np.zeros(m, dtype=np.int64)
    for k in range(m):
        xk = x[k]
        ak = 1.0
        bk = 0.0
        s = 2.0 if n_start % 2 == 0 else 0.0
        ck = 0
        for n in range(n_start, 0, -1):
            nxt = 2.0 * n / xk * ak - bk
            bk = ak
            ak = nxt
            order = n - 1
            if order % 2 == 0:
                s += ak if order == 0 else 2.0 * ak
            if abs(ak) > BIG:
                ak *= SMALL
                bk *= SMALL
                s *= SMALL
                ck += 1
        total[k] = s
        a0[k] = ak
        a1[k] = bk
        cnt[k] = ck
    return total, a0, a1, cnt


def _advance_np(x, a, b, cnt, n_from, n_to, spherical):
    for n in range(n_from, n_to, -1):
        fac = (2.0 * n + 1.0) if spherical else 2.0 * n
        nxt = fac / x * a - b
        b[:] = a
        a[:] = nxt
        big = np.abs(a) > BIG
        if big.any():
            a[big] *= SMALL
            b[big] *= SMALL
            cnt[big] += 1


def _norm_np(x, n_start):
    a = np.ones_like(x)
    b = np.zeros_like(x)
    s = np.full_like(x, 2.0 if n_start % 2 == 0 else 0.0)
    cnt = np.zeros(x.shape, dtype=np.int64)
    for n in range(n_start, 0, -1):
        nxt = 2.0 * n / x * a - b
        b = a
        a = nxt
        order = n - 1
        if order % 2 == 0:
            s = s + (a if order == 0 else 2.0 * a)
        big = np.abs(a) > BIG
        if big.any():
            a = np.where(big, a * SMALL, a)
            b = np.where(big, b * SMALL, b)
            s = np.where(big, s * SMALL, s)
            cnt = cnt + big
    return s, a, b, cnt


class BesselSweep:
    """Iterate ``(l, values)`` for l = lmax, ..., 0.

    Parameters
    ----------
    x : ndarray
        Positive arguments.
    lmax : int
    spherical : bool
        Spherical j_l instead of cylindrical J_l.
    """

    def __init__(self, x, lmax, spherical=False):
        x = np.ascontiguousarray(np.asarray(x, dtype=float).ravel())
        if np.any(x <= 0.0):
            raise ValueError("Bessel sweep needs positive arguments")
        self.x = x
        self.lmax = int(lmax)
        self.spherical = bool(spherical)
        self.n_start = start_order(x.max(), lmax)
        self._numba = use_numba()
        if self.spherical:
            # normalize against closed-form j0, j1 at the end of the sweep
            a = np.ones_like(x)
            b = np.zeros_like(x)
            cnt = np.zeros(x.shape, dtype=np.int64)
            self._advance(a, b, cnt, self.n_start, 0)
            j0 = np.sin(x) / x
            j1 = np.sin(x) / x ** 2 - np.cos(x) / x
            use0 = np.abs(j0) >= np.abs(j1)
            self._scale = np.where(use0, a / np.where(use0, j0, 1.0),
                                   b / np.where(use0, 1.0, j1))
            self._cnt_final = cnt
        else:
            if self._numba:
                s, _, _, cnt = _norm_loop(x, self.n_start)
            else:
                s, _, _, cnt = _norm_np(x, self.n_start)
            self._scale = s
            self._cnt_final = cnt

    def _advance(self, a, b, cnt, n_from, n_to):
        if n_from <= n_to:
            return
        if self._numba:
            _advance_loop(self.x, a, b, cnt, n_from, n_to, self.spherical)
        else:
            _advance_np(self.x, a, b, cnt, n_from, n_to, self.spherical)

    def __iter__(self):
        x = self.x
        a = np.ones_like(x)
        b = np.zeros_like(x)
        cnt = np.zeros(x.shape, dtype=np.int64)
        n = self.n_start
        for order in range(self.lmax, -1, -1):
            self._advance(a, b, cnt, n, order)
            n = order
            # one pending rescale is exact; two or more means underflow
            lag = self._cnt_final - cnt
            fac = np.where(lag == 0, 1.0, np.where(lag == 1, SMALL, 0.0))
            yield order, (a * fac) / self._scale
