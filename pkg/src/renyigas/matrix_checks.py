"""Random-matrix checks of the operator and trace inequalities for eta_gamma.

All matrix functions go through the symmetric eigendecomposition with the
spectrum clamped to [0, 1]. Trials draw from independent RNG streams
spawned from one seed, so every margin is reproducible bit for bit and
independent of the worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy import optimize

from . import entropy_functions as ef

TOLERANCE = 1e-9
MAX_DIMENSION = 16
RANK_RULES = ("random", "half")


@dataclass(frozen=True)
class RandomEnsembleSpec:
    """Ensemble of self-adjoint contractions and orthogonal projections.

    Attributes
    ----------
    n : int
        Matrix dimension, at most 16.
    trials : int
        Number of independent draws.
    seed : int
        Root seed; trial ``k`` uses the ``k``-th spawned stream.
    rank : {"random", "half"} or int
        Projection rank: uniform in ``1..n-1``, ``n // 2``, or fixed.
    """

    n: int = 8
    trials: int = 1000
    seed: int = 0
    rank: object = "random"

    def __post_init__(self):
        if not 1 <= int(self.n) <= MAX_DIMENSION:
            raise ValueError(f"n must lie in 1..{MAX_DIMENSION}")
        if int(self.trials) < 1:
            raise ValueError("trials must be positive")
        if isinstance(self.rank, str):
            if self.rank not in RANK_RULES:
                raise ValueError(f"unknown rank rule {self.rank!r}")
        elif not 0 <= int(self.rank) <= int(self.n):
            raise ValueError("rank must lie in 0..n")

    def streams(self):
        seq = np.random.SeedSequence(int(self.seed))
        return [np.random.default_rng(s) for s in seq.spawn(int(self.trials))]

    def _rank(self, rng):
        n = int(self.n)
        if self.rank == "random":
            return int(rng.integers(1, n)) if n > 1 else 1
        if self.rank == "half":
            return max(1, n // 2)
        return int(self.rank)

    def draw(self, rng):
        """One pair (A, V): A with spectrum in [0, 1], V an orthonormal basis of ran P."""
        n = int(self.n)
        Q = random_orthogonal(n, rng)
        A = (Q * rng.uniform(0.0, 1.0, n)) @ Q.T
        A = 0.5 * (A + A.T)
        V = random_orthogonal(n, rng)[:, :self._rank(rng)]
        return A, V


@dataclass
class CheckReport:
    """Outcome of a randomized inequality check."""

    check: str
    gamma: float
    trials: int
    worst_margin: float
    passed: bool
    witness: dict = None
    note: str = ""
    margins: np.ndarray = field(default=None, repr=False)

    def to_record(self):
        rec = {"check": self.check, "gamma": float(self.gamma), "trials": int(self.trials),
               "worst_margin": float(self.worst_margin), "passed": bool(self.passed)}
        if self.witness is not None:
            rec["witness"] = self.witness
        if self.note:
            rec["note"] = self.note
        return rec

    def to_json(self):
        return json.dumps(self.to_record(), sort_keys=True)


@dataclass
class ConcavitySearchResult:
    """``status`` is ``"no_violation"`` or ``"counterexample"``.

    ``expected`` is the outcome predicted by operator concavity: no
    violation for gamma <= 1, a counterexample for gamma > 1.
    """

    status: str
    gamma: float
    trials: int
    margin: float
    A: np.ndarray = None
    B: np.ndarray = None
    note: str = ""

    @property
    def found(self):
        return self.status == "counterexample"

    @property
    def expected(self):
        return self.found == (self.gamma > 1.0)

    def to_record(self):
        rec = {"check": "midpoint_concavity", "gamma": float(self.gamma),
               "trials": int(self.trials), "worst_margin": float(self.margin),
               "status": self.status, "passed": bool(self.expected)}
        if self.found:
            rec["witness"] = {"A": self.A.tolist(), "B": self.B.tolist()}
        if self.note:
            rec["note"] = self.note
        return rec

    def to_json(self):
        return json.dumps(self.to_record(), sort_keys=True)


def random_orthogonal(n, rng):
    """Haar orthogonal matrix from the QR factorization of a Gaussian matrix."""
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.where(np.diag(R) < 0.0, -1.0, 1.0)


def matrix_function(f, A):
    """f(A) for symmetric A via eigh, with the spectrum clamped to [0, 1]."""
    w, U = np.linalg.eigh(A)
    return (U * f(np.clip(w, 0.0, 1.0))) @ U.T


def _projection(V):
    return V @ V.T


def davis_margin(gamma, A, P):
    """Smallest eigenvalue of P eta(PAP) P - P eta(A) P on the range of P."""
    f = ef.renyi(gamma)
    V = _range_basis(P)
    if V.shape[1] == 0:
        return 0.0
    P = np.asarray(P, float)
    D = P @ matrix_function(f, P @ A @ P) @ P - P @ matrix_function(f, A) @ P
    C = V.T @ D @ V
    return float(np.linalg.eigvalsh(0.5 * (C + C.T))[0])


def berezin_margin(gamma, A, P):
    """tr(P eta(PAP) P) - tr(P eta(A) P)."""
    f = ef.renyi(gamma)
    P = np.asarray(P, float)
    lhs = np.trace(P @ matrix_function(f, P @ A @ P) @ P)
    rhs = np.trace(P @ matrix_function(f, A) @ P)
    return float(lhs - rhs)


def compression_margins(A, mask, gammas):
    """Berezin margins for the coordinate compression of a large operator.

    ``A`` is a symmetric contraction (e.g. a discretized operator on an
    enclosing box) and ``mask`` selects the coordinates of the subregion.
    One eigendecomposition of A and one of its compression serve every
    gamma: tr P eta(A) P = sum_k eta(lambda_k) |P u_k|**2.
    """
    A = np.asarray(A, float)
    mask = np.asarray(mask, bool)
    lam, U = np.linalg.eigh(A)
    lam = np.clip(lam, 0.0, 1.0)
    weight = np.sum(U[mask] ** 2, axis=0)
    mu = np.clip(np.linalg.eigvalsh(A[np.ix_(mask, mask)]), 0.0, 1.0)
    out = []
    for g in gammas:
        f = ef.renyi(g)
        out.append(float(np.sum(f(mu)) - np.dot(f(lam), weight)))
    return out


def _range_basis(P):
    w, U = np.linalg.eigh(np.asarray(P, float))
    return U[:, w > 0.5]


def _run(check, gamma, spec, margin_fn, threads):
    def one(rng):
        A, V = spec.draw(rng)
        P = _projection(V)
        return margin_fn(gamma, A, P), A, P

    streams = spec.streams()
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            out = list(pool.map(one, streams))
    else:
        out = [one(r) for r in streams]
    margins = np.array([o[0] for o in out])
    k = int(np.argmin(margins))
    worst = float(margins[k])
    passed = worst >= -TOLERANCE
    witness = None if passed else {"A": out[k][1].tolist(), "P": out[k][2].tolist()}
    return CheckReport(check, float(gamma), int(spec.trials), worst, passed, witness,
                       margins=margins)


def davis_check(gamma, spec=None, threads=None):
    """Davis inequality eta(PAP) >= P eta(A) P on random pairs, gamma in (0, 1].

    Returns
    -------
    CheckReport
        ``worst_margin`` is the smallest eigenvalue of the difference
        restricted to ran P; a failing report carries the (A, P) witness.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("davis_check needs 0 < gamma <= 1")
    return _run("davis", gamma, spec or RandomEnsembleSpec(), davis_margin, threads)


def berezin_check(gamma, spec=None, threads=None):
    """Trace inequality tr P eta(PAP) P >= tr P eta(A) P, gamma in (0, 2]."""
    if not 0.0 < gamma <= 2.0:
        raise ValueError("berezin_check needs 0 < gamma <= 2")
    return _run("berezin", gamma, spec or RandomEnsembleSpec(), berezin_margin, threads)


def midpoint_margin(f, A, B):
    """Smallest eigenvalue of f((A+B)/2) - (f(A) + f(B))/2."""
    D = matrix_function(f, 0.5 * (A + B)) - 0.5 * (matrix_function(f, A) + matrix_function(f, B))
    return float(np.linalg.eigvalsh(0.5 * (D + D.T))[0])


def _rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def _pair(rng):
    """2x2 pair: A diagonal, B rotated, eigenvalue gaps in [0.01, 0.99]."""
    out = []
    for _ in range(2):
        gap = rng.uniform(0.01, 0.99)
        lo = rng.uniform(0.0, 1.0 - gap)
        out.append(np.array([lo, lo + gap]))
    R = _rotation(rng.uniform(0.0, math.pi))
    return np.diag(out[0]), R @ np.diag(out[1]) @ R.T


def midpoint_concavity_search(gamma, budget=100_000, seed=0, tol=TOLERANCE):
    """Search 2x2 pairs for a failure of midpoint operator concavity.

    Stops at the first pair whose margin falls below ``-tol``.

    Returns
    -------
    ConcavitySearchResult
        ``counterexample`` with the pair and margin, or ``no_violation``
        with the best (smallest) margin seen over the whole budget.
    """
    f = ef.renyi(gamma)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    best = math.inf
    for k in range(int(budget)):
        A, B = _pair(rng)
        m = midpoint_margin(f, A, B)
        if m < -tol:
            return ConcavitySearchResult("counterexample", float(gamma), k + 1, m, A, B)
        best = min(best, m)
    return ConcavitySearchResult("no_violation", float(gamma), int(budget), best,
                                 note=f"budget of {int(budget)} pairs exhausted")


def branch_profile(gamma, y):
    """2**(1-gamma) (1+y**2)**(gamma/2) cos(gamma arctan y)."""
    y = np.asarray(y, dtype=float)
    return 2.0 ** (1.0 - gamma) * (1.0 + y * y) ** (gamma / 2.0) * np.cos(gamma * np.arctan(y))


def branch_point_probe(gamma, y_grid=None):
    """First positive root y0 of :func:`branch_profile`, refined by bisection.

    The root is tan(pi / (2 gamma)). Returns ``inf`` when the profile keeps
    its sign on the grid, which is the case for gamma <= 1.
    """
    gamma = float(gamma)
    if not gamma > 0.0:
        raise ValueError("gamma must be positive")
    if y_grid is None:
        y_grid = np.concatenate([np.linspace(0.0, 10.0, 1001)[:-1], np.geomspace(10.0, 1e15, 400)])
    y = np.asarray(y_grid, dtype=float)
    v = branch_profile(gamma, y)
    flips = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    if flips.size == 0:
        return math.inf
    i = int(flips[0])
    lo, hi = y[i], y[i + 1]
    return float(optimize.brentq(lambda s: float(branch_profile(gamma, s)), lo, hi,
                                 xtol=1e-13, maxiter=500))


def run_suite(spec=None, gammas_davis=(0.5, 1.0), gammas_berezin=(0.5, 1.0, 1.5, 2.0),
              gammas_search=(0.5, 1.0, 1.5, 2.0, 3.0), budget=100_000, threads=None):
    """All checks as a list of JSON-ready records."""
    spec = spec or RandomEnsembleSpec()
    recs = [davis_check(g, spec, threads).to_record() for g in gammas_davis]
    recs += [berezin_check(g, spec, threads).to_record() for g in gammas_berezin]
    recs += [midpoint_concavity_search(g, budget, spec.seed).to_record() for g in gammas_search]
    return recs
