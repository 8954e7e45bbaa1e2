"""Backend selection for the compiled kernels.

The hot loops are written twice: once as scalar loops compiled with
numba, once as vectorized numpy. Setting ``RENYIGAS_DISABLE_NUMBA=1``
in the environment (or calling :func:`set_backend`) forces numpy.
"""
import os

_FLAG = os.environ.get("RENYIGAS_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by RENYIGAS_DISABLE_NUMBA")
    import numba
    # skip probing an outdated TBB runtime; OpenMP or workqueue suffice
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

_state = {"backend": "numba" if HAVE_NUMBA else "numpy"}


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or a no-op decorator without numba."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


prange = numba.prange if HAVE_NUMBA else range


def backend():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return _state["backend"]


def use_numba():
    return _state["backend"] == "numba"


def set_backend(name):
    """Switch kernel backend at runtime. Returns the previous name."""
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    prev = _state["backend"]
    _state["backend"] = name
    return prev


def set_threads(n):
    """Set the numba worker count (ignored without numba)."""
    if n is None:
        return
    if HAVE_NUMBA:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
