"""Compare the numba and numpy backends on the hot kernels.

Run with ``python benchmarks/bench_kernels.py [--repeat N] [--size N]``.
Each kernel is first called once per backend (compilation excluded), the
two outputs are compared, and the best wall time of ``--repeat`` runs is
reported.
"""
import argparse
import time

import numpy as np

from renyigas import _accel
from renyigas import _kernels as K
from renyigas import entropy_functions as ef
from renyigas.finite_size._bessel import BesselSweep


def u_pairs_case(size):
    rng = np.random.default_rng(0)
    u = rng.uniform(0.0, 1.0, size)
    v = rng.uniform(0.0, 1.0, size)
    f = ef.renyi(0.5)

    def run():
        return K.u_pairs(f.terms, f.singular_set, u, v, f.hoelder_exponent)
    return run


def bessel_case(size):
    x = np.linspace(0.05, 60.0, size)

    def run():
        acc = np.zeros_like(x)
        for ell, vals in BesselSweep(x, 80):
            acc += vals * vals
        return acc
    return run


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--size", type=int, default=20000)
    args = p.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba unavailable; only the numpy backend can run")
    cases = {"u_pairs": u_pairs_case(args.size), "bessel_sweep": bessel_case(args.size)}
    backends = ["numba", "numpy"] if _accel.HAVE_NUMBA else ["numpy"]
    print(f"{'kernel':<14}{'backend':<8}{'seconds':>10}{'speedup':>9}{'max diff':>11}")
    for name, fn in cases.items():
        times, outs = {}, {}
        for b in backends:
            prev = _accel.set_backend(b)
            try:
                outs[b] = fn()
                times[b] = best_time(fn, args.repeat)
            finally:
                _accel.set_backend(prev)
        diff = float(np.max(np.abs(outs[backends[0]] - outs[backends[-1]])))
        for b in backends:
            speed = times["numpy"] / times[b]
            print(f"{name:<14}{b:<8}{times[b]:>10.4f}{speed:>9.1f}{diff:>11.2e}")


if __name__ == "__main__":
    main()
