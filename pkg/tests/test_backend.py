import numpy as np
import pytest

from renyigas import _accel
from renyigas import _kernels as K
from renyigas import entropy_functions as ef
from renyigas.finite_size._bessel import BesselSweep

needs_numba = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def both():
    """Run a callable on each backend and restore the active one."""
    def call(fn):
        prev = _accel.backend()
        try:
            _accel.set_backend("numba")
            a = fn()
            _accel.set_backend("numpy")
            b = fn()
        finally:
            _accel.set_backend(prev)
        return a, b
    return call


FUNCS = [ef.renyi(0.5), ef.renyi(3.0), ef.von_neumann(), ef.eta_infinity(),
         ef.quadratic() + 0.5 * ef.neg_log1m()]


@needs_numba
class TestParity:
    @pytest.mark.parametrize("f", FUNCS, ids=lambda f: f.tag)
    def test_f_values(self, both, f):
        t = np.linspace(0.0, 0.999, 301)
        a, b = both(lambda: K.f_values(f.terms, t))
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)

    @pytest.mark.parametrize("f", FUNCS[:3], ids=lambda f: f.tag)
    def test_second_derivative(self, both, f):
        t = np.linspace(0.01, 0.99, 99)
        a, b = both(lambda: K.f_second_derivative(f.terms, t))
        np.testing.assert_allclose(a, b, rtol=1e-12)

    @pytest.mark.parametrize("f", FUNCS, ids=lambda f: f.tag)
    def test_u_pairs(self, both, f, rng):
        u = rng.uniform(0.0, 0.99, 200)
        v = np.concatenate([rng.uniform(0.0, 0.99, 190), np.zeros(10)])
        a, b = both(lambda: K.u_pairs(f.terms, f.singular_set, u, v, f.hoelder_exponent))
        np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-14)

    @pytest.mark.parametrize("spherical", [False, True])
    def test_bessel(self, both, spherical):
        x = np.linspace(0.1, 50.0, 200)
        a, b = both(lambda: np.array([v.copy() for _, v in BesselSweep(x, 30, spherical)]))
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


class TestSelection:
    def test_unknown(self):
        with pytest.raises(ValueError):
            _accel.set_backend("cuda")

    def test_roundtrip(self):
        prev = _accel.set_backend("numpy")
        try:
            assert _accel.backend() == "numpy"
        finally:
            _accel.set_backend(prev)
        assert _accel.backend() == prev

    def test_njit_fallback_decorates(self):
        fn = _accel.njit(lambda x: x + 1)
        assert fn(1) == 2
