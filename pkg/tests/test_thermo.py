import math

import numpy as np
import pytest
from scipy import integrate

from renyigas import thermo
from renyigas.quadrature import ConvergenceError


def rho_closed(T, mu):
    """(T / 2 pi) ln(1 + e^{mu/T}) for h = |xi|^2/2 in d = 2."""
    return T / (2 * math.pi) * math.log1p(math.exp(mu / T))


def rho_2d_brute(T, mu):
    """Independent 2-D polar quadrature of the Fermi occupation."""
    g = lambda r: r / (1 + math.exp(min((0.5 * r * r - mu) / T, 700)))
    val = integrate.quad(g, 0, math.sqrt(2 * (max(mu, 0) + 80 * T)), epsabs=1e-14,
                         epsrel=1e-13, limit=400)[0]
    return 2 * math.pi * val / (2 * math.pi) ** 2


class TestHamiltonian:
    @pytest.mark.parametrize("name,d", [("quadratic", 2), ("quartic", 2), ("quadratic", 3),
                                        ("perturbed", 2)])
    def test_homogeneity_and_nondegeneracy(self, name, d, rng):
        h = thermo.hamiltonian_from_tag(name, d)
        hi = h.limit_part
        m = h.degree_half
        xi = rng.normal(size=(20, d))
        for t in (0.5, 2.0, 7.0):
            np.testing.assert_allclose(hi(t * xi), t ** (2 * m) * hi(xi), rtol=1e-10)
        e = xi / np.linalg.norm(xi, axis=1, keepdims=True)
        assert np.min(hi(e)) >= 2 * h.nondegeneracy - 1e-10

    def test_perturbation_decays(self):
        h = thermo.perturbed_quadratic(2)
        s = np.geomspace(1, 1e3, 10)
        xi = np.stack([s, 0 * s], axis=1)
        r = np.abs(h(xi) - h.limit_part(xi)) / s ** 2
        assert np.all(np.diff(r) < 0) and r[-1] < 1e-8

    def test_anisotropic(self):
        h = thermo.hamiltonian_from_tag("anisotropic:1,2")
        np.testing.assert_allclose(h(np.array([1.0, 1.0])), h.limit_part(np.array([1.0, 1.0])))


class TestSymbols:
    def test_fermi_at_origin(self):
        a = thermo.fermi(thermo.quadratic(2), 1.0, 0.0)
        np.testing.assert_allclose(thermo.eval_symbol(a, np.zeros(2)), 0.5)

    def test_boltzmann(self):
        a = thermo.boltzmann(thermo.quadratic(2))
        np.testing.assert_allclose(a(np.array([2.0, 0.0])), math.exp(-2), rtol=1e-14)

    def test_model(self):
        a = thermo.model(thermo.quadratic(2), 0.1, 1.0, 4.0)
        np.testing.assert_allclose(a(np.zeros(2)), 1 / 1.1, rtol=1e-14)

    def test_fermi_range_and_overflow(self):
        a = thermo.fermi(thermo.quadratic(2), 0.01, 0.0)
        xi = np.stack([np.linspace(0, 1e3, 500), np.zeros(500)], axis=1)
        v = a(xi)
        assert np.all(np.isfinite(v))
        xs = np.stack([np.linspace(0, 30, 50), np.zeros(50)], axis=1)
        b = thermo.fermi(thermo.quadratic(2), 1.0, 0.0)(xs)
        assert np.all((b > 0) & (b < 1)) and np.all(np.diff(b) < 0)

    def test_limit_and_boltzmann_bounds(self, rng):
        h = thermo.quadratic(2)
        xi = rng.normal(size=(100, 2)) * 3
        assert np.all(thermo.limit_fermi(h)(xi) <= 0.5)
        assert np.all(thermo.boltzmann(h)(xi) <= 1.0)

    def test_model_bounds(self, rng):
        a = thermo.model(thermo.quadratic(2), 0.5, 1.0, 2.0)
        v = a(rng.normal(size=(100, 2)) * 3)
        assert np.all((v > 0) & (v <= 1 / 0.5))

    def test_tags(self):
        a = thermo.symbol_from_tag("fermi-quadratic:T=2:mu=0.5")
        assert a.kind == "fermi" and a.params == (2.0, 0.5)
        with pytest.raises(ValueError):
            thermo.symbol_from_tag("nonsense")

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            thermo.gaussian(2)(np.zeros(3))


class TestDensities:
    def test_ln2_over_2pi(self):
        np.testing.assert_allclose(thermo.particle_density(thermo.quadratic(2), 1.0, 0.0),
                                   math.log(2) / (2 * math.pi), rtol=1e-10)

    @pytest.mark.parametrize("T", [0.5, 1.0, 4.0])
    @pytest.mark.parametrize("mu", [-2.0, 0.0, 2.0])
    def test_closed_form_grid(self, T, mu):
        h = thermo.quadratic(2)
        val = thermo.particle_density(h, T, mu)
        np.testing.assert_allclose(val, rho_closed(T, mu), rtol=1e-8)
        np.testing.assert_allclose(val, rho_2d_brute(T, mu), rtol=1e-8)

    def test_empty_band(self):
        assert abs(thermo.particle_density(thermo.quadratic(2), 2.0, -40.0)) < 1e-9

    def test_monotone_in_mu(self):
        h = thermo.quadratic(2)
        vals = [thermo.particle_density(h, 1.0, mu) for mu in np.linspace(-3, 3, 13)]
        assert np.all(np.diff(vals) > 0)

    def test_nonradial_matches_radial(self):
        h_iso = thermo.anisotropic([1.0, 1.0])
        np.testing.assert_allclose(thermo.particle_density(h_iso, 1.0, 0.3),
                                   rho_closed(1.0, 0.3), rtol=1e-8)

    def test_entropy_density(self):
        h = thermo.quadratic(2)
        s1 = thermo.entropy_density(h, 1.0, 0.0, 1.0)
        s2 = thermo.entropy_density(h, 1.0, 0.0, 1.0, 1e-12)
        assert s1 > 0
        np.testing.assert_allclose(s1, s2, atol=1e-8)
        assert thermo.entropy_density(h, 1.0, -40.0, 1.0) <= 1e-9

    def test_entropy_density_nonnegative(self):
        h = thermo.quadratic(2)
        for g in (0.5, 2.0, 3.0):
            assert thermo.entropy_density(h, 0.7, 0.4, g) >= 0

    def test_entropy_density_von_neumann_closed(self):
        # s_1 = (2 pi)^-1 int_0^inf eta_1(1/(1+e^s)) ds for h = |xi|^2/2, T = 1, mu = 0
        from renyigas import entropy_functions as ef
        f = ef.von_neumann()
        ref = integrate.quad(lambda s: float(f(1 / (1 + math.exp(s)))), 0, 60, epsabs=1e-14)[0]
        np.testing.assert_allclose(thermo.entropy_density(thermo.quadratic(2), 1.0, 0.0, 1.0),
                                   ref / (2 * math.pi), rtol=1e-8)

    def test_integrated_dos(self):
        h = thermo.quadratic(2)
        np.testing.assert_allclose(thermo.integrated_dos(h, 3.0), 3.0 / (2 * math.pi), rtol=1e-12)
        assert thermo.integrated_dos(h, 1e-14) < 1e-14
        vals = [thermo.integrated_dos(h, x) for x in (0.5, 1, 2, 4)]
        assert np.all(np.diff(vals) > 0)

    def test_integrated_dos_anisotropic(self):
        # ellipse (w1 x^2 + w2 y^2) / 2 < L has area 2 pi L / sqrt(w1 w2)
        h = thermo.anisotropic([1.0, 4.0])
        L = 2.0
        area = 2 * math.pi * L / math.sqrt(h.weights[0] * h.weights[1])
        np.testing.assert_allclose(thermo.integrated_dos(h, L), area / (2 * math.pi) ** 2,
                                   rtol=1e-10)


class TestKappa:
    def test_quadratic_d2(self):
        np.testing.assert_allclose(thermo.kappa(thermo.quadratic(2)), 1 / (2 * math.pi), rtol=1e-10)

    def test_quadratic_d3(self):
        np.testing.assert_allclose(thermo.kappa(thermo.quadratic(3)), (2 * math.pi) ** -1.5,
                                   rtol=1e-10)

    def test_unit_weight(self):
        h = thermo.anisotropic([2.0, 2.0])
        np.testing.assert_allclose(thermo.kappa(h), 1 / (4 * math.pi), rtol=1e-9)

    def test_lambda(self):
        h = thermo.quadratic(2)
        k = thermo.kappa(h)
        np.testing.assert_allclose(thermo.lambda_T(k, 10.0, h), 0.1, rtol=1e-12)
        np.testing.assert_allclose(thermo.lambda_T(0.2, 1.0, h), 0.4 * math.pi, rtol=1e-10)
        lam = [thermo.lambda_T(0.2, T, h) for T in (10, 100, 1000)]
        assert np.all(np.diff(lam) < 0)


class TestSolveMu:
    def test_inverts_closed_form(self):
        h = thermo.quadratic(2)
        assert abs(thermo.solve_mu(h, 1.0, math.log(2) / (2 * math.pi))) < 1e-9

    @pytest.mark.parametrize("T,rho", [(0.5, 0.3), (2.0, 0.05), (10.0, 0.01)])
    def test_closed_form_inverse(self, T, rho):
        mu = thermo.solve_mu(thermo.quadratic(2), T, rho)
        np.testing.assert_allclose(mu, T * math.log(math.expm1(2 * math.pi * rho / T)),
                                   atol=1e-9)

    def test_fugacity_tends_to_one(self):
        h = thermo.quadratic(2)
        dev = [abs(thermo.fugacity_diagnostic(h, T, 0.2) - 1) for T in (10, 100, 1000)]
        assert np.all(np.diff(dev) < 0) and dev[-1] < 0.01

    def test_composition(self):
        h = thermo.quartic(2)
        mu = thermo.solve_mu(h, 1.5, 0.07)
        np.testing.assert_allclose(thermo.particle_density(h, 1.5, mu), 0.07, atol=1e-12)

    @pytest.mark.parametrize("rho", [0.0, -1.0])
    def test_rejects_nonpositive_density(self, rho):
        with pytest.raises(ValueError):
            thermo.solve_mu(thermo.quadratic(2), 1.0, rho)
